"""
CSV files for profile tables and phase trajectories.

Values are written with 17 significant digits so that a table read back is
bit-identical to the one written.
"""

import os
import tempfile
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import IO

import numpy as np

from integrand.models import InvalidParameterError

from .models import PhaseTrajectory, ProfileTable, TerminationReason

PROFILE_COLUMNS = ("t", "sigma", "dsigma")
TRAJECTORY_COLUMNS = ("tau", "w", "z", "dist_gamma1", "dist_gamma2", "dist_gamma3")
FULL_PRECISION = "%.17g"


@contextmanager
def atomic_output(path: str | os.PathLike[str]) -> Iterator[IO[str]]:
    """Write to a temporary file next to path and move it into place on success."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    handle = tempfile.NamedTemporaryFile(
        "w", dir=target.parent, prefix=f".{target.name}.", delete=False, newline=""
    )
    try:
        with handle:
            yield handle
        os.replace(handle.name, target)
    except BaseException:
        Path(handle.name).unlink(missing_ok=True)
        raise


def _write_columns(
    path: str | os.PathLike[str], columns: tuple[str, ...], data: np.ndarray
) -> None:
    with atomic_output(path) as handle:
        np.savetxt(
            handle,
            data,
            delimiter=",",
            header=",".join(columns),
            comments="",
            fmt=FULL_PRECISION,
        )


def _read_columns(path: str | os.PathLike[str]) -> tuple[list[str], np.ndarray]:
    with open(path) as handle:
        header = handle.readline().strip().split(",")
        data = np.loadtxt(handle, delimiter=",", ndmin=2)
    if data.shape[1] != len(header):
        raise InvalidParameterError(
            f"{path}: header has {len(header)} columns, rows have {data.shape[1]}"
        )
    return header, data


def write_profile_table(
    table: ProfileTable, path: str | os.PathLike[str], with_second_derivative: bool = False
) -> None:
    columns = PROFILE_COLUMNS
    data = [table.t, table.sigma, table.dsigma]
    if with_second_derivative and table.d2sigma is not None:
        columns = (*PROFILE_COLUMNS, "d2sigma")
        data.append(table.d2sigma)
    _write_columns(path, columns, np.column_stack(data))


def read_profile_table(path: str | os.PathLike[str]) -> ProfileTable:
    header, data = _read_columns(path)
    if tuple(header[:3]) != PROFILE_COLUMNS:
        raise InvalidParameterError(f"{path}: expected header starting t,sigma,dsigma")
    d2sigma = data[:, 3] if header[3:4] == ["d2sigma"] else None
    return ProfileTable(t=data[:, 0], sigma=data[:, 1], dsigma=data[:, 2], d2sigma=d2sigma)


def write_trajectory(trajectory: PhaseTrajectory, path: str | os.PathLike[str]) -> None:
    data = np.column_stack([getattr(trajectory, name) for name in TRAJECTORY_COLUMNS])
    _write_columns(path, TRAJECTORY_COLUMNS, data)


def read_trajectory(
    path: str | os.PathLike[str],
    termination: TerminationReason = TerminationReason.CONVERGED,
) -> PhaseTrajectory:
    header, data = _read_columns(path)
    if tuple(header) != TRAJECTORY_COLUMNS:
        raise InvalidParameterError(f"{path}: expected header {','.join(TRAJECTORY_COLUMNS)}")
    columns = {name: data[:, index] for index, name in enumerate(header)}
    w, z = columns["w"], columns["z"]
    return PhaseTrajectory(
        **columns,
        termination=termination,
        final_distance=float(np.hypot(w[-1] - 1, z[-1] - 1)),
    )
