"""
Report files written by the subcommands.

JSON reports carry a top-level "schema" version; non-finite floats become
null. The csv format writes the scalar fields of a report as one row.
"""

import csv
import json
import logging
import math
import os
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from integrand.schemas import SCHEMA_VERSION
from ode.tables import atomic_output

logger = logging.getLogger(__name__)


def _finite(value: Any) -> Any:
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, Mapping):
        return {key: _finite(item) for key, item in value.items()}
    if isinstance(value, list | tuple):
        return [_finite(item) for item in value]
    if isinstance(value, np.ndarray):
        return _finite(value.tolist())
    if isinstance(value, np.generic):
        return _finite(value.item())
    return value


def _format_number(value: Any) -> Any:
    if isinstance(value, float):
        return f"{value:.17g}" if math.isfinite(value) else ""
    return value


def flatten(document: Mapping[str, Any], prefix: str = "") -> dict[str, Any]:
    """Scalar leaves of a nested report keyed by dotted paths; lists are dropped."""
    row: dict[str, Any] = {}
    for key, value in document.items():
        name = f"{prefix}{key}"
        if isinstance(value, Mapping):
            row.update(flatten(value, f"{name}."))
        elif not isinstance(value, list | tuple):
            row[name] = value
    return row


def write_json(path: str | os.PathLike[str], document: Mapping[str, Any]) -> Path:
    target = Path(path)
    payload = {"schema": SCHEMA_VERSION, **_finite(dict(document))}
    with atomic_output(target) as handle:
        json.dump(payload, handle, indent=2, sort_keys=False)
        handle.write("\n")
    logger.info(f"Wrote {target}")
    return target


def write_rows(
    path: str | os.PathLike[str],
    columns: Sequence[str],
    rows: Iterable[Mapping[str, Any]],
) -> Path:
    """CSV with the given header; floats at full precision."""
    target = Path(path)
    with atomic_output(target) as handle:
        writer = csv.DictWriter(handle, fieldnames=list(columns), extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _format_number(_finite(value)) for key, value in row.items()})
    logger.info(f"Wrote {target}")
    return target


def write_report(
    out: str | os.PathLike[str], name: str, document: Mapping[str, Any], format: str = "json"
) -> Path:
    """
    Write `name.json`, or `name.csv` with one row of scalar fields.

    Args:
        out: Output directory
        name: File stem, e.g. "certify"
        document: Report dictionary as dumped by the schemas
        format: "json" or "csv"
    """
    if format == "csv":
        row = flatten({"schema": SCHEMA_VERSION, **_finite(dict(document))})
        return write_rows(Path(out) / f"{name}.csv", list(row), [row])
    return write_json(Path(out) / f"{name}.json", document)
