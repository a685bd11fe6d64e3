"""Tabulate certification and decay rates over a grid of (k, l, p).

Usage:
    lawsonlab sweep --k 1..3 --l 1..3 --p 6,8,10 --b 0.01 --jobs 4
"""

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Any

from asymptotics.models import DEFAULT_WINDOW
from asymptotics.services import fit_tail, mu_max, mu_theory
from integrand.models import ConeParams, LabError, ProfileSide
from integrand.services import certify_profile, compat_q, power_profile
from ode.models import SolverOptions
from ode.solver import integrate_leaf

from ..base import BaseCommand
from ..config import RunConfig
from ..reports import write_rows

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ("k", "l", "p", "q", "mu_theory", "mu_hat", "rel_err", "mu_max", "verdict")


def sweep_row(
    k: int,
    l: int,
    p: float,
    b: float,
    window: tuple[float, float],
    opts: SolverOptions,
    seed: int,
) -> dict[str, Any]:
    """
    One cell of the sweep: certify phi, then integrate its leaf and fit the tail.

    The verdict is the certification verdict; a leaf that cannot be integrated
    or fitted leaves mu_hat empty.
    """
    params = ConeParams(k, l)
    row: dict[str, Any] = {"k": k, "l": l, "p": p}
    try:
        row["q"] = compat_q(params, p)
        profile = power_profile(params, ProfileSide.PHI, p, b=b)
    except LabError as e:
        logger.warning(f"({k},{l},p={p}): {e}")
        return {**row, "verdict": False}

    report = certify_profile(profile, params)
    row["verdict"] = report.verdict
    row["mu_max"] = mu_max(params, seed=seed).mu_max
    try:
        row["mu_theory"] = mu_theory(profile, params)
    except LabError as e:
        logger.warning(f"({k},{l},p={p}): {e}")
        return row
    if not report.verdict:
        return row

    try:
        table, _ = integrate_leaf(profile, params, opts)
        fit = fit_tail(table, window, profile=profile, params=params)
    except LabError as e:
        logger.warning(f"({k},{l},p={p}): no tail fit: {e}")
        return row
    row.update(mu_hat=fit.mu_hat, rel_err=fit.rel_err)
    return row


class SweepCommand(BaseCommand):
    name = "sweep"
    help = "Certification and rates over k, l and p ranges; exit 0 iff every row certifies"

    def handle(self, config: RunConfig) -> int:
        window = config.window or DEFAULT_WINDOW
        cells = list(itertools.product(config.k_values, config.l_values, config.p_values))
        logger.info(f"Sweeping {len(cells)} cells with {config.jobs} job(s)")
        arguments = [
            (k, l, p, config.b_phi, window, config.solver, config.seed) for k, l, p in cells
        ]

        if config.jobs == 1:
            rows = [sweep_row(*args) for args in arguments]
        else:
            with ProcessPoolExecutor(max_workers=config.jobs) as executor:
                rows = list(executor.map(sweep_row, *zip(*arguments, strict=True)))

        for row in rows:
            mu, bound = row.get("mu_theory"), row.get("mu_max")
            if mu is not None and bound is not None and mu > bound:
                logger.warning(
                    f"({row['k']},{row['l']},p={row['p']}): rate {mu:.6g} "
                    f"exceeds mu_max {bound:.6g}"
                )

        write_rows(config.out / "sweep.csv", SWEEP_COLUMNS, rows)
        failed = [row for row in rows if not row["verdict"]]
        if failed:
            logger.error(f"{len(failed)} of {len(rows)} cells failed certification")
        return 0 if not failed else 1
