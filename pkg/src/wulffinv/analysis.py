"""Convergence sweeps, experimental orders, and the damped projection.

Increasing the mode count N produces a nonincreasing sequence of optimal
ratios; the sweep runner solves per N, records the tabulated quantities
(ratio, Wulff area, Sobolev norms, timings, problem sizes), and derives
experimental orders of convergence/complexity as log-ratio slopes between
successive runs.  The damped projection shrinks coefficients by (N - k)/N,
which keeps cone membership while converging at rate O(1/N) in the
first-order norm.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass

import numpy as np

from .anisotropy import AnisotropyFn, sobolev_norm
from .curve import PlanarCurve
from .relaxation import ExtractionError, solve_inverse_wulff
from .sdp import IpmOptions, SolverFailureError

__all__ = [
    "SweepRow",
    "GrowthReport",
    "convergence_sweep",
    "experimental_order",
    "damped_projection",
    "sobolev_growth_report",
    "write_sweep_csv",
    "SWEEP_CSV_HEADER",
]

SWEEP_CSV_HEADER = "N,ratio,wulff_area,norm0,norm1,norm2,seconds,n_c,n_v"

_RATIO_MONOTONE_TOL = 1e-6
_AT_UNITY_TOL = 1e-5          # covers the O(K^-2) discretization excess


@dataclass(frozen=True)
class SweepRow:
    """One solve of a convergence sweep."""

    modes: int
    ratio: float
    wulff_area: float
    norms: tuple          # (order-0, order-1, order-2 coefficient norms)
    elapsed_seconds: float
    constraint_count: int
    variable_count: int
    status: str = "optimal"
    sigma: AnisotropyFn | None = None

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


def convergence_sweep(curve: PlanarCurve, mode_counts,
                      options: IpmOptions | None = None,
                      augmentation: str = "trace") -> list:
    """Solve the inverse problem for each N in ``mode_counts`` (increasing).

    Solver failures annotate their row instead of aborting the sweep.  The
    ratio column must be nonincreasing across successful consecutive rows
    (within 1e-6); a violation raises ``RuntimeError`` since it indicates a
    broken solve.  Rows are produced sequentially so the timing column is
    meaningful.
    """
    ns = [int(n) for n in mode_counts]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("mode counts must be strictly increasing")
    if any(n < 2 for n in ns):
        raise ValueError("every mode count must be >= 2")

    rows = []
    for n in ns:
        start = time.perf_counter()
        try:
            result = solve_inverse_wulff(curve, n, options=options,
                                         augmentation=augmentation)
        except (SolverFailureError, ExtractionError) as exc:
            rows.append(SweepRow(
                modes=n, ratio=float("nan"), wulff_area=float("nan"),
                norms=(float("nan"),) * 3,
                elapsed_seconds=time.perf_counter() - start,
                constraint_count=0, variable_count=0,
                status=f"failed: {exc}", sigma=None))
            continue
        elapsed = time.perf_counter() - start
        rows.append(SweepRow(
            modes=n,
            ratio=result.ratio,
            wulff_area=result.wulff_area,
            norms=tuple(sobolev_norm(result.sigma, r) for r in (0, 1, 2)),
            elapsed_seconds=elapsed,
            constraint_count=result.diagnostics.constraint_count,
            variable_count=result.diagnostics.variable_count,
            status="optimal",
            sigma=result.sigma,
        ))

    good = [r for r in rows if r.ok]
    for prev, cur in zip(good, good[1:]):
        if cur.ratio > prev.ratio + _RATIO_MONOTONE_TOL:
            raise RuntimeError(
                f"ratio increased from N={prev.modes} ({prev.ratio}) to "
                f"N={cur.modes} ({cur.ratio}); solves are inconsistent")
    return rows


def experimental_order(values, mode_counts):
    """Log-ratio slopes ln(v_{k+1}/v_k) / ln(N_{k+1}/N_k).

    All values must be positive; the result has one entry fewer than the
    input.
    """
    vals = [float(v) for v in values]
    ns = [float(n) for n in mode_counts]
    if len(vals) != len(ns) or len(vals) < 2:
        raise ValueError("need equal-length sequences of at least 2 entries")
    if any(v <= 0 for v in vals):
        raise ValueError("values must be positive")
    return [
        float(np.log(b / a) / np.log(nb / na))
        for a, b, na, nb in zip(vals, vals[1:], ns, ns[1:])
    ]


def damped_projection(coeffs, modes: int) -> AnisotropyFn:
    """Shrink coefficients to ((N - k)/N) sigma_k for k < N.

    Maps admissible functions into the N-mode admissible cone; the
    first-order norm distance to the input decays like O(1/N) relative to
    the input's second-order norm.
    """
    c = np.asarray(coeffs, dtype=complex)
    if modes < 1:
        raise ValueError("modes must be >= 1")
    if modes > len(c):
        raise ValueError("modes exceeds the coefficient count")
    k = np.arange(modes)
    return AnisotropyFn(c[:modes] * (modes - k) / modes)


@dataclass(frozen=True)
class GrowthReport:
    """Experimental orders extracted from a sweep."""

    norm2_orders: list
    ratio_orders: list | None   # None when the ratio is already at unity


def sobolev_growth_report(rows) -> GrowthReport:
    """Orders for the second-order-norm growth and the (ratio - 1) decay."""
    good = [r for r in rows if r.ok]
    if len(good) < 3:
        raise ValueError("need at least 3 successful rows")
    ns = [r.modes for r in good]
    norm2 = [r.norms[2] for r in good]
    norm2_orders = experimental_order(norm2, ns)

    excess = [r.ratio - 1.0 for r in good]
    if min(excess) <= _AT_UNITY_TOL:
        ratio_orders = None
    else:
        ratio_orders = experimental_order(excess, ns)
    return GrowthReport(norm2_orders=norm2_orders, ratio_orders=ratio_orders)


def write_sweep_csv(rows, stream) -> None:
    """Emit sweep rows in the fixed tabular layout."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(SWEEP_CSV_HEADER.split(","))
    for r in rows:
        writer.writerow([
            r.modes,
            repr(float(r.ratio)),
            repr(float(r.wulff_area)),
            repr(float(r.norms[0])),
            repr(float(r.norms[1])),
            repr(float(r.norms[2])),
            repr(float(r.elapsed_seconds)),
            r.constraint_count,
            r.variable_count,
        ])
