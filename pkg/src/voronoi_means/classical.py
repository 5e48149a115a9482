"""
Two non-regular classical methods: Ingham summability and the Riemann
methods (R,1) and (R_1).
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ParameterError
from .limits import VerifierReport, detect_limit
from .sequences import SequenceLike, values

log = logging.getLogger(__name__)

R1_SERIES = "R1_series"
R1_MEAN = "R1_mean"
R1_MEAN_PRINTED = "R1_mean_printed"
RIEMANN_VARIANTS = (R1_SERIES, R1_MEAN, R1_MEAN_PRINTED)


def ingham_transform(s: SequenceLike, x: float) -> float:
    """(1/x) sum_{1<=n<=x} n s_n [x/n]."""
    if x < 1:
        raise ParameterError(f"Ingham transform needs x >= 1, got {x}")
    top = int(math.floor(x))
    n = np.arange(1, top + 1, dtype=float)
    terms = n * values(s, top)[1:] * np.floor(x / n)
    return float(np.sum(terms)) / x


def ingham_on_grid(s: SequenceLike, x_grid: Sequence[float]) -> np.ndarray:
    return np.array([ingham_transform(s, float(x)) for x in x_grid])


@dataclass(frozen=True)
class RiemannValue:
    value: float
    tail_bound: float
    controllable: bool
    terms: int


def default_riemann_horizon(h: float, horizon_factor: float = 100.0) -> int:
    """ceil(horizon_factor / h)."""
    return int(math.ceil(horizon_factor / h))


def riemann_transform(
    a: SequenceLike, h: float, variant: str = R1_SERIES, N: Optional[int] = None, horizon_factor: float = 100.0
) -> RiemannValue:
    """Truncated Riemann transform at step h.

    R1_series: sum_n a_n sin(nh)/(nh), the n = 0 term taken as a_0.
    R1_mean: (2/pi) sum_{n>=1} s_n sin(nh)/n.
    R1_mean_printed: (2/pi) sum_{n>=1} s_n sin(nh)/(nh).

    The tail beyond N is bounded by the Dirichlet test with the largest
    |input| on [N/2, N] as the size of the remaining terms. The bound is only
    meaningful when that size is not growing; otherwise the result is marked
    not controllable and the bound is inf.
    """
    if not h > 0:
        raise ParameterError(f"h must be positive, got {h}")
    if variant not in RIEMANN_VARIANTS:
        raise ParameterError(f"unknown Riemann variant {variant!r}, expected one of {RIEMANN_VARIANTS}")
    N = default_riemann_horizon(h, horizon_factor) if N is None else int(N)
    if N < 2:
        raise ParameterError(f"horizon must be at least 2, got {N}")

    seq = values(a, N)
    n = np.arange(1, N + 1, dtype=float)
    sines = np.sin(n * h)
    if variant == R1_SERIES:
        value = float(seq[0] + np.sum(seq[1:] * sines / (n * h)))
        scale = 1.0 / h
    elif variant == R1_MEAN:
        value = float(2.0 / math.pi * np.sum(seq[1:] * sines / n))
        scale = 2.0 / math.pi
    else:
        value = float(2.0 / math.pi * np.sum(seq[1:] * sines / (n * h)))
        scale = 2.0 / (math.pi * h)

    half = N // 2
    early = float(np.max(np.abs(seq[1 : half + 1])))
    late = float(np.max(np.abs(seq[half:])))
    controllable = late <= 1.05 * early + 1e-300
    if controllable:
        tail = scale * late / ((N + 1) * abs(math.sin(h / 2.0)))
    else:
        tail = math.inf
        log.warning("Riemann %s at h=%g: input grows on [N/2, N], tail not controllable", variant, h)
    return RiemannValue(value, tail, controllable, N)


def default_h_grid(points: int = 12) -> np.ndarray:
    """h = 2^-j, j = 1..points."""
    return np.power(2.0, -np.arange(1, points + 1, dtype=float))


def riemann_limit(
    a: SequenceLike,
    variant: str = R1_SERIES,
    h_grid: Optional[Sequence[float]] = None,
    horizon_factor: float = 100.0,
    tol: float = 1e-2,
    window: int = 3,
) -> VerifierReport:
    """Evaluate the transform along h -> 0 and classify its limit."""
    grid = default_h_grid() if h_grid is None else np.sort(np.asarray(h_grid, dtype=float))[::-1]
    results = [riemann_transform(a, float(h), variant, horizon_factor=horizon_factor) for h in grid]
    report = VerifierReport(f"Riemann {variant} limit")
    vals = np.array([r.value for r in results])
    report.series.update(
        h=grid, value=vals, tail_bound=np.array([r.tail_bound for r in results])
    )
    report.add("tail controllable", all(r.controllable for r in results))
    verdict = detect_limit(vals, tol, min(window, len(vals)))
    report.data["verdict"] = verdict
    report.add("transform converges as h -> 0", verdict.converged, str(verdict), role="conclusion")
    return report


def ingham_limit(
    s: SequenceLike, x_grid: Sequence[float], tol: float = 1e-6, window: Optional[int] = None
) -> VerifierReport:
    """Evaluate the Ingham transform along an increasing x-grid and classify its limit."""
    grid = np.asarray(x_grid, dtype=float)
    if grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ParameterError("x grid must be increasing with at least two points")
    vals = ingham_on_grid(s, grid)
    report = VerifierReport("Ingham limit")
    report.series.update(x=grid, value=vals)
    verdict = detect_limit(vals, tol, window if window is not None else min(3, grid.size))
    report.data["verdict"] = verdict
    report.add("transform converges as x -> inf", verdict.converged, str(verdict), role="conclusion")
    return report
