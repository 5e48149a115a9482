"""
Voronoi moving averages c_n = (1/u(n)) sum_{w_lambda(n) < k <= n} (p o qs)_k and
the verifiers relating them to the mean t_n.

Window convention: the sum runs over integers k with floor(w) < k <= n, so
c_n u_n = U(n) - U(floor(w)). When w_lambda(n) falls below the domain of u
the window starts at k = 0 (U(w) = 0) and the index is flagged.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import optimize

from .convolution import partial_sums_U
from .errors import ConvergenceError, DomainError, ParameterError
from .limits import VerifierReport, detect_limit
from .methods import MethodDescriptor, UFunction
from .sequences import SequenceLike, WeightTriple, values
from .voronoi import CONTINUOUS_SAMPLES, MOVING_AVERAGE, TransformPrefix, _triple, voronoi_mean

log = logging.getLogger(__name__)

CLOSED_FORM = "closed_form"
BISECTION = "bisection"

_BRACKET_DOUBLINGS = 1100


@dataclass(frozen=True)
class WindowMap:
    """w_lambda(x) = u^<-(u(x) / lambda) for an increasing u."""

    u_fn: UFunction
    lam: float
    inverse_tol: float = 1e-12
    snap_tol: float = 1e-9

    def __post_init__(self):
        if not self.lam > 1:
            raise ParameterError(f"window maps need lambda > 1, got {self.lam}")

    @property
    def inverse_method(self) -> str:
        return CLOSED_FORM if self.u_fn.inverse is not None else BISECTION

    def with_lambda(self, lam: float) -> "WindowMap":
        return WindowMap(self.u_fn, lam, self.inverse_tol, self.snap_tol)


def _invert(u_fn: UFunction, target: float, hint: float, tol: float) -> float:
    lo = u_fn.domain_lo
    hi = max(hint, lo + 1.0)
    if float(u_fn(lo)) > target:
        raise DomainError(f"u(x) = {target:.6g} lies below the range of {u_fn.name}")
    for _ in range(_BRACKET_DOUBLINGS):
        if float(u_fn(hi)) >= target:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise ConvergenceError(f"could not bracket u^<-({target:g}) for {u_fn.name}")
    return optimize.bisect(lambda y: float(u_fn(y)) - target, lo, hi, xtol=tol, maxiter=4000)


def w_lambda(window: WindowMap, x: float) -> float:
    """The point y with u(y) = u(x) / lambda; near-integers are snapped."""
    with np.errstate(divide="ignore"):
        target = float(window.u_fn(x)) / window.lam
    if not math.isfinite(target):
        raise DomainError(f"u({x:g}) is not finite for {window.u_fn.name}")
    if target < window.u_fn.range_lo:
        raise DomainError(
            f"u({x:g})/{window.lam:g} = {target:.6g} lies below the range of {window.u_fn.name}"
        )
    if window.u_fn.inverse is not None:
        y = float(window.u_fn.inverse(target))
    else:
        y = _invert(window.u_fn, target, x, window.inverse_tol)
    nearest = round(y)
    if abs(y - nearest) <= window.snap_tol * max(1.0, abs(y)):
        return float(nearest)
    return y


def window_starts(window: WindowMap, n: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """floor(w_lambda(n)) per n, with -1 and a clamp flag where w lies below the domain."""
    starts = np.empty(len(n), dtype=np.int64)
    clamped = np.zeros(len(n), dtype=bool)
    for i, x in enumerate(n):
        try:
            w = w_lambda(window, float(x))
        except DomainError:
            starts[i], clamped[i] = -1, True
            continue
        if w < 0:
            starts[i], clamped[i] = -1, True
        else:
            starts[i] = int(math.floor(w))
    return starts, clamped


def _leading_zeros(u: np.ndarray) -> int:
    nz = np.flatnonzero(u != 0.0)
    return int(nz[0]) if nz.size else len(u)


def voronoi_moving_average(
    method: Union[MethodDescriptor, WeightTriple], window: WindowMap, s: SequenceLike, N: int
) -> TransformPrefix:
    """c_n = [U(n) - U(floor w_lambda(n))] / u_n, n = 0..N.

    Indices with u_n = 0 (leading zeros of u) are left as nan and excluded
    through ``start``; indices whose window was clamped are listed in
    ``flags``.
    """
    triple = _triple(method)
    U = partial_sums_U(triple.p, triple.q, s, N)

    u = values(triple.u, N)
    start = _leading_zeros(u)
    if start > N:
        raise DomainError(f"u_n = 0 for every n <= {N}")
    triple.u_values(N, start=start)

    n = np.arange(start, N + 1)
    first, clamped = window_starts(window, n)
    lower = np.where(first >= 0, U[np.clip(first, 0, N)], 0.0)
    c = np.full(N + 1, np.nan)
    c[start:] = (U[start:] - lower) / u[start:]
    flags = tuple(f"clamped n={int(k)}" for k in n[clamped])
    if flags:
        log.debug("%s: %d window(s) clamped to k=0", triple.name, len(flags))
    return TransformPrefix(c, method, N, MOVING_AVERAGE, start=start, flags=flags)


def identity_residual(
    method: Union[MethodDescriptor, WeightTriple], window: WindowMap, s: SequenceLike, N: int
) -> float:
    """max_n |c_n - (t_n - u_[w] t_[w] / u_n)| over indices whose window start is defined."""
    triple = _triple(method)

    c = voronoi_moving_average(triple, window, s, N)
    u = values(triple.u, N)
    U = partial_sums_U(triple.p, triple.q, s, N)
    n = np.arange(c.start, N + 1)
    first, _ = window_starts(window, n)
    keep = first >= c.start
    n, first = n[keep], first[keep]
    if not n.size:
        return 0.0
    t = U / np.where(u == 0.0, np.nan, u)
    rebuilt = t[n] - u[first] * t[first] / u[n]
    scale = max(1.0, float(np.nanmax(np.abs(t[n]))))
    return float(np.max(np.abs(c.values[n] - rebuilt))) / scale


def lambda_class_deviation(u_fn: UFunction, N: int, points: int = 40) -> Tuple[float, float]:
    """max |u(x)/u(floor x) - 1| on a log grid over [1, N/2] and over [N/2, N]."""
    lo = max(1.0, u_fn.domain_lo + 1.0)
    early_x = np.geomspace(lo + 0.5, max(lo + 1.0, N / 2.0), points)
    late_x = np.linspace(N / 2.0 + 0.5, N - 0.5, points)

    def dev(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.asarray(u_fn(x), dtype=float) / np.asarray(u_fn(np.floor(x)), dtype=float)
        return float(np.nanmax(np.abs(r - 1.0)))

    return dev(early_x), dev(late_x)


def _lambda_evidence(report: VerifierReport, u_fn: UFunction, N: int):
    early, late = lambda_class_deviation(u_fn, N)
    report.data["lambda_class_deviation"] = (early, late)
    report.add(
        "u in Lambda",
        late <= early and late < 1e-2,
        late,
        detail=f"max |u(x)/u([x]) - 1|: {early:.3g} early, {late:.3g} late",
    )


def _mean_limit(triple: WeightTriple, s: SequenceLike, N: int, tol: float, window: Optional[int]):
    start = _leading_zeros(values(triple.u, N))
    t = voronoi_mean(triple, s, N, start=start)
    return t.values, detect_limit(t.defined, tol, window)


def thm5_equivalence_check(
    method: Union[MethodDescriptor, WeightTriple],
    windows: Sequence[WindowMap],
    s: SequenceLike,
    N: int,
    tol: float = 1e-6,
    window: Optional[int] = None,
) -> VerifierReport:
    """t_n -> s iff c_n -> (1 - 1/lambda) s for each lambda, plus the identity
    c_n = t_n - (u_[w]/u_n) t_[w] on the horizon."""
    if not windows:
        raise ParameterError("no window maps supplied")
    triple = _triple(method)
    report = VerifierReport(f"moving-average equivalence under {triple.name}")
    _lambda_evidence(report, windows[0].u_fn, N)

    _, t_verdict = _mean_limit(triple, s, N, tol, window)
    report.data["mean_verdict"] = t_verdict

    c_limits = {}
    implied = []
    for wm in windows:
        c = voronoi_moving_average(triple, wm, s, N)
        verdict = detect_limit(c.defined, tol, window)
        c_limits[wm.lam] = verdict
        if verdict.converged:
            implied.append(verdict.estimate / (1.0 - 1.0 / wm.lam))
        report.series[f"c_lambda={wm.lam:g}"] = c.values
        residual = identity_residual(triple, wm, s, min(N, 1000))
        report.add(f"identity lambda={wm.lam:g}", residual <= 1e-12, residual, role="conclusion")
    report.data["moving_verdicts"] = c_limits

    if t_verdict.converged:
        ok = all(
            v.converged_to((1.0 - 1.0 / lam) * t_verdict.estimate) for lam, v in c_limits.items()
        )
        detail = f"mean limit {t_verdict.estimate:.10g}"
    else:
        # a common implied limit across lambdas would force t_n to converge
        ok = not (len(implied) == len(windows) and float(np.ptp(implied)) <= tol)
        detail = "mean undecided"
    report.add("mean limit s <=> c_n -> (1-1/lambda)s", ok, detail=detail, role="conclusion")
    report.series["n"] = np.arange(N + 1)
    return report


def _c_at(U: np.ndarray, u: np.ndarray, window: WindowMap, n: int) -> float:
    first, _ = window_starts(window, np.array([n]))
    lower = U[first[0]] if first[0] >= 0 else 0.0
    return (U[n] - lower) / u[n]


def thm6_uniformity_check(
    method: Union[MethodDescriptor, WeightTriple],
    u_fn: UFunction,
    s: SequenceLike,
    lambda_interval: Tuple[float, float],
    grid_size: int,
    N: int,
    s_limit: Optional[float] = None,
    tol: float = 1e-6,
    window: Optional[int] = None,
) -> VerifierReport:
    """d_n = max over a lambda grid of |c_n - (1 - 1/lambda) s| at n = N/4, N/2, N."""
    a, b = lambda_interval
    if not 1 < a < b < math.inf:
        raise ParameterError(f"lambda interval must satisfy 1 < a < b < inf, got {lambda_interval}")
    if grid_size < 2:
        raise ParameterError("lambda grid needs at least two points")
    triple = _triple(method)

    report = VerifierReport(f"uniformity in lambda under {triple.name}")
    if s_limit is None:
        _, verdict = _mean_limit(triple, s, N, tol, window)
        report.add("mean converges", verdict.converged, str(verdict))
        s_limit = verdict.estimate if verdict.converged else math.nan

    U = partial_sums_U(triple.p, triple.q, s, N)
    u = values(triple.u, N)
    lambdas = np.linspace(a, b, grid_size)
    points = (N // 4, N // 2, N)
    devs = []
    for n in points:
        devs.append(
            max(abs(_c_at(U, u, WindowMap(u_fn, lam), n) - (1.0 - 1.0 / lam) * s_limit) for lam in lambdas)
        )
    report.data.update(s_limit=s_limit, deviations=tuple(devs), lambdas=lambdas)
    decay = devs[2] == 0.0 or devs[2] < devs[0]
    report.add("sup deviation decays", decay, devs[2], role="conclusion", detail="at N/4, N/2, N: " + ", ".join(f"{d:.3g}" for d in devs))
    return report


def thm8_pi_criterion(
    p: SequenceLike,
    q: SequenceLike,
    s: SequenceLike,
    window: Union[WindowMap, UFunction],
    alpha_grid: Sequence[float],
    N: int,
    lambda_points: int = 16,
    x_points: int = 200,
) -> VerifierReport:
    """For each alpha, max over x in [N/2, N] of sup over lambda in [1, alpha]
    of [U(x) - U(w_lambda(x))] / u(x)."""
    u_fn = window.u_fn if isinstance(window, WindowMap) else window
    alphas = sorted((float(a) for a in alpha_grid), reverse=True)
    if not alphas or alphas[-1] <= 1:
        raise ParameterError("alpha grid must be nonempty with every alpha > 1")
    U = partial_sums_U(p, q, s, N)
    xs = np.unique(np.linspace(N / 2.0, float(N), x_points))
    ux = np.asarray(u_fn(xs), dtype=float)
    report = VerifierReport("criterion on shrinking lambda-windows")

    estimates: List[float] = []
    for alpha in alphas:
        sup_over_x = -math.inf
        for lam in np.linspace(1.0, alpha, lambda_points)[1:]:
            first, _ = window_starts(WindowMap(u_fn, float(lam)), xs)
            lower = np.where(first >= 0, U[np.clip(first, 0, N)], 0.0)
            vals = (U[np.floor(xs).astype(np.int64)] - lower) / ux
            sup_over_x = max(sup_over_x, float(np.max(vals)))
        estimates.append(max(sup_over_x, 0.0))
    report.data.update(alphas=tuple(alphas), estimates=tuple(estimates))
    finite = all(math.isfinite(e) for e in estimates)
    shrinking = all(b <= a + 1e-12 for a, b in zip(estimates, estimates[1:]))
    report.add("estimates finite", finite, detail="limsup proxy over x in [N/2, N]")
    report.add("non-increasing as alpha -> 1", shrinking, estimates[-1], role="conclusion")
    return report


def cor2_discrete_continuous_check(
    method: Union[MethodDescriptor, WeightTriple],
    u_fn: UFunction,
    s: SequenceLike,
    N: int,
    x_grid: Optional[Sequence[float]] = None,
    tol: float = 1e-6,
    window: Optional[int] = None,
) -> VerifierReport:
    """detect_limit over t_n and over t_x sampled on ``x_grid`` (default n + 1/2) must agree."""
    triple = _triple(method)
    report = VerifierReport(f"discrete vs continuous mean under {triple.name}")
    _lambda_evidence(report, u_fn, N)
    t, t_verdict = _mean_limit(triple, s, N, tol, window)

    xs = np.arange(N) + 0.5 if x_grid is None else np.asarray(x_grid, dtype=float)
    U = partial_sums_U(triple.p, triple.q, s, int(math.floor(xs.max())))
    ux = np.asarray(u_fn(xs), dtype=float)
    if np.any(ux == 0):
        raise DomainError("u(x) = 0 on the x-grid")
    tx = U[np.floor(xs).astype(np.int64)] / ux
    samples = TransformPrefix(tx, method, N, CONTINUOUS_SAMPLES, abscissae=xs)
    x_verdict = detect_limit(samples.values, tol, window)

    agree = (t_verdict.converged and x_verdict.converged and abs(t_verdict.estimate - x_verdict.estimate) <= tol) or (
        not t_verdict.converged and not x_verdict.converged
    )
    report.data.update(discrete=t_verdict, continuous=x_verdict)
    report.add("verdicts agree", agree, f"{t_verdict} / {x_verdict}", role="conclusion")
    report.series = {"x": xs, "t_x": tx}
    return report


def window_for(
    method: MethodDescriptor, lam: Optional[float] = None, inverse_tol: float = 1e-12, snap_tol: float = 1e-9
) -> WindowMap:
    """The window map of a registered method, at its own lambda unless one is given."""
    if method.window is None:
        raise ParameterError(f"{method.describe()} has no continuous weight u(x); pass one explicitly")
    lam = lam if lam is not None else method.lam
    if lam is None:
        raise ParameterError(f"{method.describe()} needs a lambda")
    return WindowMap(method.window, float(lam), inverse_tol, snap_tol)
