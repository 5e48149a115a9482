"""
Voronoi power-series methods T(x) = N(x)/D(x) with N(x) = sum (p o qs)_n x^n
and D(x) = sum v_n x^n, and the Abelian/Tauberian verifiers that link them
to the mean.

Series are summed in log space: each term is kept as a sign and a log
magnitude, so Borel-type series stay finite far beyond the float range of
their partial sums.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special

from .convolution import partial_sums_U, voronoi_qs
from .errors import ConvergenceError, DomainError, ParameterError
from .limits import VerifierReport, detect_limit
from .methods import MethodDescriptor
from .sequences import (
    Difference,
    Sampled,
    SequenceLike,
    SequenceSpec,
    WeightTriple,
    builtin,
    is_constant_one,
    log_values,
    values,
)
from .voronoi import _triple, voronoi_mean

log = logging.getLogger(__name__)

GEOMETRIC = "geometric"
NO_TAIL_BOUND = "none"

V_SERIES = "v_series"
AS_PRINTED = "as_printed"

_INITIAL_TERMS = 64


@dataclass(frozen=True)
class PowerSeriesMethod:
    p: SequenceSpec
    q: SequenceSpec
    v: SequenceSpec
    R: float
    truncation: int = 200000
    tail_bound_mode: str = GEOMETRIC
    tail_rel_tol: float = 1e-12

    def __post_init__(self):
        if not self.R > 0:
            raise ParameterError(f"radius must be positive, got {self.R}")
        if self.tail_bound_mode not in (GEOMETRIC, NO_TAIL_BOUND):
            raise ParameterError(f"unknown tail bound mode {self.tail_bound_mode!r}")
        if self.truncation < _INITIAL_TERMS:
            raise ParameterError(f"truncation cap must be at least {_INITIAL_TERMS}")


def from_descriptor(method: MethodDescriptor, **options) -> PowerSeriesMethod:
    """The power-series method of a registered descriptor, or of a mean's weights (v = diff u)."""
    if method.kind == "power_series":
        triple = method.triple
        return PowerSeriesMethod(triple.p, triple.q, method.v, method.radius, **options)
    return from_triple(method.triple, **options)


def from_triple(
    triple: WeightTriple, R: Optional[float] = None, horizon: int = 2000, **options
) -> PowerSeriesMethod:
    v = Difference(triple.u)
    return PowerSeriesMethod(
        triple.p, triple.q, v, R if R is not None else estimate_radius(v, horizon), **options
    )


def _power_series_of(method: Union[MethodDescriptor, WeightTriple], N: int, **options) -> PowerSeriesMethod:
    if isinstance(method, MethodDescriptor):
        if method.kind == "power_series":
            return from_descriptor(method, **options)
        method = method.triple
    return from_triple(method, horizon=N, **options)


@dataclass(frozen=True)
class SeriesValue:
    """A truncated series value; ``tail_bound`` bounds its truncation error."""

    value: float
    tail_bound: float
    terms: int


# ---------------------------------------------------------------------------
# Radius
# ---------------------------------------------------------------------------


def estimate_radius(v: SequenceLike, N: int = 2000) -> float:
    """Radius of convergence of sum v_n x^n from the prefix up to N.

    The root-test values |v_n|^(1/n) decide R = inf (the value at N is below
    half the largest value on [N/4, N/2]). Otherwise log|v_n| on [N/2, N] is
    fitted by a + b log n + n log(1/R), which is exact for geometric sequences
    with polynomial factors; the plain root test is logged alongside.
    """
    if N < 20:
        raise ParameterError(f"radius estimate needs N >= 20, got {N}")
    sign, logabs = log_values(v, N)
    if not np.any(sign != 0):
        raise ParameterError("all-zero coefficient sequence has no radius")
    n = np.arange(N + 1, dtype=float)
    roots = np.zeros(N + 1)
    live = (sign != 0) & (n > 0)
    roots[live] = np.exp(logabs[live] / n[live])

    quarter, half = N // 4, N // 2
    early = float(np.max(roots[quarter : half + 1]))
    late = float(np.max(roots[half:]))
    if late == 0.0 or roots[N] < 0.5 * early:
        return math.inf

    tail = np.flatnonzero(live[half:]) + half
    if len(tail) < 3:
        return 1.0 / late
    design = np.column_stack([np.ones(len(tail)), np.log(tail), tail.astype(float)])
    coef, *_ = np.linalg.lstsq(design, logabs[tail], rcond=None)
    radius = math.exp(-float(coef[2]))
    if abs(radius * late - 1.0) > 0.05:
        log.info("radius: regression %.6g vs root test %.6g", radius, 1.0 / late)
    return radius


def default_x_grid(R: float, points: int = 12) -> np.ndarray:
    """R(1 - 2^-j), j = 1..points, or 2^j, j = 0..points when R is infinite."""
    if math.isinf(R):
        return np.power(2.0, np.arange(points + 1, dtype=float))
    return R * (1.0 - np.power(2.0, -np.arange(1, points + 1, dtype=float)))


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _log_sum(sign: np.ndarray, logabs: np.ndarray) -> Tuple[float, float]:
    """(sign, log|sum|) of sum sign_n exp(logabs_n)."""
    live = sign != 0
    if not np.any(live):
        return 0.0, -math.inf
    top = float(np.max(logabs[live]))
    total = float(np.sum(sign[live] * np.exp(logabs[live] - top)))
    if total == 0.0:
        return 0.0, -math.inf
    return math.copysign(1.0, total), top + math.log(abs(total))


def _log_tail_bound(sign: np.ndarray, logterms: np.ndarray) -> float:
    """log of a geometric bound on the terms beyond the prefix.

    Block maxima of log|term| over the last half of the prefix are fitted by a
    line; slope log r < 0 gives tail <= envelope * r / (1 - r). Returns +inf
    when no decay is visible and -inf when the trailing terms are all zero.
    """
    M = len(logterms)
    tail = np.where(sign[M // 2 :] != 0, logterms[M // 2 :], -np.inf)
    block = max(2, len(tail) // 16)
    count = len(tail) // block
    maxima = np.array([np.max(tail[i * block : (i + 1) * block]) for i in range(count)])
    finite = np.isfinite(maxima)
    if not finite[-1]:
        return -math.inf
    if finite.sum() < 2:
        return math.inf
    centers = (np.arange(count) + 0.5) * block
    slope, intercept = np.polyfit(centers[finite], maxima[finite], 1)
    if not slope < 0:
        return math.inf
    envelope = max(float(maxima[-1]), float(slope * len(tail) + intercept))
    return envelope + float(slope) - math.log(-math.expm1(float(slope)))


def _numerator_logs(method: PowerSeriesMethod, s: SequenceLike, M: int) -> Tuple[np.ndarray, np.ndarray]:
    if is_constant_one(method.p):
        q_sign, q_log = log_values(method.q, M)
        s_vals = values(s, M)
        with np.errstate(divide="ignore"):
            return q_sign * np.sign(s_vals), q_log + np.log(np.abs(s_vals))
    coef = voronoi_qs(method.p, method.q, s, M)
    with np.errstate(divide="ignore"):
        return np.sign(coef), np.log(np.abs(coef))


def _next_terms(M: int, cap: int, what: str, bound: float) -> int:
    if M >= cap:
        raise ConvergenceError(f"{what} needs more than {cap} terms (error bound {bound:.3g})")
    return min(2 * M, cap)


def eval_T(method: PowerSeriesMethod, s: SequenceLike, x: float) -> SeriesValue:
    """T(x) = N(x)/D(x), truncated adaptively.

    The prefix doubles until the bound (tail_N + |T| tail_D)/|D| on the error
    of T drops below ``tail_rel_tol * max(1, |T|)``; reaching ``truncation``
    terms first is an error. With ``tail_bound_mode="none"`` the full
    ``truncation`` prefix is summed and no bound is attached.
    """
    if not 0 < x < method.R:
        raise DomainError(f"x={x:g} outside (0, R) with R={method.R:g}")
    logx = math.log(x)
    bounded = method.tail_bound_mode == GEOMETRIC
    M = _INITIAL_TERMS if bounded else method.truncation

    while True:
        powers = np.arange(M + 1, dtype=float) * logx
        ns, nl = _numerator_logs(method, s, M)
        ds, dl = log_values(method.v, M)
        nl, dl = nl + powers, dl + powers
        n_sign, n_log = _log_sum(ns, nl)
        d_sign, d_log = _log_sum(ds, dl)
        if d_sign == 0.0:
            raise DomainError(f"D({x:g}) vanishes")
        log_T = n_log - d_log
        value = n_sign * d_sign * math.exp(log_T) if n_sign else 0.0
        if not bounded:
            bound = math.nan
            break
        d_part = log_T + _log_tail_bound(ds, dl) if n_sign else -math.inf
        log_err = float(np.logaddexp(_log_tail_bound(ns, nl), d_part)) - d_log
        bound = math.exp(min(log_err, 700.0))
        if bound <= method.tail_rel_tol * max(1.0, abs(value)):
            break
        M = _next_terms(M, method.truncation, f"T({x:g})", bound)

    log.debug("T(%g) = %.17g from %d terms", x, value, M + 1)
    return SeriesValue(value, bound, M + 1)


def power_sum(
    coefs: SequenceSpec, x: float, truncation: int = 200000, tail_rel_tol: float = 1e-12
) -> SeriesValue:
    """sum coefs_n x^n for x > 0, truncated like :func:`eval_T` relative to the sum."""
    if not x > 0:
        raise DomainError(f"power sum needs x > 0, got {x:g}")
    logx = math.log(x)
    M = _INITIAL_TERMS
    while True:
        sign, logabs = log_values(coefs, M)
        logabs = logabs + np.arange(M + 1, dtype=float) * logx
        total_sign, total_log = _log_sum(sign, logabs)
        value = total_sign * math.exp(total_log) if total_sign else 0.0
        bound = math.exp(min(_log_tail_bound(sign, logabs), 700.0))
        if bound <= tail_rel_tol * max(1.0, abs(value)):
            return SeriesValue(value, bound, M + 1)
        M = _next_terms(M, truncation, f"power sum at x={x:g}", bound)


def T_on_grid(method: PowerSeriesMethod, s: SequenceLike, x_grid: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    results = [eval_T(method, s, float(x)) for x in x_grid]
    return np.array([r.value for r in results]), np.array([r.tail_bound for r in results])


@dataclass(frozen=True)
class VoronoiRatio(SequenceSpec):
    """r_n = (p o qs)_n / v_n."""

    p: SequenceSpec
    q: SequenceSpec
    s: SequenceSpec
    v: SequenceSpec
    domain_start: int = 0

    def _compute(self, n):
        M = len(n) - 1
        with np.errstate(divide="ignore", invalid="ignore"):
            return voronoi_qs(self.p, self.q, self.s, M) / values(self.v, M)

    def describe(self):
        return f"(({self.p}) o ({self.q})({self.s}))/({self.v})"


def reduced_power_series(method: PowerSeriesMethod, s: SequenceSpec) -> Tuple[PowerSeriesMethod, VoronoiRatio]:
    """The method (P,1,v,v) and the sequence (p o qs)_n / v_n it is applied to.

    Both forms give the same T(x); v_n must not vanish.
    """
    reduced = PowerSeriesMethod(
        builtin("one"),
        method.v,
        method.v,
        method.R,
        method.truncation,
        method.tail_bound_mode,
        method.tail_rel_tol,
    )
    return reduced, VoronoiRatio(method.p, method.q, s, method.v)


def laplace_stieltjes(p: SequenceLike, q: SequenceLike, s: SequenceLike, sigma: float, N: int) -> float:
    """int_0^inf e^(-sigma x) dU(x) for the step function U over n <= N.

    Summed as (1 - e^-sigma) sum_n U(n) e^(-n sigma), which equals
    sum_n (p o qs)_n e^(-n sigma), i.e. N(e^-sigma).
    """
    if sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    U = partial_sums_U(p, q, s, N)
    n = np.arange(N + 1)
    return float(-math.expm1(-sigma) * np.sum(U * np.exp(-sigma * n)))


# ---------------------------------------------------------------------------
# Hypothesis evidence
# ---------------------------------------------------------------------------


def regular_variation_evidence(
    seq: np.ndarray, N: int, lambdas: Sequence[float] = (2.0, 4.0, 8.0), tol: float = 0.05
) -> Tuple[float, bool]:
    """Index rho with seq_ceil(lambda n)/seq_n ~ lambda^rho for n in [N/16, N/8].

    Holds when every lambda's mean ratio lies within ``tol`` of lambda^rho.
    """
    hi = int(N // max(lambdas))
    n = np.arange(max(1, hi // 2), hi + 1)
    if n.size == 0 or np.any(seq[1 : N + 1] <= 0):
        return math.nan, False
    lams = np.asarray(lambdas, dtype=float)
    ratios = np.array([np.mean(seq[np.ceil(lam * n).astype(np.int64)] / seq[n]) for lam in lams])
    rho = float(np.mean(np.log(ratios) / np.log(lams)))
    ok = bool(np.all(np.abs(ratios / np.power(lams, rho) - 1.0) <= tol))
    return rho, ok


def _one_sided_bound(seq: np.ndarray, N: int) -> Tuple[float, bool]:
    """C = -min(seq, 0), with evidence that the minimum stops falling: the
    minimum over [N/2, N] is no lower than 1.05 times the earlier minimum."""
    half = N // 2
    early = float(np.nanmin(seq[: half + 1]))
    late = float(np.nanmin(seq[half:]))
    C = max(0.0, -min(early, late))
    return C, late >= 1.05 * min(0.0, early) - 1e-12


def _growth(u: np.ndarray, N: int) -> bool:
    half = N // 2
    return bool(np.all(np.diff(u[half:]) >= 0) and u[N] > u[half])


def _grid(x_grid, R: float) -> np.ndarray:
    return default_x_grid(R) if x_grid is None else np.asarray(x_grid, dtype=float)


def _abel_limit(report: VerifierReport, method: PowerSeriesMethod, s: SequenceLike, grid: np.ndarray, t_tol: float):
    T, bounds = T_on_grid(method, s, grid)
    verdict = detect_limit(T, t_tol, window=min(3, len(T)))
    report.series.update(x=grid, T=T, tail_bound=bounds)
    report.data["T_verdict"] = verdict
    return T, verdict


def _conclude(report: VerifierReport, name: str, ok: bool, value):
    """Record the conclusion; it becomes a check only when every hypothesis held."""
    applicable = not report.failed("hypothesis")
    report.data["conclusion_applicable"] = applicable
    report.data["conclusion_ok"] = bool(ok)
    if applicable:
        report.add(name, ok, value, role="conclusion")


# ---------------------------------------------------------------------------
# Verifiers
# ---------------------------------------------------------------------------


def thm9i_abelian_check(
    method: Union[MethodDescriptor, WeightTriple],
    s: SequenceLike,
    N: int,
    x_grid: Optional[Sequence[float]] = None,
    tol: float = 1e-6,
    t_tol: float = 1e-3,
    window: Optional[int] = None,
    **options,
) -> VerifierReport:
    """Mean limit s implies T(x) -> s as x -> R-."""
    triple = _triple(method)
    ps = _power_series_of(method, N, **options)
    report = VerifierReport(f"Abelian power-series check under {triple.name}")
    v = values(ps.v, N)
    u = values(triple.u, N)
    report.add("v_n > 0", bool(np.all(v > 0)))
    report.add("u_n -> inf", _growth(u, N), float(u[N]))
    report.add("R finite", math.isfinite(ps.R), ps.R)
    report.data["R"] = ps.R

    t_verdict = detect_limit(voronoi_mean(triple, s, N).values, tol, window)
    report.data["mean_verdict"] = t_verdict
    report.add("mean converges", t_verdict.converged, str(t_verdict))
    if report.failed("hypothesis"):
        _conclude(report, "T(x) -> s", False, None)
        return report

    grid = _grid(x_grid, ps.R)
    T, _ = _abel_limit(report, ps, s, grid, t_tol)
    deviation = abs(float(T[-1]) - t_verdict.estimate)
    report.data["deviation"] = deviation
    _conclude(report, "T(x) -> s", deviation <= t_tol, deviation)
    return report


def thm9ii_tauberian_check(
    method: Union[MethodDescriptor, WeightTriple],
    s: SequenceLike,
    N: int,
    x_grid: Optional[Sequence[float]] = None,
    tol: float = 1e-6,
    t_tol: float = 1e-3,
    window: Optional[int] = None,
    **options,
) -> VerifierReport:
    """Under (p o qs)_n/v_n >= -C, T(x) -> s implies t_n -> s."""
    triple = _triple(method)
    ps = _power_series_of(method, N, **options)
    report = VerifierReport(f"Tauberian power-series check under {triple.name}")
    v = values(ps.v, N)
    u = values(triple.u, N)

    rho, varying = regular_variation_evidence(v, N)
    report.data["rho"] = rho
    report.add("v regularly varying, rho >= -1", varying and rho >= -1.05, rho)
    report.add("u_n -> inf", _growth(u, N), float(u[N]))
    report.add("R = 1", abs(ps.R - 1.0) <= 0.05, ps.R)

    with np.errstate(divide="ignore", invalid="ignore"):
        r = voronoi_qs(triple.p, triple.q, s, N) / v
    C, bounded = _one_sided_bound(r, N)
    report.data["C"] = C
    report.add("(p o qs)_n/v_n >= -C", bounded, C)

    _, T_verdict = _abel_limit(report, ps, s, _grid(x_grid, 1.0), t_tol)
    report.add("T(x) -> s", T_verdict.converged, str(T_verdict))

    t_verdict = detect_limit(voronoi_mean(triple, s, N).values, tol, window)
    report.data["mean_verdict"] = t_verdict
    ok = T_verdict.converged and t_verdict.converged_to(T_verdict.estimate, t_tol)
    _conclude(report, "t_n -> s", ok, str(t_verdict))
    return report


def karamata_u(rho: float, ell: Callable[[np.ndarray], np.ndarray], gamma_normalized: bool = True) -> Sampled:
    """u_n = n^rho l(n) / Gamma(1 + rho), u_0 = 0 (no Gamma factor when not normalized)."""
    norm = float(special.gamma(1.0 + rho)) if gamma_normalized else 1.0

    def fn(n):
        n = np.asarray(n, dtype=float)
        safe = np.maximum(n, 1.0)
        out = np.power(safe, rho) * np.asarray(ell(safe), dtype=float) / norm
        return np.where(n == 0, 0.0, out)

    return Sampled(fn, f"x^{rho:g} l(x)" + ("/Gamma(1+rho)" if gamma_normalized else ""))


def thm9iii_karamata_check(
    p: SequenceSpec,
    q: SequenceSpec,
    s: SequenceSpec,
    rho: float,
    ell: Callable[[np.ndarray], np.ndarray],
    N: int,
    x_grid: Optional[Sequence[float]] = None,
    lambda_grid: Sequence[float] = (2.0, 1.5, 1.25, 1.1),
    hypothesis_form: str = V_SERIES,
    gamma_normalized: bool = True,
    tol: float = 1e-6,
    t_tol: float = 1e-3,
    window: Optional[int] = None,
    **options,
) -> VerifierReport:
    """The Karamata-type statement for u(x) = x^rho l(x) / Gamma(1 + rho).

    The hypothesis D(x)(-log x)^rho / l(-1/log x) -> 1 as x -> 1- is checked
    with D = sum v_n x^n (``v_series``) or as (1 - x) sum u_n x^n
    (``as_printed``); both are the same function. Without the Gamma
    normalization of u the ratio tends to Gamma(1 + rho) instead of 1.

    ``ell`` must accept numpy arrays.
    """
    if not rho > -1:
        raise ParameterError(f"rho must exceed -1, got {rho}")
    if hypothesis_form not in (V_SERIES, AS_PRINTED):
        raise ParameterError(f"unknown hypothesis form {hypothesis_form!r}")
    lambdas = sorted((float(lam) for lam in lambda_grid), reverse=True)
    if not lambdas or lambdas[-1] <= 1:
        raise ParameterError("lambda grid must be non-empty with values > 1")

    u_spec = karamata_u(rho, ell, gamma_normalized)
    ps = PowerSeriesMethod(p, q, Difference(u_spec), 1.0, **options)
    report = VerifierReport("Karamata-type power-series check")
    grid = _grid(x_grid, 1.0)

    U = partial_sums_U(p, q, s, N)
    report.add("U(x) >= 0", bool(np.all(U >= -1e-12)))
    report.add("s_n >= 0", bool(np.all(values(s, N) >= 0)))
    ells = np.asarray(ell(np.array([N / 4.0, N / 2.0, float(N)])), dtype=float)
    step_early, step_late = abs(ells[1] / ells[0] - 1.0), abs(ells[2] / ells[1] - 1.0)
    report.add("l slowly varying", step_late <= step_early + 1e-12 and step_late < 0.1, float(ells[2] / ells[1]))

    if hypothesis_form == V_SERIES:
        D = np.array([power_sum(ps.v, float(x), ps.truncation, ps.tail_rel_tol).value for x in grid])
    else:
        D = np.array([(1.0 - x) * power_sum(u_spec, float(x), ps.truncation, ps.tail_rel_tol).value for x in grid])
    minus_log = -np.log(grid)
    ratio = D * np.power(minus_log, rho) / np.asarray(ell(1.0 / minus_log), dtype=float)
    target = 1.0 if gamma_normalized else float(special.gamma(1.0 + rho))
    report.series["D_ratio"] = ratio
    report.data.update(D_ratio=float(ratio[-1]), D_ratio_target=target)
    report.add(
        "D(x) normalization -> target",
        abs(float(ratio[-1]) - target) <= 0.05 * target,
        float(ratio[-1]),
        detail=f"{hypothesis_form}, target {target:g}",
    )

    # continuous mean t_x = U(x)/u(x) sampled between integers
    xs = np.arange(1, N) + 0.5
    tx = U[np.floor(xs).astype(np.int64)] / np.asarray(u_spec.fn(xs), dtype=float)
    tx_verdict = detect_limit(tx, tol, window)
    report.data["continuous_mean_verdict"] = tx_verdict

    T, T_verdict = _abel_limit(report, ps, s, grid, t_tol)
    forward = not tx_verdict.converged or (
        T_verdict.converged and abs(T_verdict.estimate - tx_verdict.estimate) <= t_tol
    )
    report.data["forward_ok"] = forward

    mid = len(grid) // 2
    transform = laplace_stieltjes(p, q, s, float(minus_log[mid]), N)
    report.data["laplace_stieltjes"] = (transform, float(T[mid] * D[mid]))

    converse = []
    for lam in lambdas:
        xs_c = np.unique(np.linspace(N / (4.0 * lam), N / lam, 64).astype(np.int64))
        xs_c = xs_c[xs_c >= 1]
        scale = np.power(xs_c, rho) * np.asarray(ell(xs_c.astype(float)), dtype=float)
        worst = math.inf
        for t in np.linspace(1.0, lam, 16)[1:]:
            upper = np.minimum(np.floor(t * xs_c).astype(np.int64), N)
            worst = min(worst, float(np.min((U[upper] - U[xs_c]) / scale)))
        converse.append(worst)
    report.data.update(converse_lambdas=tuple(lambdas), converse_estimates=tuple(converse))
    report.add("converse condition >= 0", converse[-1] >= -t_tol, converse[-1], detail=f"lambda={lambdas[-1]:g}")

    _conclude(report, "V_x limit => T(x) -> s", forward, str(T_verdict))
    return report


def thm9iv_v_ratio_check(
    method: Union[MethodDescriptor, WeightTriple],
    s: SequenceLike,
    mode: str,
    N: int,
    x_grid: Optional[Sequence[float]] = None,
    tol: float = 1e-6,
    t_tol: float = 1e-3,
    window: Optional[int] = None,
    **options,
) -> VerifierReport:
    """T(x) -> s implies r_n = (p o qs)_n / v_n -> s under a difference condition on r_n.

    mode ``iv``: v regularly varying with index rho >= -1 away from 0, 1, ...,
    and r_n - r_(n-1) >= -C v_n/u_n. mode ``v``: v_n > 0, n v_n bounded, and
    |r_n - r_(n-1)| u_n / v_n decaying.
    """
    if mode not in ("iv", "v"):
        raise ParameterError(f"mode must be 'iv' or 'v', got {mode!r}")
    triple = _triple(method)
    ps = _power_series_of(method, N, **options)
    report = VerifierReport(f"ratio-sequence power-series check ({mode}) under {triple.name}")
    v = values(ps.v, N)
    u = values(triple.u, N)
    report.add("u_n -> inf", _growth(u, N), float(u[N]))
    report.add("R = 1", abs(ps.R - 1.0) <= 0.05, ps.R)

    with np.errstate(divide="ignore", invalid="ignore"):
        r = voronoi_qs(triple.p, triple.q, s, N) / v
        scaled = np.diff(r) * u[1:] / v[1:]
    half = N // 2
    if mode == "iv":
        rho, varying = regular_variation_evidence(v, N)
        report.data["rho"] = rho
        off_integer = rho < -0.05 or abs(rho - round(rho)) > 0.05
        report.add("v regularly varying, rho >= -1, rho not in {0,1,...}", varying and rho >= -1.05 and off_integer, rho)
        C, bounded = _one_sided_bound(scaled, N - 1)
        report.data["C"] = C
        report.add("r_n - r_(n-1) >= -C v_n/u_n", bounded, C)
    else:
        report.add("v_n > 0", bool(np.all(v > 0)))
        nv = np.arange(N + 1) * v
        report.add("n v_n bounded", float(np.max(nv[half:])) <= 1.05 * float(np.max(nv[: half + 1])) + 1e-12, float(np.max(nv)))
        early = float(np.nanmax(np.abs(scaled[:half])))
        late = float(np.nanmax(np.abs(scaled[half - 1 :])))
        report.data["difference_decay"] = (early, late)
        report.add("|r_n - r_(n-1)| = o(v_n/u_n)", late < early or late <= 1e-9, late)

    _, T_verdict = _abel_limit(report, ps, s, _grid(x_grid, 1.0), t_tol)
    report.add("T(x) -> s", T_verdict.converged, str(T_verdict))

    r_verdict = detect_limit(r, tol, window)
    report.data["ratio_verdict"] = r_verdict
    report.series["r"] = r
    ok = T_verdict.converged and r_verdict.converged_to(T_verdict.estimate, t_tol)
    _conclude(report, "r_n -> s", ok, str(r_verdict))
    return report
