"""
The Voronoi mean t_n = (1/u_n) sum_k p_{n-k} q_k s_k and the finite-horizon
verifiers built on it: regularity, the decomposition and limitation
statements, kernel inversion, the Tauberian conditions and two inclusion
results.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .convolution import cauchy_convolve, cauchy_prefix, partial_sum_U, partial_sums_U, voronoi_qs, weighted
from .errors import DomainError, ParameterError, SingularSystemError
from .limits import VerifierReport, detect_limit
from .methods import MethodDescriptor
from .sequences import SequenceLike, WeightTriple, values

log = logging.getLogger(__name__)

MEAN = "mean"
MOVING_AVERAGE = "moving_average"
CONTINUOUS_SAMPLES = "continuous_samples"

OMEGA_TO_V = "omega_to_V"
V_TO_OMEGA = "V_to_omega"
BOTH = "both"
DIRECTIONS = (OMEGA_TO_V, V_TO_OMEGA, BOTH)


@dataclass(frozen=True, eq=False)
class TransformPrefix:
    """Transform values t_0..t_N (or c_n, or samples of t_x)."""

    values: np.ndarray
    method: Union[MethodDescriptor, WeightTriple]
    horizon: int
    kind: str = MEAN
    start: int = 0
    abscissae: Optional[np.ndarray] = None
    flags: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.kind != CONTINUOUS_SAMPLES and len(self.values) != self.horizon + 1:
            raise ParameterError(
                f"{self.kind} prefix needs {self.horizon + 1} values, got {len(self.values)}"
            )

    @property
    def index(self) -> np.ndarray:
        if self.abscissae is not None:
            return self.abscissae
        return np.arange(self.horizon + 1)

    @property
    def defined(self) -> np.ndarray:
        """The values from ``start`` on."""
        return self.values[self.start :]


def _triple(method: Union[MethodDescriptor, WeightTriple]) -> WeightTriple:
    return method.triple if isinstance(method, MethodDescriptor) else method


# ---------------------------------------------------------------------------
# The transform
# ---------------------------------------------------------------------------


def voronoi_mean(
    method: Union[MethodDescriptor, WeightTriple], s: SequenceLike, N: int, start: int = 0
) -> TransformPrefix:
    """t_n = (p * qs)_n / u_n for n = 0..N.

    Indices below ``start`` (where u may vanish) are left as nan.
    """
    triple = _triple(method)
    u = triple.u_values(N, start=start)
    t = np.full(N + 1, np.nan)
    t[start:] = partial_sums_U(triple.p, triple.q, s, N)[start:] / u[start:]
    return TransformPrefix(t, method, N, MEAN, start=start)


def voronoi_mean_rewritten(method: Union[MethodDescriptor, WeightTriple], s: SequenceLike, N: int) -> np.ndarray:
    """t_n as (1/u_n) sum_{k<=n} (p o qs)_k."""
    triple = _triple(method)
    u = triple.u_values(N)
    return np.cumsum(voronoi_qs(triple.p, triple.q, s, N)) / u


def voronoi_mean_continuous(
    method: Union[MethodDescriptor, WeightTriple], u_fn: Callable[[float], float], s: SequenceLike, x: float
) -> float:
    """t_x = U(x) / u(x)."""
    triple = _triple(method)
    ux = float(u_fn(x))
    if ux == 0.0:
        raise DomainError(f"u({x:g}) = 0")
    return partial_sum_U(triple.p, triple.q, s, x) / ux


# ---------------------------------------------------------------------------
# Regularity
# ---------------------------------------------------------------------------


def regularity_report(
    method: Union[MethodDescriptor, WeightTriple], N: int, cond_ii_terms: int = 20, cond_iii_tol: float = 1e-3
) -> VerifierReport:
    """Evidence for the three regularity conditions on n <= N.

    (i) sum_k |p_{n-k} q_k| / |u_n| stays bounded: its maximum over [N/2, N]
    does not exceed 1.05 times the maximum over [N/4, N/2].
    (ii) max_{k<=K} |p_{n-k} q_k / u_n| decreases from N/4 to N.
    (iii) sum_k p_{n-k} q_k / u_n is within ``cond_iii_tol`` of 1 at N and
    no farther from 1 than at N/2.
    """
    if N < 10:
        raise ParameterError(f"regularity needs N >= 10, got {N}")
    triple = _triple(method)
    u = triple.u_values(N)
    p, q = values(triple.p, N), values(triple.q, N)
    report = VerifierReport(f"regularity of {triple.name}")

    abs_ratio = cauchy_prefix(np.abs(p), np.abs(q)) / np.abs(u)
    quarter, half = N // 4, N // 2
    early = float(np.max(abs_ratio[quarter : half + 1]))
    late = float(np.max(abs_ratio[half:]))
    sup_ratio = float(np.max(abs_ratio))
    bounded = math.isfinite(late) and late <= 1.05 * early + 1e-15
    report.data["sup_ratio"] = sup_ratio
    report.add("cond_i", bounded, sup_ratio, detail=f"max on [N/4,N/2]={early:.6g}, on [N/2,N]={late:.6g}")

    K = min(cond_ii_terms, N // 2)
    k = np.arange(K + 1)

    def leading(n):
        return float(np.max(np.abs(p[n - k] * q[k] / u[n])))

    cond_ii = (leading(quarter), leading(half), leading(N))
    vanishing = cond_ii[2] == 0.0 or (cond_ii[2] < cond_ii[0] and cond_ii[2] <= cond_ii[1])
    report.data["cond_ii"] = cond_ii
    report.add("cond_ii", vanishing, cond_ii[2], detail=f"K={K}, at N/4,N/2,N: " + ", ".join(f"{v:.3g}" for v in cond_ii))

    sums = cauchy_convolve(triple.p, triple.q, N) / u
    at_n = float(sums[N])
    drift = abs(at_n - 1.0)
    report.data["cond_iii"] = at_n
    report.add(
        "cond_iii",
        drift <= cond_iii_tol and drift <= abs(float(sums[half]) - 1.0) + 1e-12,
        at_n,
        detail=f"value at N/2 {float(sums[half]):.6g}",
    )
    report.series = {"n": np.arange(N + 1), "cond_i_ratio": abs_ratio, "cond_iii_sum": sums}
    report.data["verdict"] = "consistent with regular" if report.passed else "non-regular"
    return report


# ---------------------------------------------------------------------------
# Decomposition and limitation
# ---------------------------------------------------------------------------


def _check_positive_increasing(u: np.ndarray, what: str):
    if np.any(u <= 0):
        raise ParameterError(f"{what} must be positive on the horizon")
    if np.any(np.diff(u) < 0):
        n = int(np.flatnonzero(np.diff(u) < 0)[0]) + 1
        raise ParameterError(f"{what} decreases at n={n}")


def thm1_decompose(
    method: Union[MethodDescriptor, WeightTriple],
    s: SequenceLike,
    N: int,
    tol: float = 1e-6,
    window: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray, VerifierReport]:
    """Split (p o qs)_n = v_n a_n + b_n with a_n = t_{n-1}, b_n = u_n (t_n - t_{n-1}).

    a_0 = t_0 and b_0 = 0. The report carries the reconstruction residual,
    the limit verdict of a_n and the partial sums of b_n / u_n.
    """
    if N < 2:
        raise ParameterError(f"decomposition needs N >= 2, got {N}")
    triple = _triple(method)
    u = triple.u_values(N)
    _check_positive_increasing(u, "u")
    v = values(triple.v, N)

    t = voronoi_mean(triple, s, N).values
    a = np.concatenate(([t[0]], t[:-1]))
    b = np.concatenate(([0.0], u[1:] * np.diff(t)))
    pqs = voronoi_qs(triple.p, triple.q, s, N)

    scale = max(1.0, float(np.max(np.abs(u * t))))
    residual = float(np.max(np.abs(v * a + b - pqs))) / scale
    b_sums = np.cumsum(b / u)

    report = VerifierReport(f"decomposition under {triple.name}")
    a_verdict = detect_limit(a, tol, window)
    b_verdict = detect_limit(b_sums, tol, window)
    tail_slice = slice(-b_verdict.window, None)
    report.data.update(
        residual=residual,
        a_verdict=a_verdict,
        b_sum_verdict=b_verdict,
        b_tail_oscillation=float(np.ptp(b_sums[tail_slice])),
        u_growth=float(u[-1] / u[0]),
    )
    report.add("reconstruction", residual <= 1e-12, residual, role="conclusion")
    report.add("a_n converges", a_verdict.converged, str(a_verdict), role="conclusion")
    report.add("sum b_n/u_n converges", b_verdict.converged, str(b_verdict), role="conclusion")
    report.series = {"n": np.arange(N + 1), "a": a, "b": b, "sum_b_over_u": b_sums}
    return a, b, report


def thm2_limitation_check(
    method: Union[MethodDescriptor, WeightTriple],
    s: SequenceLike,
    s_limit: float,
    N: int,
    tol: float = 1e-6,
    window: Optional[int] = None,
) -> VerifierReport:
    """((p o qs)_n - s_limit v_n) / u_n -> 0 when the mean converges to s_limit."""
    triple = _triple(method)
    u = triple.u_values(N)
    v = values(triple.v, N)
    report = VerifierReport(f"limitation under {triple.name}")

    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = u[1:] / u[:-1]
    bound = float(np.max(np.abs(ratios))) if N else 1.0
    report.data["u_ratio_bound"] = bound
    report.add("u_n/u_(n-1) bounded", math.isfinite(bound), bound, detail="max over the horizon")

    t_verdict = detect_limit(voronoi_mean(triple, s, N).values, tol, window)
    report.data["mean_verdict"] = t_verdict
    report.add("mean converges to s", t_verdict.converged_to(s_limit), str(t_verdict))

    residual = (voronoi_qs(triple.p, triple.q, s, N) - s_limit * v) / u
    r_verdict = detect_limit(residual, tol, window)
    report.data["residual_verdict"] = r_verdict
    report.add("residual/u_n -> 0", r_verdict.converged_to(0.0), str(r_verdict), role="conclusion")
    report.series = {"n": np.arange(N + 1), "residual": residual}
    return report


# ---------------------------------------------------------------------------
# Kernel inversion
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KernelSolution:
    h: np.ndarray
    residual: float
    relative_residual: float
    ishiguro_condition: bool
    notes: Tuple[str, ...] = ()


def forward_substitution(first: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve sum_{k<=n} h_{n-k} first_k = rhs_n for h (lower-triangular Toeplitz)."""
    pivot = first[0]
    if pivot == 0.0:
        raise SingularSystemError("zero pivot: first coefficient vanishes")
    n_terms = len(rhs)
    h = np.zeros(n_terms)
    for n in range(n_terms):
        acc = np.dot(first[n:0:-1], h[:n]) if n else 0.0
        h[n] = (rhs[n] - acc) / pivot
    return h


def invert_kernel(
    method: Union[MethodDescriptor, WeightTriple], t: Union[TransformPrefix, np.ndarray], s: SequenceLike, N: int
) -> KernelSolution:
    """The h with q_n s_n = sum_k h_{n-k} u_k t_k, by forward substitution.

    The reported sufficient condition is: v_n positive and non-increasing,
    u_n unbounded (evidence: u_N >= 2 u_{N/4}).
    """
    triple = _triple(method)
    tv = t.values if isinstance(t, TransformPrefix) else np.asarray(t, dtype=float)
    u = triple.u_values(N)
    ut = u * tv[: N + 1]
    if ut[0] == 0.0:
        raise SingularSystemError("u_0 t_0 = 0: kernel system is singular")
    qs = weighted(triple.q, s, N)
    h = forward_substitution(ut, qs)

    recon = cauchy_prefix(h, ut)
    residual = float(np.max(np.abs(recon - qs)))
    relative = residual / max(1.0, float(np.max(np.abs(qs))))

    v = values(triple.v, N)
    notes = []
    if not np.all(v > 0):
        notes.append("v_n is not positive")
    if np.any(np.diff(v[1:]) > 0):
        notes.append("v_n increases somewhere")
    if not u[-1] >= 2 * u[N // 4]:
        notes.append("u_n shows no growth")
    if notes:
        log.info("kernel for %s: sufficient condition fails (%s)", triple.name, "; ".join(notes))
    return KernelSolution(h, residual, relative, not notes, tuple(notes))


# ---------------------------------------------------------------------------
# Tauberian conditions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class IndexMap:
    """An index map n -> rule(n); ``upper`` maps push forward, lower maps pull back."""

    rule: Callable[[np.ndarray], np.ndarray]
    family_label: str
    upper: bool = True

    def __call__(self, n: np.ndarray) -> np.ndarray:
        return np.asarray(self.rule(np.asarray(n)), dtype=np.int64)


def upper_map(lam: float) -> IndexMap:
    if lam <= 1:
        raise ParameterError(f"upper maps need lambda > 1, got {lam}")
    return IndexMap(lambda n: np.ceil(lam * n - 1e-9), f"ceil({lam:g}n)", True)


def lower_map(lam: float) -> IndexMap:
    if lam <= 1:
        raise ParameterError(f"lower maps need lambda > 1, got {lam}")
    return IndexMap(lambda n: np.floor(n / lam + 1e-9), f"floor(n/{lam:g})", False)


def default_maps(lambdas: Sequence[float]) -> Tuple[List[IndexMap], List[IndexMap]]:
    return [upper_map(lam) for lam in lambdas], [lower_map(lam) for lam in lambdas]


def _validate_map(index_map: IndexMap, n: np.ndarray, weight: np.ndarray, what: str) -> np.ndarray:
    image = index_map(n)
    if np.any(image < 0):
        raise ParameterError(f"{index_map.family_label}: negative image")
    if not image[-1] > image[0]:
        raise ParameterError(f"{index_map.family_label}: image does not grow along the horizon")
    with np.errstate(divide="ignore", invalid="ignore"):
        if index_map.upper:
            ratio = weight[image] / weight[n]
        else:
            ratio = weight[n] / weight[image]
    if not np.min(ratio) > 1.0:
        raise ParameterError(
            f"{index_map.family_label} is not in the {'upper' if index_map.upper else 'lower'} "
            f"class for {what}: liminf ratio {float(np.min(ratio)):.6g} <= 1"
        )
    return image


def _liminf_proxy(bracket: np.ndarray) -> float:
    if np.all(np.isnan(bracket)):
        return math.nan
    return float(np.nanmin(bracket))


def tauberian_tco(
    method: Union[MethodDescriptor, WeightTriple],
    s: SequenceLike,
    maps: Sequence[IndexMap],
    direction: str,
    N: int,
    lower_maps: Optional[Sequence[IndexMap]] = None,
    h: Optional[np.ndarray] = None,
    denominator: str = "u",
    tol: float = 1e-9,
) -> VerifierReport:
    """Window estimates of the four Tauberian conditions.

    For each map the liminf is proxied by the minimum of the bracketed
    average over n in [N/2, N]; the sup over the class by the maximum over
    the supplied maps. ``maps`` are the upper maps (alpha, gamma) and
    ``lower_maps`` the lower ones (beta, theta); a condition is estimated
    only when maps of its kind are given. With ``denominator="p"`` the V -> Omega averages divide
    by p_gamma(n) - p_n instead of u_gamma(n) - u_n; zero denominators give nan.
    """
    if direction not in DIRECTIONS:
        raise ParameterError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    if denominator not in ("u", "p"):
        raise ParameterError(f"denominator must be 'u' or 'p', got {denominator!r}")
    upper = list(maps)
    lower = list(lower_maps) if lower_maps is not None else []
    if not upper and not lower:
        raise ParameterError("no index maps supplied")

    triple = _triple(method)
    n = np.arange(N // 2, N + 1)
    M = int(max([int(m(n).max()) for m in upper] + [N]))
    u = triple.u_values(M)
    p, q = values(triple.p, M), values(triple.q, M)
    s_vals = values(s, M)
    U = partial_sums_U(triple.p, triple.q, s, M)
    t = U / u

    report = VerifierReport(f"Tauberian conditions under {triple.name}")
    report.data.update(direction=direction, denominator=denominator, horizon=M)
    per_map: Dict[str, Dict[str, float]] = {}

    def record(name: str, estimates: Dict[str, float]):
        per_map.update({f"{name}[{label}]": {"estimate": value} for label, value in estimates.items()})
        finite = [v for v in estimates.values() if not math.isnan(v)]
        best = max(finite) if finite else math.nan
        report.data[name] = best
        ok = not math.isnan(best) and best >= -tol
        report.add(name, ok, best, role="conclusion", detail="sup over maps of window minimum")

    if direction in (OMEGA_TO_V, BOTH):
        if np.any(q == 0):
            raise ParameterError("q_n = 0 on the horizon; the kernel conditions need q_n != 0")
        if h is None:
            h = forward_substitution(U, q * s_vals)
        elif len(h) < M + 1:
            raise ParameterError(f"kernel h has {len(h)} terms, the maps need {M + 1}")
        HU = cauchy_prefix(np.asarray(h, dtype=float)[: M + 1], U)
        con1, con2 = {}, {}
        for m in upper:
            a = _validate_map(m, n, q, "q")
            con1[m.family_label] = _liminf_proxy(((HU[a] - HU[n]) - t[n] * (q[a] - q[n])) / (q[a] - q[n]))
        for m in lower:
            b = _validate_map(m, n, q, "q")
            con2[m.family_label] = _liminf_proxy((t[n] * (q[n] - q[b]) - (HU[n] - HU[b])) / (q[n] - q[b]))
        if con1:
            record("con1", con1)
        if con2:
            record("con2", con2)

    if direction in (V_TO_OMEGA, BOTH):
        den = u if denominator == "u" else p
        con3, con4 = {}, {}
        with np.errstate(divide="ignore", invalid="ignore"):
            for m in upper:
                g = _validate_map(m, n, u, "u")
                d = den[g] - den[n]
                bracket = ((U[g] - U[n]) - s_vals[n] * (u[g] - u[n])) / np.where(d == 0, np.nan, d)
                con3[m.family_label] = _liminf_proxy(bracket)
            for m in lower:
                th = _validate_map(m, n, u, "u")
                d = den[n] - den[th]
                bracket = (s_vals[n] * (u[n] - u[th]) - (U[n] - U[th])) / np.where(d == 0, np.nan, d)
                con4[m.family_label] = _liminf_proxy(bracket)
        if con3:
            record("con3", con3)
        if con4:
            record("con4", con4)

    report.data["per_map"] = per_map
    return report


# ---------------------------------------------------------------------------
# Inclusion
# ---------------------------------------------------------------------------


def kronecker_check(
    q: SequenceLike, s: SequenceLike, g: SequenceLike, N: int, tol: float = 1e-6, window: Optional[int] = None
) -> VerifierReport:
    """(1/g_n) sum_{k<=n} g_k q_k s_k -> 0 whenever sum q_k s_k converges and g increases to infinity."""
    gv = values(g, N)
    qs = weighted(q, s, N)
    report = VerifierReport("Kronecker lemma")
    report.add("g positive increasing", bool(np.all(gv > 0) and np.all(np.diff(gv) >= 0)))
    series_verdict = detect_limit(np.cumsum(qs), tol, window)
    report.add("sum q_k s_k converges", series_verdict.converged, str(series_verdict))

    weighted_means = np.cumsum(gv * qs) / gv
    verdict = detect_limit(weighted_means, tol, window)
    report.data.update(series_verdict=series_verdict, verdict=verdict)
    report.add("weighted mean -> 0", verdict.converged_to(0.0), str(verdict), role="conclusion")
    report.series = {"n": np.arange(N + 1), "weighted_mean": weighted_means}
    return report


def thm4_inclusion_check(
    q: SequenceLike,
    u: SequenceLike,
    q_tilde: SequenceLike,
    u_tilde: SequenceLike,
    s: SequenceLike,
    N: int,
    tol: float = 1e-6,
    window: Optional[int] = None,
) -> VerifierReport:
    """Summability by (V,1,q,u) implies summability to 0 by (V,1,q~,u~)."""
    qv, uv, qt, ut = (values(x, N) for x in (q, u, q_tilde, u_tilde))
    report = VerifierReport("inclusion (V,1,q,u) -> (V,1,q~,u~)")
    report.add("positive sequences", all(bool(np.all(x > 0)) for x in (qv, uv, qt, ut)))

    ratio_verdict = detect_limit(uv[1:] / uv[:-1], tol, window)
    report.add("u_(n+1)/u_n -> 1", ratio_verdict.converged_to(1.0), str(ratio_verdict))

    half = N // 2
    growing = bool(np.all(np.diff(ut[half:]) >= 0) and ut[N] > ut[half])
    report.add("u~_n -> inf", growing, float(ut[N]), detail="nondecreasing on [N/2, N] and still growing")

    uq_mean = np.cumsum(qt * uv / qv) / ut
    uq_verdict = detect_limit(uq_mean, tol, window)
    report.add("u_n/q_n -> 1 (V,1,q~,u~)", uq_verdict.converged_to(1.0), str(uq_verdict))

    t = np.cumsum(qv * values(s, N)) / uv
    t_verdict = detect_limit(t, tol, window)
    report.add("s_n summable (V,1,q,u)", t_verdict.converged, str(t_verdict))

    conclusion = np.cumsum(qt * values(s, N)) / ut
    c_verdict = detect_limit(conclusion, tol, window)
    report.data.update(
        hypotheses=(ratio_verdict, uq_verdict, t_verdict), conclusion=c_verdict, u_tilde_growth=float(ut[N])
    )
    report.add("s_n -> 0 (V,1,q~,u~)", c_verdict.converged_to(0.0), str(c_verdict), role="conclusion")
    report.series = {"n": np.arange(N + 1), "t": t, "conclusion": conclusion}
    return report
