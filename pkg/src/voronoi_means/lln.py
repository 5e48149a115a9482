"""
Monte Carlo experiments for strong laws under Voronoi means, power-series
methods and moving averages, the weight classes they quantify over, and
Baum-Katz type series.

Almost-sure statements are not finitely decidable. An experiment passes when
the trailing-window statistic max |t_n| over n in [N/2, N] stays below the
threshold in every seed; seeds are independent work units and results are
reduced in seed order.
"""
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Any, Callable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .convolution import partial_sums_U
from .distributions import (
    CLOSED_FORM,
    DistributionSpec,
    TruncatedMeanTable,
    distribution_from_config,
    sample_path,
    sample_paths,
    truncated_means,
)
from .errors import ParameterError
from .limits import VerifierReport, trailing_max_abs
from .methods import UFunction, u_function_from_text
from .moving_average import WindowMap, lambda_class_deviation, window_starts
from .phi import PhiFunction, parse_phi, subadditivity_violation, variation_index
from .power_series import PowerSeriesMethod, eval_T, estimate_radius, power_sum
from .sequences import (
    CauchyProduct,
    Difference,
    SequenceLike,
    SequenceSpec,
    WeightTriple,
    builtin,
    is_constant_one,
    parse_sequence,
    values,
)
from .voronoi import voronoi_mean

log = logging.getLogger(__name__)

THREADS_ENV = "VORONOI_MEANS_THREADS"

PHI_V = "Phi_V"
PHI_V_TILDE = "Phi_V_tilde"
PHI_UQ = "Phi_uq"
PHI_D = "Phi_D"
PHI_SETS = (PHI_V, PHI_V_TILDE, PHI_UQ, PHI_D)

_IDENTITY_RTOL = 1e-10


@dataclass(frozen=True)
class ExperimentConfig:
    distribution: DistributionSpec
    phi: PhiFunction
    triple: WeightTriple
    N: int
    seeds: Tuple[int, ...]
    threshold: float = 0.05
    mean_method: str = CLOSED_FORM
    window: Optional[UFunction] = None
    lambdas: Tuple[float, ...] = (2.0, 4.0)
    workers: Optional[int] = None

    def __post_init__(self):
        if self.N < 10:
            raise ParameterError(f"experiment horizon must be at least 10, got {self.N}")
        if not self.seeds:
            raise ParameterError("experiment needs at least one seed")
        if not self.threshold > 0:
            raise ParameterError(f"threshold must be positive, got {self.threshold}")


def experiment_from_config(
    entry: Mapping[str, Any],
    lln_defaults: Optional[Mapping[str, Any]] = None,
    named_sequences: Optional[Mapping[str, Any]] = None,
    named_phi: Optional[Mapping[str, str]] = None,
) -> ExperimentConfig:
    """Build an experiment from an ``experiment:`` config section.

    Keys: distribution, phi, p, q, u, N, seeds, threshold, truncated_means,
    window, lambdas. Missing seeds and threshold come from the ``lln`` section.
    """
    defaults = dict(lln_defaults or {})
    merged = {**defaults, **dict(entry)}
    try:
        N = int(merged.get("N", 100000))
        seeds = tuple(int(s) for s in merged.get("seeds") or ())
        threshold = float(merged.get("threshold", 0.05))
        lambdas = tuple(float(lam) for lam in merged.get("lambdas") or (2.0, 4.0))
    except (TypeError, ValueError) as e:
        raise ParameterError(f"malformed experiment config: {e}") from e

    triple = WeightTriple(
        parse_sequence(str(merged.get("p", "one")), named_sequences),
        parse_sequence(str(merged.get("q", "one")), named_sequences),
        parse_sequence(str(merged.get("u", "linear")), named_sequences),
    )
    window = merged.get("window")
    return ExperimentConfig(
        distribution=distribution_from_config(merged.get("distribution", "normal")),
        phi=parse_phi(str(merged.get("phi", "linear")), named_phi),
        triple=triple,
        N=N,
        seeds=seeds,
        threshold=threshold,
        mean_method=str(merged.get("truncated_means", CLOSED_FORM)),
        window=u_function_from_text(str(window)) if window else None,
        lambdas=lambdas,
    )


def worker_count(requested: Optional[int] = None) -> int:
    """Explicit count, else $VORONOI_MEANS_THREADS, else 1."""
    if requested:
        return max(1, int(requested))
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError as e:
        raise ParameterError(f"{THREADS_ENV} must be an integer, got {raw!r}") from e


def map_seeds(fn: Callable[[int], Any], seeds: Sequence[int], workers: Optional[int] = None) -> List[Any]:
    """fn applied to each seed; results come back in seed order."""
    count = worker_count(workers)
    if count == 1 or len(seeds) == 1:
        return [fn(seed) for seed in seeds]
    with ThreadPoolExecutor(max_workers=count) as pool:
        return list(pool.map(fn, seeds))


# ---------------------------------------------------------------------------
# Weight classes
# ---------------------------------------------------------------------------


def _relative_violation(actual: np.ndarray, expected: np.ndarray) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(actual / expected - 1.0)
    return float(np.nanmax(rel)) if rel.size else 0.0


def _unbounded_growth(u: np.ndarray, N: int) -> bool:
    """u_N - u_N/2 is at least half of u_N/2 - u_N/4: increments that do not sum."""
    quarter, half = N // 4, N // 2
    return bool(u[N] - u[half] >= 0.5 * (u[half] - u[quarter]) > 0)


def phi_set_membership(
    u: SequenceLike,
    q: SequenceLike,
    phi: PhiFunction,
    set_name: str,
    N: int,
    h_uq: Optional[Callable[[float], float]] = None,
    v: Optional[SequenceLike] = None,
    radius: Optional[float] = None,
    u_fn: Optional[UFunction] = None,
    identity_terms: int = 60,
) -> VerifierReport:
    """Check the defining conditions of a phi-indexed weight class on n <= N.

    Every class starts from Phi_V: u_n > 0 increasing, q_n > 0, u_n/q_n = phi(n).
    Phi_V_tilde adds v_n >= sigma > 0 and v_(n+1) v_(n-1) >= v_n^2. Phi_uq
    replaces the ratio identity's role by D_u(h(n)) / (q_n h(n)^n) = phi(n)
    for n <= ``identity_terms`` and h(x) -> R_u. Phi_D adds u in Lambda.
    """
    if set_name not in PHI_SETS:
        raise ParameterError(f"unknown class {set_name!r}, expected one of {PHI_SETS}")
    report = VerifierReport(f"{set_name}({phi}) membership")
    uv, qv = values(u, N), values(q, N)
    n = np.arange(N + 1, dtype=float)

    report.add("u_n > 0", bool(np.all(uv > 0)))
    report.add("u_n increasing", bool(np.all(np.diff(uv) > 0)))
    report.add("q_n > 0", bool(np.all(qv > 0)))
    phis = np.asarray(phi(n), dtype=float)
    ratio_violation = _relative_violation(uv / np.where(qv == 0, np.nan, qv), phis)
    report.data["ratio_violation"] = ratio_violation
    if set_name != PHI_UQ:
        report.add("u_n/q_n = phi(n)", ratio_violation <= _IDENTITY_RTOL, ratio_violation)
    else:
        report.data["phi_v_member"] = report.passed and ratio_violation <= _IDENTITY_RTOL

    if set_name == PHI_V_TILDE:
        if v is None:
            v = Difference(u) if isinstance(u, SequenceSpec) else np.diff(uv, prepend=0.0)
        vv = values(v, N)
        sigma = float(np.min(vv))
        report.data["sigma"] = sigma
        report.add("v_n >= sigma > 0", sigma > 0, sigma)
        gap = vv[2:] * vv[:-2] - vv[1:-1] ** 2
        worst = float(np.min(gap / vv[1:-1] ** 2)) if N >= 2 else 0.0
        report.data["log_convexity_violation"] = max(0.0, -worst)
        report.add("v_(n+1) v_(n-1) >= v_n^2", worst >= -1e-12, worst)

    if set_name == PHI_UQ:
        if h_uq is None:
            raise ParameterError("Phi_uq membership needs h_uq")
        if v is None:
            if not isinstance(u, SequenceSpec):
                raise ParameterError("Phi_uq membership on an array u needs v")
            v = Difference(u)
        R = radius if radius is not None else estimate_radius(v, min(N, 2000))
        report.data["R_u"] = R
        report.add("u_n -> inf", _unbounded_growth(uv, N), float(uv[N]))

        m = np.arange(1, min(N, identity_terms) + 1)
        h = np.array([float(h_uq(float(k))) for k in m])
        D = np.array([power_sum(v, float(x)).value for x in h])
        with np.errstate(divide="ignore", invalid="ignore"):
            lhs = np.log(D) - np.log(qv[m]) - m * np.log(h)
        violation = float(np.max(np.abs(np.expm1(lhs - np.log(phis[m])))))
        report.data["uq_identity_violation"] = violation
        report.add("D_u(h(n))/(q_n h(n)^n) = phi(n)", violation <= 1e-9, violation)

        big = np.power(2.0, np.arange(10, 21, dtype=float))
        hs = np.array([float(h_uq(x)) for x in big])
        if math.isinf(R):
            ok = bool(np.all(np.diff(hs) > 0) and hs[-1] > 1e5)
        else:
            ok = abs(hs[-1] - R) <= 1e-3 * R
        report.data["h_limit"] = float(hs[-1])
        report.add("h(x) -> R_u", ok, float(hs[-1]), detail=f"R_u={R:g}")

    if set_name == PHI_D:
        if u_fn is not None:
            early, late = lambda_class_deviation(u_fn, N)
        else:
            step = np.abs(uv[1:] / uv[:-1] - 1.0)
            early, late = float(np.max(step[: N // 2])), float(np.max(step[N // 2 :]))
        report.data["lambda_class_deviation"] = (early, late)
        report.add("u in Lambda", late <= early and late < 1e-2, late)

    report.data["member"] = report.passed
    return report


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------


def _means_table(cfg: ExperimentConfig, N: Optional[int] = None) -> TruncatedMeanTable:
    return truncated_means(cfg.distribution, cfg.phi, cfg.N if N is None else N, cfg.mean_method)


def centered_path(cfg: ExperimentConfig, seed: int, table: TruncatedMeanTable) -> np.ndarray:
    """X_n - mu_n for n = 0..N on the path of ``seed``."""
    return sample_path(cfg.distribution.with_seed(seed), cfg.N) - table.values[: cfg.N + 1]


def dyadic_exceedance(x: np.ndarray, phi: PhiFunction) -> float:
    """Fraction of dyadic blocks [2^j, 2^(j+1)) holding some n with |X_n| > phi(n)."""
    N = len(x) - 1
    n = np.arange(N + 1, dtype=float)
    over = np.abs(x) > np.asarray(phi(n), dtype=float)
    blocks = [over[2**j : min(2 ** (j + 1), N + 1)] for j in range(int(math.log2(N)) + 1)]
    hits = [bool(np.any(b)) for b in blocks if b.size]
    return float(np.mean(hits))


def _seed_verdicts(report: VerifierReport, cfg: ExperimentConfig, seeds: Sequence[int], stats: np.ndarray, limit: float):
    passing = stats < limit
    report.series.update(seed=np.asarray(seeds, dtype=np.int64), statistic=stats)
    report.data.update(statistics=tuple(float(s) for s in stats), passing_seeds=int(np.sum(passing)), limit=limit)
    report.add(
        "trailing max below threshold in every seed",
        bool(np.all(passing)),
        f"{int(np.sum(passing))}/{len(seeds)}",
        role="conclusion",
    )


def _membership(report: VerifierReport, member: VerifierReport):
    report.data.setdefault("membership", []).append(member)
    if not member.passed:
        log.warning("%s: %s", member.title, ", ".join(c.name for c in member.failed()))


def slln_mean_experiment(cfg: ExperimentConfig) -> VerifierReport:
    """t_n = (1/u_n) sum_k (p * q(X - mu))_n per seed.

    With p = 1 the pair (u, q) is checked against Phi_V; otherwise p must be
    v = diff u and (u, v q) is checked against Phi_V_tilde.
    """
    triple, N = cfg.triple, cfg.N
    report = VerifierReport(f"strong law under {triple.name}, X ~ {cfg.distribution.describe()}")
    if is_constant_one(triple.p):
        _membership(report, phi_set_membership(triple.u, triple.q, cfg.phi, PHI_V, N))
    else:
        pv = values(triple.p, N)
        report.data["p_equals_v"] = bool(np.allclose(pv, values(Difference(triple.u), N), rtol=1e-12, atol=0.0))
        _membership(
            report,
            phi_set_membership(triple.u, pv * values(triple.q, N), cfg.phi, PHI_V_TILDE, N, v=pv),
        )
    report.data["finite_mean"] = cfg.distribution.finite_mean

    table = _means_table(cfg)

    def run(seed):
        x = centered_path(cfg, seed, table)
        t = voronoi_mean(triple, x, N).values
        return trailing_max_abs(t, N), dyadic_exceedance(x + table.values[: N + 1], cfg.phi)

    results = map_seeds(run, cfg.seeds, cfg.workers)
    stats = np.array([r[0] for r in results])
    report.series["exceedance"] = np.array([r[1] for r in results])
    _seed_verdicts(report, cfg, cfg.seeds, stats, cfg.threshold)
    return report


def default_m_grid(N: int, points: int = 12) -> np.ndarray:
    return np.unique(np.geomspace(4, max(8, N // 64), points).astype(np.int64))


def slln_pseries_experiment(
    cfg: ExperimentConfig,
    method: PowerSeriesMethod,
    h_uq: Callable[[float], float],
    m_grid: Optional[Sequence[int]] = None,
) -> VerifierReport:
    """T(h(m)) applied to X - mu along m -> inf, per seed.

    ``method`` must have p = 1; its v defines u_n = sum_(k<=n) v_k. Series are
    truncated at the experiment horizon.
    """
    if not is_constant_one(method.p):
        raise ParameterError("strong-law power-series experiments need p = 1")
    N = cfg.N
    u_spec = partial_sum_spec(method.v)
    report = VerifierReport(f"strong law under (P,1,{method.q},{method.v}), X ~ {cfg.distribution.describe()}")
    ms = default_m_grid(N) if m_grid is None else np.asarray(m_grid, dtype=np.int64)
    xs = np.array([float(h_uq(float(m))) for m in ms])
    bad = xs[(xs <= 0) | (xs >= method.R)]
    if bad.size:
        raise ParameterError(f"h(m) = {bad[0]:g} lies outside (0, R)")

    _membership(report, phi_set_membership(u_spec, method.q, cfg.phi, PHI_V, N))
    _membership(
        report,
        phi_set_membership(u_spec, method.q, cfg.phi, PHI_UQ, N, h_uq=h_uq, v=method.v, radius=method.R),
    )
    grid = np.linspace(1.0, 64.0, 24)
    report.data["phi_inverse_subadditivity_violation"] = subadditivity_violation(cfg.phi, grid)

    bounded = replace(method, truncation=N)
    table = _means_table(cfg)
    tail = slice(len(ms) // 2, None)

    def run(seed):
        x = centered_path(cfg, seed, table)
        T = np.array([eval_T(bounded, x, float(h)).value for h in xs])
        return float(np.max(np.abs(T[tail]))), T

    results = map_seeds(run, cfg.seeds, cfg.workers)
    report.series.update(m=ms, x=xs)
    report.data["T"] = tuple(r[1] for r in results)
    _seed_verdicts(report, cfg, cfg.seeds, np.array([r[0] for r in results]), cfg.threshold)
    return report


def partial_sum_spec(v: SequenceSpec) -> SequenceSpec:
    """u_n = sum_(k<=n) v_k."""
    return CauchyProduct(builtin("one"), v)


def slln_moving_experiment(cfg: ExperimentConfig, lambdas: Optional[Sequence[float]] = None) -> VerifierReport:
    """Moving averages c_n = [U(n) - U(w_lambda(n))]/u_n of X - mu, per seed and lambda.

    The limit for each lambda is threshold * (1 - 1/lambda).
    """
    if cfg.window is None:
        raise ParameterError("moving-average experiments need a window function u(x)")
    triple, N = cfg.triple, cfg.N
    lams = tuple(lambdas if lambdas is not None else cfg.lambdas)
    report = VerifierReport(f"strong law under moving averages of {triple.name}, X ~ {cfg.distribution.describe()}")
    _membership(report, phi_set_membership(triple.u, triple.q, cfg.phi, PHI_D, N, u_fn=cfg.window))

    u = values(triple.u, N)
    n = np.arange(N // 2, N + 1)
    starts = {lam: window_starts(WindowMap(cfg.window, lam), n)[0] for lam in lams}
    table = _means_table(cfg)

    def run(seed):
        U = partial_sums_U(triple.p, triple.q, centered_path(cfg, seed, table), N)
        out = []
        for lam in lams:
            first = starts[lam]
            lower = np.where(first >= 0, U[np.clip(first, 0, N)], 0.0)
            out.append(float(np.max(np.abs((U[n] - lower) / u[n]))))
        return out

    results = np.array(map_seeds(run, cfg.seeds, cfg.workers))
    for j, lam in enumerate(lams):
        limit = cfg.threshold * (1.0 - 1.0 / lam)
        stats = results[:, j]
        passing = stats < limit
        report.series[f"statistic_lambda_{lam:g}"] = stats
        report.add(
            f"lambda={lam:g}: trailing max below {limit:.3g} in every seed",
            bool(np.all(passing)),
            f"{int(np.sum(passing))}/{len(cfg.seeds)}",
            role="conclusion",
        )
    report.series["seed"] = np.asarray(cfg.seeds, dtype=np.int64)
    return report


def baum_katz_sums(
    cfg: ExperimentConfig,
    gamma: float,
    max_mode: bool = False,
    eps_grid: Sequence[float] = (1.0,),
    replicates: int = 200,
    grid_points: int = 40,
    plateau_tol: float = 1e-3,
) -> VerifierReport:
    """Partial sums of sum_n n^-1 P[|S_n| > phi(n/(gamma-1)) eps] on a geometric n-grid.

    S_n = sum_(1<=i<=n) (X_i - mu_(i+ceil(n/(gamma-1)))); with ``max_mode`` the
    event uses max_(k<=n) |S_k|. P is the fraction of ``replicates`` paths
    (streams 1.. under the first seed) on which the event occurs, and grid
    point n_j carries weight log(n_(j+1)/n_j). The series counts as bounded
    when its increase over the last decade of the grid is below
    ``plateau_tol`` for every eps.
    """
    if not gamma > 1:
        raise ParameterError(f"gamma must exceed 1, got {gamma}")
    if replicates < 1:
        raise ParameterError("need at least one replicate")
    N = cfg.N
    report = VerifierReport(
        f"Baum-Katz sums ({'maximal' if max_mode else 'plain'}), X ~ {cfg.distribution.describe()}"
    )
    rho, spread = variation_index(cfg.phi, N / 8.0)
    report.data.update(phi_index=rho, phi_index_spread=spread)
    report.add("phi regularly varying, rho > 0", rho > 0 and spread < 0.1, rho)

    grid = np.unique(np.round(np.geomspace(1, N, grid_points)).astype(np.int64))
    shifts = np.ceil(grid / (gamma - 1.0) - 1e-12).astype(np.int64)
    table = truncated_means(cfg.distribution, cfg.phi, N + int(shifts[-1]) + 1, cfg.mean_method)
    paths = sample_paths(cfg.distribution.with_seed(cfg.seeds[0]), N, replicates)[:, 1:]

    centered_zero = not np.any(table.values)
    if centered_zero:
        S = np.cumsum(paths, axis=1)
        running_max = np.maximum.accumulate(np.abs(S), axis=1) if max_mode else None

    eps_arr = np.asarray(eps_grid, dtype=float)
    probs = np.empty((len(eps_arr), len(grid)))
    for j, (n, shift) in enumerate(zip(grid, shifts)):
        if centered_zero:
            stat = running_max[:, n - 1] if max_mode else np.abs(S[:, n - 1])
        else:
            partial = np.cumsum(paths[:, :n] - table.shifted(int(shift), int(n)), axis=1)
            stat = np.max(np.abs(partial), axis=1) if max_mode else np.abs(partial[:, -1])
        level = float(cfg.phi(n / (gamma - 1.0)))
        probs[:, j] = np.mean(stat[None, :] > level * eps_arr[:, None], axis=1)

    weights = np.log(np.append(grid[1:] / grid[:-1], grid[-1] / grid[-2] if len(grid) > 1 else 2.0))
    partial_sums = np.cumsum(probs * weights[None, :], axis=1)
    decade = np.searchsorted(grid, N / 10.0, side="right") - 1
    increases = partial_sums[:, -1] - partial_sums[:, max(decade, 0)]

    report.series["n"] = grid
    for i, eps in enumerate(eps_arr):
        report.series[f"P_eps_{eps:g}"] = probs[i]
        report.series[f"sum_eps_{eps:g}"] = partial_sums[i]
    report.data.update(gamma=gamma, increase_last_decade=tuple(float(x) for x in increases))
    report.add(
        "partial sums plateau over the last decade",
        bool(np.all(increases < plateau_tol)),
        float(np.max(increases)),
        role="conclusion",
    )
    return report
