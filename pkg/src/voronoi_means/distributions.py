"""
Distributions of the strong-law experiments, their counter-based sample
streams and truncated means mu_k = E[X 1{|X| <= phi(k)}].

A sample path is keyed by (seed, stream) through numpy's Philox generator:
the same key always yields the same path, and every path of length N is a
prefix of the longer ones.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

import numpy as np
from scipy import integrate, special, stats

from .errors import ConvergenceError, ParameterError
from .phi import PhiFunction
from .sequences import _CALL_RE, _parse_params

log = logging.getLogger(__name__)

CLOSED_FORM = "closed_form"
QUADRATURE = "quadrature"
EMPIRICAL = "empirical"
MEAN_METHODS = (CLOSED_FORM, QUADRATURE, EMPIRICAL)

# stream reserved for the empirical truncated-mean sample
_EMPIRICAL_STREAM = 2**32


@dataclass(frozen=True)
class DistributionSpec:
    family: str
    params: Tuple[Tuple[str, float], ...] = ()
    seed: int = 0
    table: Tuple[Tuple[float, float], ...] = field(default=())

    def __post_init__(self):
        fam = FAMILIES.get(self.family)
        if fam is None:
            raise ParameterError(f"unknown distribution {self.family!r}; known: {', '.join(FAMILIES)}")
        unknown = set(dict(self.params)) - set(fam.defaults)
        if unknown:
            raise ParameterError(f"unknown parameter(s) for {self.family}: {', '.join(sorted(unknown))}")
        if not 0 <= self.seed < 2**64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        fam.check(self)

    @property
    def param_dict(self) -> Dict[str, float]:
        merged = dict(FAMILIES[self.family].defaults)
        merged.update(dict(self.params))
        return merged

    @property
    def symmetric(self) -> bool:
        return FAMILIES[self.family].symmetric(self)

    @property
    def finite_mean(self) -> bool:
        """E|X| < inf, i.e. E[phi^<-(|X|)] < inf for linear phi."""
        return FAMILIES[self.family].finite_mean(self)

    def with_seed(self, seed: int) -> "DistributionSpec":
        return replace(self, seed=int(seed))

    def describe(self) -> str:
        if self.family == "user_table":
            body = ",".join(f"{v:g}:{p:g}" for v, p in self.table)
            return f"user_table({body})"
        if not self.params:
            return self.family
        return f"{self.family}(" + ",".join(f"{k}={v:g}" for k, v in self.params) + ")"


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------


def _open_unit(raw: np.ndarray) -> np.ndarray:
    """Map [0, 1) doubles onto the open interval (0, 1)."""
    return (np.floor(raw * 2.0**53) + 0.5) / 2.0**53


def _no_check(_spec):
    pass


def _positive(*names):
    def check(spec):
        params = spec.param_dict
        for name in names:
            if not params[name] > 0:
                raise ParameterError(f"{spec.family}: {name} must be positive, got {params[name]}")

    return check


def _check_two_point(spec):
    p = spec.param_dict["p"]
    if not 0 <= p <= 1:
        raise ParameterError(f"two_point: p must lie in [0, 1], got {p}")


def _check_table(spec):
    if not spec.table:
        raise ParameterError("user_table needs at least one (value, probability) row")
    probs = np.array([p for _, p in spec.table])
    if np.any(probs < 0) or abs(float(np.sum(probs)) - 1.0) > 1e-12:
        raise ParameterError("user_table probabilities must be non-negative and sum to 1")


def _normal_sample(spec, unit):
    d = spec.param_dict
    return d["mu"] + d["sigma"] * special.ndtri(unit)


def _normal_truncated(spec, t):
    d = spec.param_dict
    mu, sigma = d["mu"], d["sigma"]
    a, b = (-t - mu) / sigma, (t - mu) / sigma
    mass = special.ndtr(b) - special.ndtr(a)
    return mu * mass + sigma * (stats.norm.pdf(a) - stats.norm.pdf(b))


def _cauchy_sample(spec, unit):
    d = spec.param_dict
    return d["loc"] + d["scale"] * np.tan(math.pi * (unit - 0.5))


def _cauchy_truncated(spec, t):
    d = spec.param_dict
    loc, scale = d["loc"], d["scale"]
    a, b = (-t - loc) / scale, (t - loc) / scale
    mass = (np.arctan(b) - np.arctan(a)) / math.pi
    return loc * mass + scale / (2.0 * math.pi) * np.log1p(b * b) - scale / (2.0 * math.pi) * np.log1p(a * a)


def _pareto_sample(spec, unit):
    d = spec.param_dict
    return d["xm"] * np.power(unit, -1.0 / d["alpha"])


def _pareto_truncated(spec, t):
    d = spec.param_dict
    alpha, xm = d["alpha"], d["xm"]
    t = np.maximum(np.asarray(t, dtype=float), xm)
    if alpha == 1.0:
        return xm * np.log(t / xm)
    return alpha * xm**alpha / (1.0 - alpha) * (np.power(t, 1.0 - alpha) - xm ** (1.0 - alpha))


def _two_point_sample(spec, unit):
    d = spec.param_dict
    return np.where(unit < d["p"], d["a"], d["b"])


def _two_point_symmetric(spec):
    d = spec.param_dict
    if d["a"] == d["b"] == 0.0:
        return True
    return d["a"] == -d["b"] and d["p"] == 0.5


def _two_point_truncated(spec, t):
    d = spec.param_dict
    t = np.asarray(t, dtype=float)
    return d["a"] * d["p"] * (abs(d["a"]) <= t) + d["b"] * (1.0 - d["p"]) * (abs(d["b"]) <= t)


def _table_sample(spec, unit):
    vals = np.array([v for v, _ in spec.table])
    cum = np.cumsum([p for _, p in spec.table])
    idx = np.searchsorted(cum, unit, side="right")
    return vals[np.minimum(idx, len(vals) - 1)]


def _table_truncated(spec, t):
    t = np.asarray(t, dtype=float)
    return sum(v * p * (abs(v) <= t) for v, p in spec.table) + np.zeros_like(t)


@dataclass(frozen=True)
class DistributionFamily:
    defaults: Dict[str, float]
    sample: Callable[[DistributionSpec, np.ndarray], np.ndarray]
    truncated_mean: Callable[[DistributionSpec, np.ndarray], np.ndarray]
    symmetric: Callable[[DistributionSpec], bool]
    finite_mean: Callable[[DistributionSpec], bool]
    frozen: Optional[Callable[[DistributionSpec], Any]] = None
    check: Callable[[DistributionSpec], None] = _no_check


FAMILIES: Dict[str, DistributionFamily] = {
    "normal": DistributionFamily(
        {"mu": 0.0, "sigma": 1.0},
        _normal_sample,
        _normal_truncated,
        lambda spec: spec.param_dict["mu"] == 0.0,
        lambda spec: True,
        lambda spec: stats.norm(spec.param_dict["mu"], spec.param_dict["sigma"]),
        _positive("sigma"),
    ),
    "cauchy": DistributionFamily(
        {"loc": 0.0, "scale": 1.0},
        _cauchy_sample,
        _cauchy_truncated,
        lambda spec: spec.param_dict["loc"] == 0.0,
        lambda spec: False,
        lambda spec: stats.cauchy(spec.param_dict["loc"], spec.param_dict["scale"]),
        _positive("scale"),
    ),
    "pareto": DistributionFamily(
        {"alpha": 2.0, "xm": 1.0},
        _pareto_sample,
        _pareto_truncated,
        lambda spec: False,
        lambda spec: spec.param_dict["alpha"] > 1.0,
        lambda spec: stats.pareto(spec.param_dict["alpha"], scale=spec.param_dict["xm"]),
        _positive("alpha", "xm"),
    ),
    "two_point": DistributionFamily(
        {"a": 1.0, "b": -1.0, "p": 0.5},
        _two_point_sample,
        _two_point_truncated,
        _two_point_symmetric,
        lambda spec: True,
        check=_check_two_point,
    ),
    "user_table": DistributionFamily(
        {},
        _table_sample,
        _table_truncated,
        lambda spec: False,
        lambda spec: True,
        check=_check_table,
    ),
}


def degenerate(value: float = 0.0, seed: int = 0) -> DistributionSpec:
    """X = value almost surely."""
    return DistributionSpec("two_point", (("a", value), ("b", value), ("p", 1.0)), seed)


def distribution(family: str, seed: int = 0, **params: float) -> DistributionSpec:
    return DistributionSpec(family, tuple(sorted((k, float(v)) for k, v in params.items())), int(seed))


def parse_distribution(text: str, seed: int = 0) -> DistributionSpec:
    """``normal``, ``cauchy(loc=0,scale=2)``, ``zero`` (X = 0) and the like."""
    text = text.strip()
    if text in ("zero", "degenerate"):
        return degenerate(0.0, seed)
    match = _CALL_RE.match(text)
    if not match:
        raise ParameterError(f"cannot parse distribution {text!r}")
    return distribution(match["name"], seed, **_parse_params(match["args"] or ""))


def distribution_from_config(entry: Any, seed: int = 0) -> DistributionSpec:
    """A distribution from a string or a ``{family, params, table, seed}`` mapping."""
    if isinstance(entry, str):
        return parse_distribution(entry, seed)
    if not isinstance(entry, Mapping):
        raise ParameterError(f"distribution must be a string or mapping, got {entry!r}")
    family = entry.get("family")
    if family is None:
        raise ParameterError("distribution mapping needs a 'family'")
    seed = int(entry.get("seed", seed))
    if family == "user_table":
        rows = tuple((float(v), float(p)) for v, p in zip(entry.get("values", []), entry.get("probs", [])))
        return DistributionSpec("user_table", (), seed, rows)
    params = entry.get("params") or {}
    return distribution(family, seed, **params)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def generator(seed: int, stream: int = 0) -> np.random.Generator:
    """The Philox generator keyed by (seed, stream)."""
    return np.random.Generator(np.random.Philox(key=np.array([seed, stream], dtype=np.uint64)))


def sample_path(dist: DistributionSpec, N: int, stream: int = 0) -> np.ndarray:
    """X_0..X_N of the path keyed by (dist.seed, stream), by inverse-CDF transform."""
    if N < 0:
        raise ParameterError(f"N must be >= 0, got {N}")
    unit = _open_unit(generator(dist.seed, stream).random(N + 1))
    path = np.asarray(FAMILIES[dist.family].sample(dist, unit), dtype=float)
    log.debug("sampled %s seed=%d stream=%d N=%d", dist.describe(), dist.seed, stream, N)
    return path


def sample_paths(dist: DistributionSpec, N: int, replicates: int, first_stream: int = 1) -> np.ndarray:
    """A (replicates, N + 1) array of independent paths, streams first_stream.."""
    return np.vstack([sample_path(dist, N, first_stream + r) for r in range(replicates)])


# ---------------------------------------------------------------------------
# Truncated means
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncatedMeanTable:
    """mu_k = E[X 1{|X| <= phi(k)}] for k = 0..N."""

    values: np.ndarray
    method: str
    samples: int = 0

    def shifted(self, shift: int, n: int) -> np.ndarray:
        """mu_{i+shift} for i = 1..n."""
        if shift + n >= len(self.values):
            raise ParameterError(f"table of length {len(self.values)} has no mu_{shift + n}")
        return self.values[shift + 1 : shift + n + 1]


def _quadrature(dist: DistributionSpec, thresholds: np.ndarray) -> np.ndarray:
    factory = FAMILIES[dist.family].frozen
    if factory is None:
        raise ParameterError(f"{dist.family} has no density; use closed_form or empirical")
    frozen = factory(dist)
    out = np.empty(len(thresholds))
    for i, t in enumerate(thresholds):
        value, err = integrate.quad(lambda x: x * frozen.pdf(x), -t, t, epsabs=1e-10, epsrel=1e-10, limit=200)
        if not math.isfinite(value) or err > 1e-8:
            raise ConvergenceError(f"truncated mean quadrature at phi={t:g} did not converge (error {err:.3g})")
        out[i] = value
    return out


def truncated_means(
    dist: DistributionSpec, phi: PhiFunction, N: int, method: str = CLOSED_FORM, samples: int = 100000
) -> TruncatedMeanTable:
    """mu_k for k = 0..N by closed form, adaptive quadrature on [-phi(k), phi(k)]
    or the empirical mean of ``samples`` draws from a reserved stream."""
    if method not in MEAN_METHODS:
        raise ParameterError(f"unknown truncated-mean method {method!r}, expected one of {MEAN_METHODS}")
    thresholds = np.asarray(phi(np.arange(N + 1, dtype=float)), dtype=float)
    if method == CLOSED_FORM:
        table = np.asarray(FAMILIES[dist.family].truncated_mean(dist, thresholds), dtype=float)
        return TruncatedMeanTable(np.broadcast_to(table, thresholds.shape).copy(), method)
    if method == QUADRATURE:
        return TruncatedMeanTable(_quadrature(dist, thresholds), method)
    draws = sample_path(dist, samples - 1, _EMPIRICAL_STREAM)
    order = np.argsort(np.abs(draws), kind="stable")
    sorted_abs = np.abs(draws)[order]
    running = np.concatenate(([0.0], np.cumsum(draws[order])))
    inside = np.searchsorted(sorted_abs, thresholds, side="right")
    return TruncatedMeanTable(running[inside] / samples, method, samples)
