"""
Registry of the named special cases of the Voronoi family.

Mean-type methods carry a :class:`WeightTriple`; moving averages additionally
carry the continuous weight u(x) that defines their window; power-series
methods carry the D-coefficients v_n and the radius R, with u_n taken as the
partial sums of v_n.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

import numpy as np
from scipy import special

from .errors import ParameterError
from .sequences import (
    CauchyProduct,
    Expr,
    SequenceSpec,
    WeightTriple,
    builtin,
    compile_expression,
    parse_sequence,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class UFunction:
    """A continuous weight u(x) with an optional closed-form inverse.

    ``domain_lo`` is the left end of the working domain; u is assumed
    increasing on [domain_lo, inf).
    """

    name: str
    fn: Callable[[Any], Any]
    inverse: Optional[Callable[[Any], Any]] = None
    domain_lo: float = 0.0

    def __call__(self, x):
        return self.fn(x)

    @property
    def range_lo(self) -> float:
        with np.errstate(divide="ignore"):
            return float(self.fn(np.float64(self.domain_lo)))


def _shifted_cesaro_u(k: float) -> Callable[[Any], Any]:
    # (C,k) normalizer binom(x+k, x) extended to real x
    def fn(x):
        x = np.asarray(x, dtype=float)
        return np.exp(special.gammaln(x + k + 1.0) - special.gammaln(x + 1.0) - special.gammaln(k + 1.0))

    return fn


def u_function(name: str, **params: float) -> UFunction:
    """Look up a registered continuous weight.

    identity: x; affine(c): x + c; log: log x; log_shift: log(x + 2);
    square: x^2; power(a): x^a; harmonic_number: digamma(x + 2) + gamma_E,
    which interpolates (1 * 1/(n+1))_n; cesaro(k): Gamma(x+k+1)/(Gamma(x+1)Gamma(k+1)).
    """
    if name == "identity":
        return UFunction("x", lambda x: x, lambda y: y, 0.0)
    if name == "affine":
        c = float(params.get("c", 1.0))
        return UFunction(f"x+{c:g}", lambda x: x + c, lambda y: y - c, 0.0)
    if name == "log":
        return UFunction("log(x)", np.log, np.exp, 0.0)
    if name == "log_shift":
        return UFunction("log(x+2)", lambda x: np.log(x + 2.0), lambda y: np.exp(y) - 2.0, 0.0)
    if name == "square":
        return UFunction("x^2", np.square, np.sqrt, 0.0)
    if name == "power":
        a = float(params.get("a", 1.0))
        if a <= 0:
            raise ParameterError(f"power u(x)=x^a needs a > 0, got {a}")
        return UFunction(f"x^{a:g}", lambda x: np.power(x, a), lambda y: np.power(y, 1.0 / a), 0.0)
    if name == "harmonic_number":
        return UFunction(
            "digamma(x+2)+gamma", lambda x: special.digamma(np.asarray(x) + 2.0) + np.euler_gamma
        )
    if name == "cesaro":
        k = float(params.get("k", 1.0))
        if k <= 0:
            raise ParameterError(f"cesaro weight needs k > 0, got {k}")
        return UFunction(f"binom(x+{k:g},x)", _shifted_cesaro_u(k))
    raise ParameterError(f"unknown u-function {name!r}")


def u_function_from_text(text: str, domain_lo: float = 0.0) -> UFunction:
    """A registered u-function name or an expression in ``x`` (inverted numerically)."""
    try:
        return u_function(text)
    except ParameterError:
        pass
    return UFunction(text, compile_expression(text, "x"), None, domain_lo)


@dataclass(frozen=True)
class MethodDescriptor:
    name: str
    parameters: Tuple[Tuple[str, float], ...]
    triple: WeightTriple
    kind: str = "mean"
    v: Optional[SequenceSpec] = None
    radius: Optional[float] = None
    window: Optional[UFunction] = None
    notes: Tuple[str, ...] = field(default=())

    @property
    def param_dict(self) -> Dict[str, float]:
        return dict(self.parameters)

    @property
    def lam(self) -> Optional[float]:
        return self.param_dict.get("lambda")

    def describe(self) -> str:
        if not self.parameters:
            return self.name
        args = ",".join(f"{k}={v:g}" for k, v in self.parameters)
        return f"{self.name}({args})"


METHOD_NAMES = (
    "euler",
    "norlund",
    "norlund_general",
    "cesaro",
    "riesz",
    "cesaro_c1",
    "logarithmic_mean",
    "jajte",
    "chow_lai",
    "abel",
    "borel",
    "log_power_series",
    "deferred_cesaro",
    "log_moving_average",
)


def _need_sequence(name: str, params: Mapping[str, Any], key: str) -> SequenceSpec:
    seq = params.get(key)
    if seq is None:
        raise ParameterError(f"{name} needs the sequence parameter {key!r}")
    if isinstance(seq, str):
        seq = parse_sequence(seq)
    if not isinstance(seq, SequenceSpec):
        raise ParameterError(f"{name}: {key} must be a sequence, got {seq!r}")
    return seq


def _real(name: str, params: Mapping[str, Any], key: str, default: Optional[float] = None) -> float:
    raw = params.get(key, default)
    if raw is None:
        raise ParameterError(f"{name} needs the parameter {key!r}")
    try:
        value = float(raw)
    except (TypeError, ValueError) as e:
        raise ParameterError(f"{name}: {key} must be a real number, got {raw!r}") from e
    if not math.isfinite(value):
        raise ParameterError(f"{name}: {key} must be finite")
    return value


def _lambda(name: str, params: Mapping[str, Any]) -> float:
    lam = _real(name, params, "lambda", 2.0)
    if lam <= 1:
        raise ParameterError(f"{name}: lambda must exceed 1, got {lam}")
    return lam


def make_standard_method(name: str, params: Optional[Mapping[str, Any]] = None) -> MethodDescriptor:
    """Instantiate a named special case with its standard weights."""
    params = dict(params or {})
    one = builtin("one")

    if name == "euler":
        p = _real(name, params, "p", 0.5)
        if not 0 < p < 1:
            raise ParameterError(f"euler: p must lie in (0, 1), got {p}")
        pw, qw = builtin("euler_weight", r=1.0 - p), builtin("euler_weight", r=p)
        return MethodDescriptor(name, (("p", p),), WeightTriple(pw, qw, CauchyProduct(pw, qw), f"E_{p:g}"))

    if name == "norlund":
        pw = _need_sequence(name, params, "p_seq")
        return MethodDescriptor(name, (), WeightTriple(pw, one, CauchyProduct(pw, one), f"(N,{pw})"))

    if name == "norlund_general":
        pw = _need_sequence(name, params, "p_seq")
        qw = _need_sequence(name, params, "q_seq")
        return MethodDescriptor(
            name, (), WeightTriple(pw, qw, CauchyProduct(pw, qw), f"(N,{pw},{qw})")
        )

    if name == "cesaro":
        k = _real(name, params, "k", 1.0)
        if k <= 0:
            raise ParameterError(f"cesaro: k must be positive, got {k}")
        pw = builtin("cesaro_weight", k=k)
        return MethodDescriptor(
            name,
            (("k", k),),
            WeightTriple(pw, one, CauchyProduct(pw, one), f"(C,{k:g})"),
            window=u_function("cesaro", k=k),
        )

    if name == "riesz":
        qw = _need_sequence(name, params, "q_seq")
        return MethodDescriptor(name, (), WeightTriple(one, qw, CauchyProduct(one, qw), f"(Nbar,{qw})"))

    if name == "cesaro_c1":
        return MethodDescriptor(
            name, (), WeightTriple(one, one, builtin("linear"), "(C,1)"), window=u_function("affine", c=1.0)
        )

    if name == "logarithmic_mean":
        qw = builtin("harmonic")
        return MethodDescriptor(
            name,
            (),
            WeightTriple(one, qw, CauchyProduct(one, qw), "l"),
            window=u_function("harmonic_number"),
        )

    if name == "jajte":
        qw = _need_sequence(name, params, "q_seq")
        uw = _need_sequence(name, params, "u_seq")
        return MethodDescriptor(name, (), WeightTriple(one, qw, uw, f"(V,1,{qw},{uw})"))

    if name == "chow_lai":
        pw = _need_sequence(name, params, "p_seq")
        uw = _need_sequence(name, params, "u_seq")
        return MethodDescriptor(name, (), WeightTriple(pw, one, uw, f"(V,{pw},1,{uw})"))

    if name == "abel":
        return _power_series(name, one, one, one, 1.0)

    if name == "borel":
        inv = builtin("inverse_factorial")
        return _power_series(name, one, inv, inv, math.inf)

    if name == "log_power_series":
        # v_n = 1/(n+1) keeps v_0 != 0: D(x) = -log(1-x)/x, so T(x) is the
        # logarithmic method applied to s shifted one index right. Limits agree;
        # values at fixed x do not.
        harmonic = builtin("harmonic")
        return _power_series(
            name,
            one,
            harmonic,
            harmonic,
            1.0,
            notes=("index-shifted logarithmic method: D(x) = -log(1-x)/x; same limit, different T(x)",),
        )

    if name == "deferred_cesaro":
        lam = _lambda(name, params)
        return MethodDescriptor(
            name,
            (("lambda", lam),),
            WeightTriple(one, one, builtin("identity"), f"(D,n/{lam:g},n)"),
            kind="moving_average",
            window=u_function("identity"),
        )

    if name == "log_moving_average":
        lam = _lambda(name, params)
        return MethodDescriptor(
            name,
            (("lambda", lam), ("u_shift", 2.0)),
            WeightTriple(one, builtin("harmonic"), builtin("log_shift"), f"L({lam:g})"),
            kind="moving_average",
            window=u_function("log_shift"),
            notes=("u(x) = log(x+2): log x shifted so that u_0 != 0",),
        )

    raise ParameterError(f"unknown method {name!r}; known: {', '.join(METHOD_NAMES)}")


def _power_series(name, p, q, v, radius, notes=()):
    triple = WeightTriple(p, q, CauchyProduct(builtin("one"), v), f"(P,{p},{q},{v})")
    return MethodDescriptor(name, (), triple, kind="power_series", v=v, radius=radius, notes=notes)


def method_from_expressions(
    p: str, q: str, u: str, named: Optional[Mapping[str, Any]] = None
) -> WeightTriple:
    """A triple from three command-line sequence strings."""
    return WeightTriple(parse_sequence(p, named), parse_sequence(q, named), parse_sequence(u, named))


__all__ = [
    "Expr",
    "METHOD_NAMES",
    "MethodDescriptor",
    "UFunction",
    "make_standard_method",
    "method_from_expressions",
    "u_function",
    "u_function_from_text",
]
