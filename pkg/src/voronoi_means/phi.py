"""
The monotone functions phi of the strong-law statements, their generalized
inverse and numeric checks of the growth conditions placed on them.
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize, special

from .errors import ConvergenceError, DomainError, ParameterError
from .sequences import _CALL_RE, _parse_params, compile_expression

log = logging.getLogger(__name__)

_BRACKET_DOUBLINGS = 1100


@dataclass(frozen=True)
class PhiFunction:
    """A strictly increasing phi: [0, inf) -> (0, inf).

    ``monotone_bracket`` seeds the bisection bracket used when no closed-form
    inverse is known; the upper end is doubled until it brackets the target.
    """

    name: str
    fn: Callable[[Any], Any]
    inverse_hint: Optional[Callable[[Any], Any]] = None
    monotone_bracket: Tuple[float, float] = (0.0, 1.0)

    def __call__(self, x):
        return self.fn(x)

    def __str__(self) -> str:
        return self.name


def _borel_phi(x):
    # e^x x! / x^x with 0^0 = 1
    x = np.asarray(x, dtype=float)
    return np.exp(x + special.gammaln(x + 1.0) - special.xlogy(x, x))


def make_phi(name: str, **params: float) -> PhiFunction:
    """Registered phi functions.

    linear: x + 1; affine(c): x + c; square: x^2 (on (0, inf)); power(a): (x+1)^a;
    exp: e^x; xlog: (x+1) log(x+2); borel: e^x x!/x^x.
    """
    if name == "linear":
        return PhiFunction("x+1", lambda x: x + 1.0, lambda y: y - 1.0)
    if name == "affine":
        c = float(params.get("c", 1.0))
        if c <= 0:
            raise ParameterError(f"affine phi needs c > 0, got {c}")
        return PhiFunction(f"x+{c:g}", lambda x: x + c, lambda y: y - c)
    if name == "square":
        return PhiFunction("x^2", np.square, np.sqrt)
    if name == "power":
        a = float(params.get("a", 1.0))
        if a <= 0:
            raise ParameterError(f"power phi needs a > 0, got {a}")
        return PhiFunction(
            f"(x+1)^{a:g}", lambda x: np.power(x + 1.0, a), lambda y: np.power(y, 1.0 / a) - 1.0
        )
    if name == "exp":
        return PhiFunction("exp(x)", np.exp, np.log)
    if name == "xlog":
        return PhiFunction("(x+1)*log(x+2)", lambda x: (x + 1.0) * np.log(x + 2.0))
    if name == "borel":
        return PhiFunction("exp(x)*x!/x^x", _borel_phi)
    raise ParameterError(f"unknown phi {name!r}")


def phi_from_expression(text: str, bracket: Tuple[float, float] = (0.0, 1.0)) -> PhiFunction:
    """A phi given as an expression in ``x``; inverted by bisection."""
    return PhiFunction(text, compile_expression(text, "x"), None, bracket)


def parse_phi(text: str, named: Optional[Mapping[str, str]] = None) -> PhiFunction:
    """A config-named phi, a registered phi with optional ``(k=v)`` parameters, or an expression."""
    text = text.strip()
    if named and text in named:
        return phi_from_expression(str(named[text]))
    match = _CALL_RE.match(text)
    if match:
        try:
            return make_phi(match["name"], **_parse_params(match["args"] or ""))
        except ParameterError:
            if match["args"]:
                raise
    return phi_from_expression(text)


@dataclass(frozen=True)
class PhiReport:
    strict_increase: bool
    ratio_bound_c: float
    integral_terms: Tuple[float, ...]
    integral_errors: Tuple[float, ...]
    a: float
    b: float
    integral_ok: bool

    @property
    def integral_bound(self) -> Tuple[float, float, bool]:
        return self.a, self.b, self.integral_ok


def _positive(phi: PhiFunction, x: np.ndarray) -> np.ndarray:
    y = np.asarray(phi(x), dtype=float)
    bad = np.flatnonzero(~(y > 0) | ~np.isfinite(y))
    if bad.size:
        raise DomainError(f"phi={phi} is not positive and finite at x={x[bad[0]]:g}")
    return y


def _integral_term(phi: PhiFunction, s: float) -> Tuple[float, float]:
    """phi(s)^2 * int_s^inf dx / phi(x)^2 and the quadrature error bound."""
    phi_s = float(phi(s))
    # integrand scaled by phi(s)^2 stays <= 1 on [s, inf)
    value, err = integrate.quad(
        lambda x: (phi_s / float(phi(x))) ** 2, s, np.inf, limit=200, epsabs=1e-12, epsrel=1e-10
    )
    if not math.isfinite(value):
        raise ConvergenceError(f"integral of 1/phi^2 from {s:g} does not converge")
    return value, err


def phi_check(phi: PhiFunction, s_grid: Sequence[float]) -> PhiReport:
    """Evidence for the growth conditions on phi over ``s_grid``.

    Reports whether phi increases strictly along the grid, the largest ratio
    phi(x+1)/phi(x) and the terms phi(s)^2 int_s^inf phi^-2, together with the
    smallest line a s + b (least-squares slope, intercept raised to dominate)
    lying above them.
    """
    grid = np.asarray(s_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ParameterError("phi_check needs a nonempty grid")
    if np.any(grid < 0) or np.any(np.diff(grid) <= 0):
        raise ParameterError("phi_check grid must be increasing within [0, inf)")

    at = _positive(phi, grid)
    nxt = _positive(phi, grid + 1.0)
    strict = bool(np.all(np.diff(at) > 0) and np.all(nxt > at))
    if not strict:
        log.warning("phi=%s is not strictly increasing on the grid", phi)
    ratio_c = float(np.max(nxt / at))

    terms, errors = zip(*(_integral_term(phi, float(s)) for s in grid))
    terms_arr = np.asarray(terms)
    if grid.size > 1:
        a = max(0.0, float(np.polyfit(grid, terms_arr, 1)[0]))
    else:
        a = 0.0
    b = float(np.max(terms_arr - a * grid))
    ok = bool(np.all(np.isfinite(terms_arr)))
    log.debug("phi=%s c=%.6g a=%.6g b=%.6g", phi, ratio_c, a, b)
    return PhiReport(strict, ratio_c, tuple(terms), tuple(errors), a, b, ok)


def phi_inverse(phi: PhiFunction, y: float, tol: float = 1e-12) -> float:
    """phi^<-(y): the x >= 0 with |phi(x) - y| <= tol * max(1, |y|).

    Values of y below phi(0) map to 0, the convention under which phi^<-(|X|)
    is used inside expectations.
    """
    if tol <= 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    if y < float(phi(0.0)):
        return 0.0
    if phi.inverse_hint is not None:
        return max(0.0, float(phi.inverse_hint(y)))

    lo, hi = phi.monotone_bracket
    lo = max(0.0, lo)
    if float(phi(lo)) > y:
        lo = 0.0
    for _ in range(_BRACKET_DOUBLINGS):
        if float(phi(hi)) >= y:
            break
        lo, hi = hi, 2.0 * hi if hi > 0 else 1.0
    else:
        raise ConvergenceError(f"could not bracket phi^<-({y:g}) for phi={phi}")

    scale = tol * max(1.0, abs(y))
    x = optimize.bisect(lambda t: float(phi(t)) - y, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=4000)
    if abs(float(phi(x)) - y) > scale:
        raise ConvergenceError(
            f"phi^<-({y:g}) settled at x={x:.17g} with residual {abs(float(phi(x)) - y):.3g}"
        )
    return float(x)


def phi_inverse_array(phi: PhiFunction, ys: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Elementwise :func:`phi_inverse`."""
    if phi.inverse_hint is not None:
        ys = np.asarray(ys, dtype=float)
        out = np.asarray(phi.inverse_hint(np.maximum(ys, float(phi(0.0)))), dtype=float)
        return np.where(ys < float(phi(0.0)), 0.0, np.maximum(out, 0.0))
    return np.array([phi_inverse(phi, float(y), tol) for y in np.ravel(ys)]).reshape(np.shape(ys))


def subadditivity_violation(phi: PhiFunction, grid: Sequence[float]) -> float:
    """max over grid pairs of phi^<-(a+b) - phi^<-(a) - phi^<-(b); <= 0 is evidence of subadditivity."""
    g = np.asarray(grid, dtype=float)
    inv = phi_inverse_array(phi, g)
    pair = phi_inverse_array(phi, g[:, None] + g[None, :])
    return float(np.max(pair - inv[:, None] - inv[None, :]))


def variation_index(fn: Callable[[Any], Any], x: float, lambdas: Sequence[float] = (2.0, 4.0, 8.0)) -> Tuple[float, float]:
    """Index estimate rho from f(lambda x)/f(x) ~ lambda^rho at ``x``, with the spread across lambdas."""
    fx = float(fn(x))
    rhos = np.array([math.log(float(fn(lam * x)) / fx) / math.log(lam) for lam in lambdas])
    return float(np.mean(rhos)), float(np.ptp(rhos))
