"""
The invariant suite behind ``voronoi-means selftest``: each invariant is
recomputed at a small horizon and reported as one check.
"""
import logging
import math
from typing import Callable, List, Tuple

import numpy as np

from .classical import R1_SERIES, ingham_transform, riemann_transform
from .convolution import cauchy_convolve, voronoi_convolve
from .distributions import degenerate
from .errors import SummabilityError
from .limits import VerifierReport, detect_limit
from .lln import ExperimentConfig, slln_mean_experiment
from .methods import make_standard_method
from .moving_average import voronoi_moving_average, window_for
from .phi import make_phi
from .power_series import eval_T, from_descriptor
from .sequences import Prefix, WeightTriple, builtin, values
from .voronoi import default_maps, invert_kernel, regularity_report, tauberian_tco, thm1_decompose, voronoi_mean

log = logging.getLogger(__name__)

Invariant = Callable[[], Tuple[bool, float]]


def _telescoping() -> Tuple[bool, float]:
    rng = np.random.default_rng(7)
    p = Prefix(tuple(rng.integers(-9, 10, 201) / rng.integers(1, 10, 201)), "error")
    q = Prefix(tuple(rng.integers(-9, 10, 201) / rng.integers(1, 10, 201)), "error")
    expected = cauchy_convolve(p, q, 200)
    err = float(np.max(np.abs(np.cumsum(voronoi_convolve(p, q, 200)) - expected)))
    return err <= 1e-12 * max(1.0, float(np.max(np.abs(expected)))), err


def _euler_identity() -> Tuple[bool, float]:
    u = values(make_standard_method("euler", {"p": 0.5}).triple.u, 30)
    n = np.arange(31)
    err = float(np.max(np.abs(u * np.array([math.factorial(int(k)) for k in n]) - 1.0)))
    return err <= 1e-12, err


def _cesaro_regular() -> Tuple[bool, float]:
    report = regularity_report(make_standard_method("cesaro_c1"), 2000)
    err = abs(report["cond_iii"] - 1.0)
    return report.passed and err <= 1e-12, err


def _square_non_regular() -> Tuple[bool, float]:
    one = builtin("one")
    report = regularity_report(WeightTriple(one, one, builtin("square")), 2000)
    return not report.passed and report["cond_iii"] < 1e-3, report["cond_iii"]


def _abel_value() -> Tuple[bool, float]:
    T = eval_T(from_descriptor(make_standard_method("abel")), builtin("alt01"), 0.999).value
    err = abs(T - 1.0 / 1.999)
    return err <= 1e-3, err


def _borel_value() -> Tuple[bool, float]:
    T = eval_T(from_descriptor(make_standard_method("borel")), builtin("alt01"), 10.0).value
    err = abs(T - math.exp(-10.0) * math.cosh(10.0))
    return err <= 1e-6, err


def _decomposition() -> Tuple[bool, float]:
    _, _, report = thm1_decompose(make_standard_method("cesaro_c1"), builtin("alt_harmonic"), 500)
    return report["residual"] <= 1e-12, report["residual"]


def _kernel() -> Tuple[bool, float]:
    method = make_standard_method("cesaro_c1")
    s = builtin("one_plus_alt")
    solution = invert_kernel(method, voronoi_mean(method, s, 200), s, 200)
    return solution.relative_residual <= 1e-10, solution.relative_residual


def _tco_constant() -> Tuple[bool, float]:
    upper, lower = default_maps((1.5, 2.0, 4.0))
    report = tauberian_tco(
        make_standard_method("riesz", {"q_seq": builtin("linear")}), builtin("one"), upper, "both", 400, lower_maps=lower
    )
    worst = max(abs(report[name]) for name in ("con1", "con2", "con3", "con4"))
    return worst <= 1e-9, worst


def _moving_limit() -> Tuple[bool, float]:
    method = make_standard_method("cesaro_c1")
    worst = 0.0
    for lam in (1.5, 2.0, 4.0):
        c = voronoi_moving_average(method, window_for(method, lam), builtin("alt01"), 2000)
        worst = max(worst, abs(float(c.values[-1]) - (1.0 - 1.0 / lam) / 2.0))
    return worst < 5e-3, worst


def _classical_single_terms() -> Tuple[bool, float]:
    worst = 0.0
    s = builtin("single", index=1.0)
    for x in (10.0, 100.0, 1000.0):
        worst = max(worst, abs(ingham_transform(s, x) - math.floor(x) / x))
    h = 0.25
    worst = max(worst, abs(riemann_transform(s, h, R1_SERIES, N=64).value - math.sin(h) / h))
    return worst <= 1e-14, worst


def _null_distribution() -> Tuple[bool, float]:
    one = builtin("one")
    cfg = ExperimentConfig(
        degenerate(0.0), make_phi("linear"), WeightTriple(one, one, builtin("linear")), 2000, (1, 2, 3)
    )
    report = slln_mean_experiment(cfg)
    worst = max(report["statistics"])
    return worst == 0.0, worst


def _limit_detection() -> Tuple[bool, float]:
    t = voronoi_mean(make_standard_method("cesaro_c1"), builtin("alt01"), 4000).values
    verdict = detect_limit(t, 1e-3, 40)
    return verdict.converged_to(0.5, 1e-3), verdict.estimate if verdict.converged else math.nan


INVARIANTS: List[Tuple[str, Invariant]] = [
    ("telescoping sum of (p o q) equals (p * q)", _telescoping),
    ("Euler weights give u_n = 1/n!", _euler_identity),
    ("(C,1) is regular", _cesaro_regular),
    ("(1, 1, (n+1)^2) is not regular", _square_non_regular),
    ("Abel T(0.999) on 1,0,1,0,...", _abel_value),
    ("Borel T(10) on 1,0,1,0,...", _borel_value),
    ("decomposition reconstructs (p o qs)_n", _decomposition),
    ("kernel inversion reconstructs q_n s_n", _kernel),
    ("Tauberian estimates vanish on constants", _tco_constant),
    ("moving averages of 1,0,1,0,... under (C,1)", _moving_limit),
    ("Ingham and Riemann single-term values", _classical_single_terms),
    ("X = 0 passes the strong-law experiment", _null_distribution),
    ("(C,1) mean of 1,0,1,0,... converges to 1/2", _limit_detection),
]


def run_selftest() -> VerifierReport:
    report = VerifierReport("selftest")
    for name, invariant in INVARIANTS:
        try:
            ok, value = invariant()
        except SummabilityError as e:
            log.error("%s: %s", name, e)
            report.add(name, False, None, role="invariant", detail=str(e))
            continue
        report.add(name, ok, float(value), role="invariant")
    return report
