import math
import unittest

import numpy as np

from voronoi_means.errors import DomainError, ParameterError
from voronoi_means.methods import make_standard_method
from voronoi_means.power_series import (
    AS_PRINTED,
    PowerSeriesMethod,
    V_SERIES,
    default_x_grid,
    estimate_radius,
    eval_T,
    from_descriptor,
    karamata_u,
    laplace_stieltjes,
    power_sum,
    reduced_power_series,
    thm9i_abelian_check,
    thm9ii_tauberian_check,
    thm9iii_karamata_check,
    thm9iv_v_ratio_check,
)
from voronoi_means.sequences import builtin, values


def flat(x):
    return np.ones_like(np.asarray(x, dtype=float))


class TestEvaluation(unittest.TestCase):
    def test_abel_on_alternating(self):
        value = eval_T(from_descriptor(make_standard_method("abel")), builtin("alt01"), 0.999)
        self.assertLess(abs(value.value - 1.0 / 1.999), 1e-3)
        self.assertAlmostEqual(value.value, 1.0 / 1.999, places=9)
        self.assertLessEqual(value.tail_bound, 1e-12)

    def test_borel_on_alternating(self):
        value = eval_T(from_descriptor(make_standard_method("borel")), builtin("alt01"), 10.0).value
        self.assertLess(abs(value - math.exp(-10.0) * math.cosh(10.0)), 1e-6)

    def test_borel_far_out(self):
        # partial sums of e^x overflow here; the log-space sum does not
        ps = from_descriptor(make_standard_method("borel"))
        self.assertAlmostEqual(eval_T(ps, builtin("one"), 800.0).value, 1.0, places=9)

    def test_domain(self):
        ps = from_descriptor(make_standard_method("abel"))
        with self.assertRaises(DomainError):
            eval_T(ps, builtin("one"), 1.0)
        with self.assertRaises(DomainError):
            eval_T(ps, builtin("one"), 0.0)

    def test_reduced_form_agrees(self):
        ps = from_descriptor(make_standard_method("cesaro", {"k": 2}))
        reduced, ratio = reduced_power_series(ps, builtin("alt_sign"))
        self.assertAlmostEqual(
            eval_T(ps, builtin("alt_sign"), 0.5).value, eval_T(reduced, ratio, 0.5).value, places=10
        )

    def test_log_power_series_is_index_shifted(self):
        method = make_standard_method("log_power_series")
        self.assertIn("index-shifted", method.notes[0])
        x = 0.5
        value = eval_T(from_descriptor(method), builtin("alt01"), x).value
        self.assertAlmostEqual(value, math.atanh(x) / math.log(2.0), places=10)
        # logarithmic method sum_(m>=1) s'_m x^m/m / -log(1-x) on s'_m = s_(m-1)
        m = np.arange(1, 200)
        shifted = values(builtin("alt01"), 198)
        expected = float(np.sum(shifted * x**m / m)) / -math.log(1.0 - x)
        self.assertAlmostEqual(value, expected, places=10)
        unshifted = float(np.sum(values(builtin("alt01"), 199)[1:] * x**m / m)) / -math.log(1.0 - x)
        self.assertGreater(abs(value - unshifted), 0.5)

    def test_power_sum(self):
        self.assertAlmostEqual(power_sum(builtin("one"), 0.5).value, 2.0, places=12)
        with self.assertRaises(DomainError):
            power_sum(builtin("one"), -0.5)

    def test_laplace_stieltjes(self):
        one = builtin("one")
        sigma = 0.1
        expected = 1.0 / (1.0 - math.exp(-2.0 * sigma))
        self.assertAlmostEqual(laplace_stieltjes(one, one, builtin("alt01"), sigma, 2000), expected, places=9)
        with self.assertRaises(ParameterError):
            laplace_stieltjes(one, one, one, 0.0, 10)

    def test_method_validation(self):
        one = builtin("one")
        with self.assertRaises(ParameterError):
            PowerSeriesMethod(one, one, one, 0.0)
        with self.assertRaises(ParameterError):
            PowerSeriesMethod(one, one, one, 1.0, tail_bound_mode="exact")
        with self.assertRaises(ParameterError):
            PowerSeriesMethod(one, one, one, 1.0, truncation=10)


class TestRadius(unittest.TestCase):
    def test_geometric(self):
        self.assertAlmostEqual(estimate_radius(builtin("geometric", r=0.5)), 2.0, places=6)

    def test_polynomial_factor(self):
        self.assertAlmostEqual(estimate_radius(builtin("linear")), 1.0, places=6)

    def test_entire(self):
        self.assertTrue(math.isinf(estimate_radius(builtin("inverse_factorial"))))

    def test_bad_input(self):
        with self.assertRaises(ParameterError):
            estimate_radius(builtin("zero"))
        with self.assertRaises(ParameterError):
            estimate_radius(builtin("one"), 10)

    def test_default_grid(self):
        np.testing.assert_allclose(default_x_grid(1.0, 3), [0.5, 0.75, 0.875])
        np.testing.assert_allclose(default_x_grid(math.inf, 3), [1, 2, 4, 8])


class TestAbelianTauberian(unittest.TestCase):
    def test_abelian(self):
        report = thm9i_abelian_check(make_standard_method("cesaro_c1"), builtin("alt01"), 4000, tol=1e-3)
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report["R"], 1.0, places=6)
        self.assertLessEqual(report["deviation"], 1e-3)
        self.assertEqual(len(report.series["x"]), len(report.series["T"]))

    def test_abelian_needs_finite_radius(self):
        report = thm9i_abelian_check(make_standard_method("borel"), builtin("alt01"), 200, tol=1e-3)
        self.assertFalse(report.check("R finite").ok)
        self.assertFalse(report["conclusion_applicable"])

    def test_tauberian(self):
        report = thm9ii_tauberian_check(make_standard_method("abel"), builtin("alt01"), 4000, tol=1e-3)
        self.assertTrue(report.passed)
        self.assertEqual(report["C"], 0.0)
        self.assertAlmostEqual(report["rho"], 0.0, places=9)

    def test_tauberian_condition_fails(self):
        report = thm9ii_tauberian_check(make_standard_method("abel"), builtin("alt_growth"), 2000, tol=1e-3)
        self.assertFalse(report.check("(p o qs)_n/v_n >= -C").ok)
        self.assertFalse(report["conclusion_applicable"])


class TestKaramata(unittest.TestCase):
    def test_karamata_u(self):
        np.testing.assert_allclose(values(karamata_u(1.0, flat), 3), [0, 1, 2, 3])
        np.testing.assert_allclose(
            values(karamata_u(0.5, flat), 2)[1:], np.array([1.0, math.sqrt(2.0)]) / math.gamma(1.5)
        )

    def test_linear_weight(self):
        one = builtin("one")
        report = thm9iii_karamata_check(one, one, one, 1.0, flat, 2000, tol=1e-4)
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report["D_ratio"], 1.0, delta=0.05)
        self.assertTrue(report["forward_ok"])
        self.assertGreaterEqual(min(report["converse_estimates"]), 0.0)

    def test_printed_form_matches(self):
        one = builtin("one")
        by_v = thm9iii_karamata_check(one, one, one, 1.0, flat, 500, hypothesis_form=V_SERIES)
        printed = thm9iii_karamata_check(one, one, one, 1.0, flat, 500, hypothesis_form=AS_PRINTED)
        self.assertAlmostEqual(by_v["D_ratio"], printed["D_ratio"], places=6)

    def test_arguments(self):
        one = builtin("one")
        with self.assertRaises(ParameterError):
            thm9iii_karamata_check(one, one, one, -1.0, flat, 100)
        with self.assertRaises(ParameterError):
            thm9iii_karamata_check(one, one, one, 1.0, flat, 100, hypothesis_form="other")
        with self.assertRaises(ParameterError):
            thm9iii_karamata_check(one, one, one, 1.0, flat, 100, lambda_grid=(1.0,))


class TestRatioSequence(unittest.TestCase):
    def test_mode_v(self):
        report = thm9iv_v_ratio_check(make_standard_method("log_power_series"), builtin("one"), "v", 2000, tol=1e-3)
        self.assertTrue(report.passed)
        self.assertTrue(report["ratio_verdict"].converged_to(1.0, 1e-9))

    def test_mode_iv_excludes_integer_index(self):
        report = thm9iv_v_ratio_check(make_standard_method("abel"), builtin("one"), "iv", 2000, tol=1e-3)
        self.assertFalse(report.passed)
        self.assertFalse(report["conclusion_applicable"])

    def test_bad_mode(self):
        with self.assertRaises(ParameterError):
            thm9iv_v_ratio_check(make_standard_method("abel"), builtin("one"), "vi", 100)


if __name__ == "__main__":
    unittest.main()
