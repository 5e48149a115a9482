import math
import unittest

import numpy as np

from voronoi_means.errors import ParameterError, SingularSystemError
from voronoi_means.methods import make_standard_method
from voronoi_means.sequences import Expr, WeightTriple, builtin
from voronoi_means.voronoi import (
    BOTH,
    OMEGA_TO_V,
    TransformPrefix,
    V_TO_OMEGA,
    default_maps,
    forward_substitution,
    invert_kernel,
    kronecker_check,
    lower_map,
    regularity_report,
    tauberian_tco,
    thm1_decompose,
    thm2_limitation_check,
    thm4_inclusion_check,
    upper_map,
    voronoi_mean,
    voronoi_mean_continuous,
    voronoi_mean_rewritten,
)


def c1():
    return make_standard_method("cesaro_c1")


class TestVoronoiMean(unittest.TestCase):
    def test_cesaro_of_alternating(self):
        t = voronoi_mean(c1(), builtin("alt01"), 9)
        n = np.arange(10)
        np.testing.assert_allclose(t.values, np.ceil((n + 1) / 2) / (n + 1))
        self.assertEqual(t.horizon, 9)
        np.testing.assert_array_equal(t.index, n)

    def test_rewritten_form_agrees(self):
        method = make_standard_method("logarithmic_mean")
        s = builtin("alt_growth")
        np.testing.assert_allclose(
            voronoi_mean_rewritten(method, s, 300), voronoi_mean(method, s, 300).values, rtol=1e-10, atol=1e-10
        )

    def test_start_skips_vanishing_u(self):
        method = make_standard_method("deferred_cesaro", {"lambda": 2})
        t = voronoi_mean(method, builtin("one"), 10, start=1)
        self.assertTrue(math.isnan(t.values[0]))
        np.testing.assert_allclose(t.defined, np.arange(2, 12) / np.arange(1, 11))

    def test_continuous_index(self):
        self.assertAlmostEqual(voronoi_mean_continuous(c1(), lambda x: x + 1.0, builtin("one"), 4.5), 5.0 / 5.5)

    def test_prefix_length_is_checked(self):
        with self.assertRaises(ParameterError):
            TransformPrefix(np.zeros(3), c1(), 5)


class TestRegularity(unittest.TestCase):
    def test_cesaro_is_regular(self):
        report = regularity_report(c1(), 10_000)
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report["cond_iii"], 1.0, delta=1e-12)
        self.assertEqual(report["verdict"], "consistent with regular")
        self.assertEqual(len(report.series["cond_iii_sum"]), 10_001)

    def test_square_normalizer_is_not(self):
        one = builtin("one")
        report = regularity_report(WeightTriple(one, one, builtin("square")), 10_000)
        self.assertFalse(report.passed)
        self.assertLess(report["cond_iii"], 1e-3)
        self.assertFalse(report.check("cond_iii").ok)
        self.assertEqual(report["verdict"], "non-regular")

    def test_logarithmic_mean_is_regular(self):
        self.assertTrue(regularity_report(make_standard_method("logarithmic_mean"), 5000).passed)

    def test_short_horizon(self):
        with self.assertRaises(ParameterError):
            regularity_report(c1(), 5)


class TestDecomposition(unittest.TestCase):
    def test_reconstruction(self):
        a, b, report = thm1_decompose(c1(), builtin("alt_harmonic"), 500)
        self.assertLessEqual(report["residual"], 1e-12)
        t = voronoi_mean(c1(), builtin("alt_harmonic"), 500).values
        self.assertEqual(a[0], t[0])
        np.testing.assert_array_equal(a[1:], t[:-1])
        self.assertEqual(b[0], 0.0)

    def test_decreasing_u_is_rejected(self):
        one = builtin("one")
        with self.assertRaises(ParameterError):
            thm1_decompose(WeightTriple(one, one, Expr("1/(n+1)")), one, 20)

    def test_limitation(self):
        report = thm2_limitation_check(c1(), builtin("alt01"), 0.5, 4000, tol=1e-3)
        self.assertTrue(report.passed)
        self.assertTrue(report["mean_verdict"].converged_to(0.5, 1e-3))


class TestKernel(unittest.TestCase):
    def test_forward_substitution(self):
        h = forward_substitution(np.ones(6), np.arange(1.0, 7.0))
        np.testing.assert_allclose(h, np.ones(6))

    def test_zero_pivot(self):
        with self.assertRaises(SingularSystemError):
            forward_substitution(np.array([0.0, 1.0]), np.array([1.0, 1.0]))

    def test_inversion_reconstructs(self):
        s = builtin("one_plus_alt")
        solution = invert_kernel(c1(), voronoi_mean(c1(), s, 200), s, 200)
        self.assertLessEqual(solution.relative_residual, 1e-10)
        self.assertTrue(solution.ishiguro_condition)
        self.assertEqual(solution.notes, ())

    def test_singular_system(self):
        with self.assertRaises(SingularSystemError):
            invert_kernel(c1(), np.zeros(11), builtin("one"), 10)


class TestTauberian(unittest.TestCase):
    def setUp(self):
        self.method = make_standard_method("riesz", {"q_seq": builtin("linear")})
        self.upper, self.lower = default_maps((1.5, 2.0, 4.0))

    def test_index_maps(self):
        n = np.arange(5)
        np.testing.assert_array_equal(upper_map(2.0)(n), [0, 2, 4, 6, 8])
        np.testing.assert_array_equal(lower_map(2.0)(n), [0, 0, 1, 1, 2])
        with self.assertRaises(ParameterError):
            upper_map(1.0)
        with self.assertRaises(ParameterError):
            lower_map(0.5)

    def test_constant_sequence_has_zero_estimates(self):
        report = tauberian_tco(self.method, builtin("one"), self.upper, BOTH, 400, lower_maps=self.lower)
        self.assertTrue(report.passed)
        for name in ("con1", "con2", "con3", "con4"):
            self.assertLessEqual(abs(report[name]), 1e-9)
        self.assertIn("con3[ceil(2n)]", report["per_map"])

    def test_single_direction(self):
        report = tauberian_tco(self.method, builtin("one"), self.upper, V_TO_OMEGA, 200)
        self.assertEqual([c.name for c in report.checks], ["con3"])

    def test_constant_q_is_outside_the_class(self):
        with self.assertRaises(ParameterError):
            tauberian_tco(c1(), builtin("one"), self.upper, OMEGA_TO_V, 200)

    def test_bad_arguments(self):
        with self.assertRaises(ParameterError):
            tauberian_tco(self.method, builtin("one"), self.upper, "sideways", 200)
        with self.assertRaises(ParameterError):
            tauberian_tco(self.method, builtin("one"), self.upper, BOTH, 200, denominator="q")
        with self.assertRaises(ParameterError):
            tauberian_tco(self.method, builtin("one"), [], BOTH, 200)


class TestInclusion(unittest.TestCase):
    def test_kronecker(self):
        report = kronecker_check(builtin("one"), builtin("alt_harmonic"), builtin("linear"), 20_000, tol=1e-3)
        self.assertTrue(report.passed)
        self.assertTrue(report["verdict"].converged_to(0.0, 1e-3))

    def test_inclusion(self):
        report = thm4_inclusion_check(
            builtin("one"), builtin("linear"), builtin("harmonic"), builtin("linear"), builtin("alt_sign"), 4000, tol=1e-3
        )
        self.assertTrue(report.passed)
        self.assertTrue(report["conclusion"].converged_to(0.0, 1e-3))

    def test_inclusion_needs_summable_input(self):
        report = thm4_inclusion_check(
            builtin("one"), builtin("linear"), builtin("harmonic"), builtin("linear"), builtin("alt_growth"), 4000, tol=1e-3
        )
        self.assertFalse(report.check("s_n summable (V,1,q,u)").ok)


if __name__ == "__main__":
    unittest.main()
