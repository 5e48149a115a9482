import math
import unittest

import numpy as np

from voronoi_means.errors import DomainError, ParameterError
from voronoi_means.phi import (
    make_phi,
    parse_phi,
    phi_check,
    phi_from_expression,
    phi_inverse,
    phi_inverse_array,
    subadditivity_violation,
    variation_index,
)


class TestPhiCheck(unittest.TestCase):
    def test_linear_phi(self):
        grid = [0.0, 1.0, 2.0, 5.0, 10.0]
        report = phi_check(make_phi("linear"), grid)
        self.assertTrue(report.strict_increase)
        self.assertAlmostEqual(report.ratio_bound_c, 2.0)
        # (s+1)^2 * int_s^inf (x+1)^-2 dx = s+1
        np.testing.assert_allclose(report.integral_terms, np.asarray(grid) + 1.0, rtol=1e-8)
        a, b, ok = report.integral_bound
        self.assertTrue(ok)
        self.assertAlmostEqual(a, 1.0, places=6)
        self.assertAlmostEqual(b, 1.0, places=6)

    def test_exponential_phi_has_bounded_terms(self):
        report = phi_check(make_phi("exp"), [0.0, 1.0, 3.0])
        np.testing.assert_allclose(report.integral_terms, 0.5, rtol=1e-8)
        self.assertAlmostEqual(report.ratio_bound_c, math.e)

    def test_bad_grids(self):
        phi = make_phi("linear")
        with self.assertRaises(ParameterError):
            phi_check(phi, [])
        with self.assertRaises(ParameterError):
            phi_check(phi, [2.0, 1.0])
        with self.assertRaises(ParameterError):
            phi_check(phi, [-1.0, 1.0])

    def test_non_positive_phi(self):
        with self.assertRaises(DomainError):
            phi_check(phi_from_expression("x-1"), [0.0, 1.0])


class TestPhiInverse(unittest.TestCase):
    def test_closed_form(self):
        self.assertAlmostEqual(phi_inverse(make_phi("exp"), math.exp(2.0)), 2.0, places=12)

    def test_below_phi_at_zero(self):
        self.assertEqual(phi_inverse(make_phi("exp"), 0.5), 0.0)
        self.assertEqual(phi_inverse(make_phi("linear"), 0.25), 0.0)

    def test_bisection(self):
        phi = make_phi("xlog")
        self.assertAlmostEqual(phi_inverse(phi, float(phi(3.0))), 3.0, places=9)
        far = make_phi("borel")
        self.assertAlmostEqual(phi_inverse(far, float(far(40.0))), 40.0, places=6)

    def test_array_keeps_shape(self):
        ys = np.array([[0.5, 2.0], [3.0, 10.0]])
        out = phi_inverse_array(make_phi("linear"), ys)
        np.testing.assert_array_equal(out, [[0.0, 1.0], [2.0, 9.0]])
        self.assertEqual(phi_inverse_array(make_phi("xlog"), ys).shape, (2, 2))

    def test_bad_tolerance(self):
        with self.assertRaises(ParameterError):
            phi_inverse(make_phi("xlog"), 5.0, tol=0.0)


class TestPhiRegistry(unittest.TestCase):
    def test_borel_values(self):
        phi = make_phi("borel")
        self.assertAlmostEqual(float(phi(0.0)), 1.0)
        self.assertAlmostEqual(float(phi(1.0)), math.e)

    def test_parse(self):
        self.assertAlmostEqual(float(parse_phi("power(a=2)")(1.0)), 4.0)
        self.assertEqual(float(parse_phi("x**3+1")(2.0)), 9.0)
        self.assertEqual(float(parse_phi("mine", {"mine": "x+5"})(1.0)), 6.0)
        with self.assertRaises(ParameterError):
            parse_phi("power(a=-1)")

    def test_unknown(self):
        with self.assertRaises(ParameterError):
            make_phi("nope")
        with self.assertRaises(ParameterError):
            make_phi("affine", c=0)


class TestGrowthHelpers(unittest.TestCase):
    def test_square_root_is_subadditive(self):
        self.assertLessEqual(subadditivity_violation(make_phi("square"), [0.5, 1.0, 4.0, 9.0]), 1e-12)

    def test_linear_inverse_is_not_subadditive(self):
        self.assertAlmostEqual(subadditivity_violation(make_phi("linear"), [1.0, 2.0, 3.0]), 1.0)

    def test_variation_index(self):
        rho, spread = variation_index(lambda x: x**2, 10.0)
        self.assertAlmostEqual(rho, 2.0)
        self.assertAlmostEqual(spread, 0.0)


if __name__ == "__main__":
    unittest.main()
