import unittest

import numpy as np

from voronoi_means.errors import ParameterError
from voronoi_means.methods import make_standard_method, u_function, u_function_from_text
from voronoi_means.moving_average import (
    BISECTION,
    CLOSED_FORM,
    WindowMap,
    cor2_discrete_continuous_check,
    identity_residual,
    lambda_class_deviation,
    thm5_equivalence_check,
    thm6_uniformity_check,
    thm8_pi_criterion,
    voronoi_moving_average,
    w_lambda,
    window_for,
    window_starts,
)
from voronoi_means.sequences import builtin


def c1():
    return make_standard_method("cesaro_c1")


class TestWindowMap(unittest.TestCase):
    def test_closed_form(self):
        wm = WindowMap(u_function("identity"), 2.0)
        self.assertEqual(wm.inverse_method, CLOSED_FORM)
        self.assertEqual(w_lambda(wm, 10.0), 5.0)

    def test_bisection_snaps_to_integers(self):
        wm = WindowMap(u_function_from_text("x**2"), 4.0)
        self.assertEqual(wm.inverse_method, BISECTION)
        self.assertEqual(w_lambda(wm, 10.0), 5.0)

    def test_lambda_must_exceed_one(self):
        with self.assertRaises(ParameterError):
            WindowMap(u_function("identity"), 1.0)
        self.assertEqual(WindowMap(u_function("identity"), 2.0).with_lambda(3.0).lam, 3.0)

    def test_clamped_windows(self):
        starts, clamped = window_starts(window_for(c1(), 2.0), np.arange(4))
        # u(x) = x + 1: w(0) = -0.5 lies below the domain
        self.assertTrue(clamped[0])
        self.assertEqual(starts[0], -1)
        self.assertEqual(starts[3], 1)
        self.assertFalse(clamped[3])

    def test_window_for(self):
        with self.assertRaises(ParameterError):
            window_for(c1())
        with self.assertRaises(ParameterError):
            window_for(make_standard_method("abel"), 2.0)
        deferred = make_standard_method("deferred_cesaro", {"lambda": 3})
        self.assertEqual(window_for(deferred).lam, 3.0)


class TestMovingAverage(unittest.TestCase):
    def test_deferred_cesaro(self):
        method = make_standard_method("deferred_cesaro", {"lambda": 2})
        c = voronoi_moving_average(method, window_for(method), builtin("one"), 10)
        self.assertEqual(c.start, 1)
        self.assertEqual(c.values[1], 1.0)
        self.assertEqual(c.values[4], 0.5)

    def test_alternating_limits(self):
        for lam in (1.5, 2.0, 4.0):
            c = voronoi_moving_average(c1(), window_for(c1(), lam), builtin("alt01"), 2000)
            self.assertLess(abs(c.values[-1] - (1.0 - 1.0 / lam) / 2.0), 5e-3)

    def test_identity(self):
        residual = identity_residual(c1(), window_for(c1(), 3.0), builtin("alt_harmonic"), 500)
        self.assertLessEqual(residual, 1e-12)

    def test_lambda_class(self):
        early, late = lambda_class_deviation(u_function("identity"), 1000)
        self.assertLess(late, early)
        self.assertLess(late, 1e-2)
        _, late_exp = lambda_class_deviation(u_function_from_text("exp(x)"), 100)
        self.assertGreater(late_exp, 0.5)


class TestVerifiers(unittest.TestCase):
    def test_equivalence(self):
        windows = [window_for(c1(), lam) for lam in (2.0, 4.0)]
        report = thm5_equivalence_check(c1(), windows, builtin("alt01"), 2000, tol=5e-3)
        self.assertTrue(report.passed)
        self.assertTrue(report["mean_verdict"].converged_to(0.5, 5e-3))
        self.assertIn("c_lambda=2", report.series)
        self.assertTrue(report["moving_verdicts"][4.0].converged_to(0.375, 5e-3))

    def test_equivalence_needs_windows(self):
        with self.assertRaises(ParameterError):
            thm5_equivalence_check(c1(), [], builtin("alt01"), 100)

    def test_uniformity(self):
        report = thm6_uniformity_check(
            c1(), u_function("affine", c=1.0), builtin("alt01"), (1.5, 4.0), 6, 4000, s_limit=0.5
        )
        self.assertEqual(len(report["deviations"]), 3)
        self.assertLess(report["deviations"][2], 5e-3)
        self.assertEqual(len(report["lambdas"]), 6)

    def test_uniformity_arguments(self):
        u_fn = u_function("affine", c=1.0)
        with self.assertRaises(ParameterError):
            thm6_uniformity_check(c1(), u_fn, builtin("one"), (0.5, 2.0), 4, 100)
        with self.assertRaises(ParameterError):
            thm6_uniformity_check(c1(), u_fn, builtin("one"), (1.5, 2.0), 1, 100)

    def test_criterion(self):
        one = builtin("one")
        report = thm8_pi_criterion(one, one, one, u_function("affine", c=1.0), (1.5, 4.0, 2.0), 2000)
        self.assertTrue(report.passed)
        self.assertEqual(report["alphas"], (4.0, 2.0, 1.5))
        self.assertAlmostEqual(report["estimates"][-1], 1.0 / 3.0, delta=1e-2)
        with self.assertRaises(ParameterError):
            thm8_pi_criterion(one, one, one, u_function("identity"), (1.0,), 100)

    def test_discrete_and_continuous_agree(self):
        report = cor2_discrete_continuous_check(c1(), u_function("affine", c=1.0), builtin("alt01"), 2000, tol=1e-3)
        self.assertTrue(report.passed)
        self.assertEqual(len(report.series["x"]), 2000)


if __name__ == "__main__":
    unittest.main()
