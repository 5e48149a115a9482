import math
import unittest

import numpy as np

from voronoi_means.classical import (
    R1_MEAN,
    R1_MEAN_PRINTED,
    R1_SERIES,
    default_h_grid,
    default_riemann_horizon,
    ingham_limit,
    ingham_transform,
    riemann_limit,
    riemann_transform,
)
from voronoi_means.errors import ParameterError
from voronoi_means.sequences import builtin


class TestIngham(unittest.TestCase):
    def test_single_term(self):
        s = builtin("single", index=1)
        for x in (1.0, 7.5, 10.0, 1000.0):
            self.assertEqual(ingham_transform(s, x), math.floor(x) / x)

    def test_second_term(self):
        self.assertAlmostEqual(ingham_transform(builtin("single", index=2), 9.0), 2.0 * 4.0 / 9.0)

    def test_zeroth_term_is_ignored(self):
        self.assertEqual(ingham_transform(builtin("delta"), 50.0), 0.0)

    def test_limit(self):
        report = ingham_limit(builtin("single", index=1), [10.0, 100.0, 1000.0, 10_000.0])
        self.assertTrue(report.passed)
        self.assertTrue(report["verdict"].converged_to(1.0))
        np.testing.assert_array_equal(report.series["value"], np.ones(4))

    def test_arguments(self):
        with self.assertRaises(ParameterError):
            ingham_transform(builtin("one"), 0.5)
        with self.assertRaises(ParameterError):
            ingham_limit(builtin("one"), [10.0])
        with self.assertRaises(ParameterError):
            ingham_limit(builtin("one"), [10.0, 5.0])


class TestRiemann(unittest.TestCase):
    def test_single_term(self):
        s = builtin("single", index=1)
        for h in (0.5, 0.25, 0.01):
            value = riemann_transform(s, h, R1_SERIES, N=64)
            self.assertAlmostEqual(value.value, math.sin(h) / h, places=14)
            self.assertTrue(value.controllable)
        self.assertAlmostEqual(riemann_transform(s, 0.25, R1_MEAN, N=64).value, 2.0 / math.pi * math.sin(0.25))
        self.assertAlmostEqual(
            riemann_transform(s, 0.25, R1_MEAN_PRINTED, N=64).value, 2.0 / math.pi * math.sin(0.25) / 0.25
        )

    def test_alternating_series(self):
        value = riemann_transform(builtin("alt_sign"), 0.1, R1_SERIES, horizon_factor=10_000.0)
        self.assertAlmostEqual(value.value, 0.5, delta=1e-3)

    def test_growing_input_is_not_controllable(self):
        value = riemann_transform(builtin("alt_growth"), 0.1, R1_SERIES)
        self.assertFalse(value.controllable)
        self.assertTrue(math.isinf(value.tail_bound))

    def test_limit(self):
        report = riemann_limit(builtin("single", index=1))
        self.assertTrue(report.passed)
        self.assertTrue(report["verdict"].converged_to(1.0, 1e-2))
        np.testing.assert_array_equal(report.series["h"], default_h_grid())

    def test_horizon(self):
        self.assertEqual(default_riemann_horizon(0.25), 400)
        self.assertEqual(default_riemann_horizon(0.3, 10.0), 34)

    def test_arguments(self):
        s = builtin("one")
        with self.assertRaises(ParameterError):
            riemann_transform(s, 0.0)
        with self.assertRaises(ParameterError):
            riemann_transform(s, 0.1, "R2")
        with self.assertRaises(ParameterError):
            riemann_transform(s, 0.1, N=1)


if __name__ == "__main__":
    unittest.main()
