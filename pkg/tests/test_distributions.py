import unittest

import numpy as np

from voronoi_means.distributions import (
    CLOSED_FORM,
    EMPIRICAL,
    QUADRATURE,
    DistributionSpec,
    TruncatedMeanTable,
    degenerate,
    distribution,
    distribution_from_config,
    parse_distribution,
    sample_path,
    sample_paths,
    truncated_means,
)
from voronoi_means.errors import ParameterError
from voronoi_means.phi import make_phi


class TestSpecs(unittest.TestCase):
    def test_parse(self):
        dist = parse_distribution("cauchy(loc=0,scale=2)", seed=3)
        self.assertEqual(dist.param_dict, {"loc": 0.0, "scale": 2.0})
        self.assertEqual(dist.seed, 3)
        self.assertTrue(dist.symmetric)
        self.assertFalse(dist.finite_mean)
        self.assertEqual(dist.describe(), "cauchy(loc=0,scale=2)")
        self.assertEqual(parse_distribution("zero"), degenerate(0.0))

    def test_config_entries(self):
        self.assertEqual(distribution_from_config("normal", seed=5), distribution("normal", 5))
        dist = distribution_from_config({"family": "pareto", "params": {"alpha": 1.0}, "seed": 9})
        self.assertEqual(dist.seed, 9)
        self.assertFalse(dist.finite_mean)
        table = distribution_from_config({"family": "user_table", "values": [1, -1], "probs": [0.25, 0.75]})
        self.assertEqual(table.describe(), "user_table(1:0.25,-1:0.75)")

    def test_rejections(self):
        with self.assertRaises(ParameterError):
            distribution("gamma")
        with self.assertRaises(ParameterError):
            distribution("normal", rate=2.0)
        with self.assertRaises(ParameterError):
            distribution("normal", sigma=0.0)
        with self.assertRaises(ParameterError):
            distribution("two_point", p=1.5)
        with self.assertRaises(ParameterError):
            distribution("normal", seed=-1)
        with self.assertRaises(ParameterError):
            DistributionSpec("user_table", table=((1.0, 0.5), (2.0, 0.4)))
        with self.assertRaises(ParameterError):
            parse_distribution("normal[2]")
        with self.assertRaises(ParameterError):
            distribution_from_config({"params": {}})

    def test_symmetry(self):
        self.assertTrue(distribution("two_point").symmetric)
        self.assertFalse(distribution("two_point", p=0.25).symmetric)
        self.assertTrue(degenerate(0.0).symmetric)
        self.assertFalse(distribution("normal", mu=1.0).symmetric)


class TestSampling(unittest.TestCase):
    def test_degenerate(self):
        np.testing.assert_array_equal(sample_path(degenerate(0.0), 100), np.zeros(101))
        np.testing.assert_array_equal(sample_path(degenerate(2.5), 10), np.full(11, 2.5))

    def test_paths_are_reproducible_prefixes(self):
        dist = distribution("normal", seed=42)
        long = sample_path(dist, 1000, stream=3)
        np.testing.assert_array_equal(sample_path(dist, 100, stream=3), long[:101])
        np.testing.assert_array_equal(sample_path(dist, 1000, stream=3), long)
        self.assertFalse(np.array_equal(sample_path(dist, 1000, stream=4), long))
        self.assertFalse(np.array_equal(sample_path(dist.with_seed(43), 1000, stream=3), long))

    def test_sample_paths(self):
        dist = distribution("cauchy", seed=1)
        paths = sample_paths(dist, 50, 3)
        self.assertEqual(paths.shape, (3, 51))
        np.testing.assert_array_equal(paths[1], sample_path(dist, 50, stream=2))

    def test_samples_are_finite(self):
        for dist in (distribution("normal"), distribution("cauchy"), distribution("pareto", alpha=0.5)):
            self.assertTrue(np.all(np.isfinite(sample_path(dist, 10_000))))

    def test_table_support(self):
        dist = distribution_from_config({"family": "user_table", "values": [1, -1], "probs": [0.25, 0.75]})
        path = sample_path(dist, 4000)
        self.assertEqual(set(np.unique(path)), {-1.0, 1.0})
        self.assertAlmostEqual(float(np.mean(path == 1.0)), 0.25, delta=0.03)

    def test_negative_horizon(self):
        with self.assertRaises(ParameterError):
            sample_path(distribution("normal"), -1)


class TestTruncatedMeans(unittest.TestCase):
    def test_symmetric_is_zero(self):
        for dist in (distribution("normal"), distribution("cauchy"), distribution("two_point")):
            table = truncated_means(dist, make_phi("linear"), 20)
            np.testing.assert_allclose(table.values, 0.0, atol=1e-15)

    def test_closed_form_matches_quadrature(self):
        phi = make_phi("linear")
        for dist in (distribution("normal", mu=0.5, sigma=2.0), distribution("cauchy", loc=1.0)):
            closed = truncated_means(dist, phi, 30, CLOSED_FORM).values
            quad = truncated_means(dist, phi, 30, QUADRATURE).values
            np.testing.assert_allclose(closed, quad, atol=1e-8)

    def test_pareto(self):
        table = truncated_means(distribution("pareto", alpha=2.0), make_phi("linear"), 3)
        np.testing.assert_allclose(table.values, [0.0, 1.0, 4.0 / 3.0, 1.5])

    def test_two_point(self):
        dist = distribution("two_point", a=3.0, b=-1.0, p=0.5)
        table = truncated_means(dist, make_phi("linear"), 3)
        np.testing.assert_allclose(table.values, [-0.5, -0.5, 1.0, 1.0])

    def test_empirical(self):
        dist = distribution("normal", mu=1.0)
        table = truncated_means(dist, make_phi("linear"), 10, EMPIRICAL, samples=100_000)
        self.assertEqual(table.samples, 100_000)
        closed = truncated_means(dist, make_phi("linear"), 10).values
        np.testing.assert_allclose(table.values, closed, atol=0.02)

    def test_errors(self):
        with self.assertRaises(ParameterError):
            truncated_means(distribution("normal"), make_phi("linear"), 5, "bootstrap")
        with self.assertRaises(ParameterError):
            truncated_means(distribution("two_point"), make_phi("linear"), 5, QUADRATURE)

    def test_shifted(self):
        table = TruncatedMeanTable(np.arange(10.0), CLOSED_FORM)
        np.testing.assert_array_equal(table.shifted(2, 3), [3.0, 4.0, 5.0])
        with self.assertRaises(ParameterError):
            table.shifted(5, 5)


if __name__ == "__main__":
    unittest.main()
