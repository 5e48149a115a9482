import os
import tempfile
import unittest

from click.testing import CliRunner

from voronoi_means.cli import cli, run


class CliTestCase(unittest.TestCase):
    def setUp(self):
        self.runner = CliRunner()
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = self._tmp.name

    def tearDown(self):
        self._tmp.cleanup()

    def invoke(self, *args):
        return self.runner.invoke(cli, list(args), catch_exceptions=False)

    def invoke_to_file(self, *args, name="out.csv"):
        path = os.path.join(self.tmp, name)
        result = self.invoke(*args, "--out", path)
        text = None
        if os.path.exists(path):
            with open(path) as f:
                text = f.read()
        return result, text


class TestConvolve(CliTestCase):
    def test_voronoi_to_stdout(self):
        result = self.invoke("convolve", "--n", "5")
        self.assertEqual(result.exit_code, 0)
        self.assertTrue(result.output.startswith("n,value\n0,1\n"))
        self.assertIn("5,1\n", result.output)

    def test_cauchy_to_file(self):
        result, text = self.invoke_to_file("convolve", "--kind", "cauchy", "--n", "5")
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(text.splitlines(), ["n,value", "0,1", "1,2", "2,3", "3,4", "4,5", "5,6"])
        self.assertNotIn("n,value", result.output)
        self.assertEqual(os.listdir(self.tmp), ["out.csv"])


class TestMean(CliTestCase):
    def test_cesaro_mean(self):
        result, text = self.invoke_to_file("mean", "-m", "cesaro_c1", "-s", "alt01", "--n", "2000", "--tol", "1e-3")
        self.assertEqual(result.exit_code, 0)
        lines = text.splitlines()
        self.assertEqual(lines[0], "n,t")
        self.assertEqual(len(lines), 2002)
        self.assertEqual(lines[1], "0,1")

    def test_explicit_triple(self):
        result, text = self.invoke_to_file("mean", "--p", "one", "--q", "one", "--u", "linear", "-s", "alt01", "--n", "10")
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(text.splitlines()[2], "1,0.5")

    def test_limitation_needs_limit(self):
        result = self.invoke("mean", "-m", "cesaro_c1", "--check", "limitation")
        self.assertEqual(result.exit_code, 1)
        self.assertIn("--limit", result.output)

    def test_method_and_triple_conflict(self):
        result = self.invoke("mean", "-m", "cesaro_c1", "--p", "one")
        self.assertEqual(result.exit_code, 1)

    def test_bad_parameter(self):
        result = self.invoke("mean", "-m", "euler", "--param", "p=2")
        self.assertEqual(result.exit_code, 1)
        result = self.invoke("mean", "-m", "euler", "--param", "p")
        self.assertEqual(result.exit_code, 1)


class TestRegularity(CliTestCase):
    def test_regular_method(self):
        result, text = self.invoke_to_file("regularity", "-m", "cesaro_c1", "--n", "10000")
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(text.splitlines()[0], "n,cond_i_ratio,cond_iii_sum")
        self.assertIn("PASSED", result.output)

    def test_non_regular_triple(self):
        result, _ = self.invoke_to_file("regularity", "--p", "one", "--q", "one", "--u", "sq(n+1)", "--n", "10000")
        self.assertEqual(result.exit_code, 2)
        self.assertIn("FAILED", result.output)


class TestOtherCommands(CliTestCase):
    def test_pseries_grid(self):
        result, text = self.invoke_to_file("pseries", "-m", "abel", "-s", "alt01", "--x", "0.5", "--x", "0.9")
        self.assertEqual(result.exit_code, 0)
        lines = text.splitlines()
        self.assertEqual(lines[0], "x,T,tail_bound")
        self.assertEqual(len(lines), 3)
        self.assertTrue(lines[1].startswith("0.5,"))

    def test_moving_long_format(self):
        result, text = self.invoke_to_file(
            "moving", "-m", "cesaro_c1", "-s", "alt01", "--n", "200", "--lambda", "2", "--lambda", "4"
        )
        self.assertIn(result.exit_code, (0, 2))
        lines = text.splitlines()
        self.assertEqual(lines[0], "n,lambda,c,target")
        self.assertEqual(len(lines), 1 + 2 * 201)

    def test_moving_needs_window(self):
        result = self.invoke("moving", "-m", "euler", "--n", "50")
        self.assertEqual(result.exit_code, 1)
        self.assertIn("--u-fn", result.output)

    def test_ingham(self):
        result, text = self.invoke_to_file("extras", "--variant", "ingham", "-s", "single(index=1)")
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(text.splitlines(), ["x,value", "10,1", "100,1", "1000,1", "10000,1"])

    def test_inclusion_needs_targets(self):
        result = self.invoke("inclusion", "--q", "one", "--u", "linear")
        self.assertEqual(result.exit_code, 1)

    def test_lln_null_distribution(self):
        result, text = self.invoke_to_file(
            "lln", "--distribution", "zero", "--n", "1000", "--seed", "1", "--seed", "2", "--workers", "1"
        )
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(text.splitlines(), ["seed,statistic,exceedance", "1,0,0", "2,0,0"])

    def test_selftest(self):
        result, text = self.invoke_to_file("selftest")
        self.assertEqual(result.exit_code, 0)
        lines = text.splitlines()
        self.assertEqual(lines[0], "invariant,ok,value")
        self.assertEqual(len(lines), 14)


class TestConfiguration(CliTestCase):
    def test_dump_config(self):
        result = self.invoke("dump-config")
        self.assertEqual(result.exit_code, 0)
        self.assertIn("window_fraction", result.output)

    def test_config_file_overrides(self):
        path = os.path.join(self.tmp, "extra.yaml")
        with open(path, "w") as f:
            f.write("detect:\n  window_fraction: 0.375\n")
        result = self.invoke("--config", path, "dump-config")
        self.assertEqual(result.exit_code, 0)
        self.assertIn("0.375", result.output)

    def test_missing_config_file(self):
        result = self.invoke("--config", os.path.join(self.tmp, "missing.yaml"), "dump-config")
        self.assertEqual(result.exit_code, 1)
        self.assertIn("config file not found", result.output)


class TestRun(unittest.TestCase):
    def test_exit_codes(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = os.path.join(tmp, "c.csv")
            self.assertEqual(run(["convolve", "--n", "3", "--out", out]), 0)
            self.assertEqual(run(["mean", "--method", "cesaro_c1", "--p", "one"]), 1)
            self.assertEqual(run(["mean", "--no-such-option"]), 1)
            self.assertEqual(run(["regularity", "--p", "one", "--q", "one", "--u", "square", "--out", out]), 2)


if __name__ == "__main__":
    unittest.main()
