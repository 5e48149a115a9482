import unittest
from unittest import mock

from voronoi_means import selftest
from voronoi_means.errors import ConvergenceError
from voronoi_means.selftest import INVARIANTS, run_selftest


class TestSelftest(unittest.TestCase):
    def test_all_invariants_hold(self):
        report = run_selftest()
        self.assertEqual(len(report.checks), len(INVARIANTS))
        self.assertEqual(len(report.checks), 13)
        for check in report.checks:
            self.assertEqual(check.role, "invariant")
            self.assertTrue(check.ok, check.name)
        self.assertTrue(report.passed)

    def test_errors_become_failed_checks(self):
        def broken():
            raise ConvergenceError("no limit")

        with mock.patch.object(selftest, "INVARIANTS", [("broken", broken)]):
            report = run_selftest()
        self.assertFalse(report.passed)
        self.assertEqual(report.check("broken").detail, "no limit")
        self.assertIsNone(report.check("broken").value)


if __name__ == "__main__":
    unittest.main()
