import math
import unittest
from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from voronoi_means.convolution import (
    cauchy_convolve,
    diff_sequence,
    partial_sum_U,
    partial_sums_U,
    voronoi_convolve,
    voronoi_qs,
)
from voronoi_means.errors import ParameterError
from voronoi_means.sequences import Prefix, builtin, values

rationals = st.fractions(min_value=-10, max_value=10, max_denominator=12)
prefixes = st.lists(rationals, min_size=1, max_size=40).map(lambda xs: Prefix(tuple(float(x) for x in xs)))


def direct_cauchy(p, q, N):
    pv, qv = values(p, N), values(q, N)
    return np.array([sum(pv[n - k] * qv[k] for k in range(n + 1)) for n in range(N + 1)])


class TestConvolution(unittest.TestCase):
    @given(prefixes, prefixes, st.integers(0, 60))
    @settings(max_examples=60, deadline=None)
    def test_telescoping(self, p, q, N):
        np.testing.assert_allclose(
            np.cumsum(voronoi_convolve(p, q, N)), cauchy_convolve(p, q, N), rtol=0, atol=1e-9
        )

    @given(prefixes, prefixes, st.integers(0, 40))
    @settings(max_examples=40, deadline=None)
    def test_commutative(self, p, q, N):
        np.testing.assert_allclose(cauchy_convolve(p, q, N), cauchy_convolve(q, p, N), atol=1e-9)

    @given(prefixes, prefixes, prefixes, st.floats(-3, 3), st.integers(0, 30))
    @settings(max_examples=40, deadline=None)
    def test_linear_in_q(self, p, q1, q2, a, N):
        combined = a * values(q1, N) + values(q2, N)
        lhs = voronoi_convolve(p, combined, N)
        rhs = a * voronoi_convolve(p, q1, N) + voronoi_convolve(p, q2, N)
        np.testing.assert_allclose(lhs, rhs, atol=1e-8)

    def test_matches_direct_sum(self):
        p, q = builtin("harmonic"), builtin("alt_sign")
        np.testing.assert_allclose(cauchy_convolve(p, q, 50), direct_cauchy(p, q, 50), atol=1e-13)

    def test_exact_rational_oracle(self):
        p = [Fraction(1, k + 1) for k in range(12)]
        q = [Fraction((-1) ** k, 2**k) for k in range(12)]
        exact = [sum(p[n - k] * q[k] for k in range(n + 1)) for n in range(12)]
        got = cauchy_convolve(Prefix(tuple(map(float, p))), Prefix(tuple(map(float, q))), 11)
        np.testing.assert_allclose(got, [float(x) for x in exact], rtol=1e-14)

    def test_euler_identity(self):
        w = builtin("euler_weight", r=0.5)
        n = np.arange(31)
        expected = np.array([1.0 / math.factorial(int(k)) for k in n])
        np.testing.assert_allclose(cauchy_convolve(w, w, 30), expected, rtol=1e-12)

    def test_first_term(self):
        p, q = Prefix((3.0, 1.0)), Prefix((2.0, 5.0))
        self.assertEqual(voronoi_convolve(p, q, 1)[0], 6.0)

    def test_one_with_q_is_q(self):
        q = builtin("harmonic")
        np.testing.assert_array_equal(voronoi_convolve(builtin("one"), q, 10), values(q, 10))

    def test_negative_horizon(self):
        with self.assertRaises(ParameterError):
            cauchy_convolve(builtin("one"), builtin("one"), -1)


class TestPartialSums(unittest.TestCase):
    def test_cesaro_partial_sums(self):
        one = builtin("one")
        U = partial_sums_U(one, one, builtin("alt01"), 9)
        np.testing.assert_array_equal(U, [1, 1, 2, 2, 3, 3, 4, 4, 5, 5])

    def test_partial_sum_at_real_x(self):
        one = builtin("one")
        self.assertEqual(partial_sum_U(one, one, one, 4.7), 5.0)
        with self.assertRaises(ParameterError):
            partial_sum_U(one, one, one, -0.5)

    def test_voronoi_qs_sums_to_U(self):
        p, q, s = builtin("harmonic"), builtin("linear"), builtin("alt_sign")
        np.testing.assert_allclose(np.cumsum(voronoi_qs(p, q, s, 40)), partial_sums_U(p, q, s, 40), atol=1e-11)

    def test_diff_sequence(self):
        pair = diff_sequence(builtin("square"), 5)
        base, diff = pair.values(5)
        np.testing.assert_array_equal(np.cumsum(diff), base)


if __name__ == "__main__":
    unittest.main()
