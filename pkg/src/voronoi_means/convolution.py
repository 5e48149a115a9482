"""
Cauchy and Voronoi convolutions, difference sequences and the partial-sum
function U(x).

The direct O(N^2) sum is the reference. ``np.convolve`` evaluates exactly that
sum; the only shortcuts taken are the exact identities p = 1 (a cumulative
sum) and p = delta (the other factor itself).
"""
import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import ParameterError, SequenceError
from .sequences import (
    Difference,
    SequenceLike,
    SequenceSpec,
    is_constant_one,
    is_unit_impulse,
    values,
)

log = logging.getLogger(__name__)


def _finite(arr: np.ndarray, what: str) -> np.ndarray:
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise SequenceError(f"{what}: non-finite term at n={int(bad[0])}")
    return arr


def cauchy_prefix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a * b)_n for n < len(a), by the defining sum."""
    n = len(a)
    return np.convolve(a, b[:n])[:n]


def cauchy_convolve(p: SequenceLike, q: SequenceLike, N: int) -> np.ndarray:
    """(p * q)_n = sum_{k<=n} p_{n-k} q_k for n = 0..N."""
    if N < 0:
        raise ParameterError(f"N must be >= 0, got {N}")
    if is_constant_one(p):
        out = np.cumsum(values(q, N))
    elif is_constant_one(q):
        out = np.cumsum(values(p, N))
    elif is_unit_impulse(p):
        out = np.array(values(q, N), dtype=float)
    elif is_unit_impulse(q):
        out = np.array(values(p, N), dtype=float)
    else:
        out = cauchy_prefix(values(p, N), values(q, N))
    return _finite(out, "cauchy convolution")


def voronoi_convolve(p: SequenceLike, q: SequenceLike, N: int) -> np.ndarray:
    """(p o q)_0 = p_0 q_0, (p o q)_n = (p * q)_n - (p * q)_{n-1}."""
    if N < 0:
        raise ParameterError(f"N must be >= 0, got {N}")
    if is_constant_one(p):
        # (1 * q)_n - (1 * q)_{n-1} = q_n exactly
        return _finite(np.array(values(q, N), dtype=float), "voronoi convolution")
    return np.diff(cauchy_convolve(p, q, N), prepend=0.0)


def weighted(q: SequenceLike, s: SequenceLike, N: int) -> np.ndarray:
    """The pointwise product q_n s_n."""
    return values(q, N) * values(s, N)


def voronoi_qs(p: SequenceLike, q: SequenceLike, s: SequenceLike, N: int) -> np.ndarray:
    """(p o qs)_n: Voronoi convolution of p with the pre-multiplied q_n s_n."""
    return voronoi_convolve(p, weighted(q, s, N), N)


def partial_sums_U(p: SequenceLike, q: SequenceLike, s: SequenceLike, N: int) -> np.ndarray:
    """U(n) = sum_{k<=n} (p o qs)_k = (p * qs)_n for n = 0..N."""
    return cauchy_convolve(p, weighted(q, s, N), N)


def partial_sum_U(p: SequenceLike, q: SequenceLike, s: SequenceLike, x: float) -> float:
    """U(x) = sum_{0<=k<=x} (p o qs)_k."""
    if x < 0:
        raise ParameterError(f"U(x) needs x >= 0, got {x}")
    n = int(math.floor(x))
    return float(partial_sums_U(p, q, s, n)[n])


@dataclass(frozen=True)
class DiffPair:
    """A base sequence (u or q) with its difference sequence (v or m)."""

    base: SequenceSpec
    diff: SequenceSpec

    def values(self, N: int) -> Tuple[np.ndarray, np.ndarray]:
        return values(self.base, N), values(self.diff, N)


def diff_sequence(base: SequenceSpec, N: int) -> DiffPair:
    """The pair (base, diff) with diff_0 = base_0 and diff_n = base_n - base_{n-1}.

    The difference is evaluated up to N once so evaluation errors surface here.
    """
    if N < 0:
        raise ParameterError(f"N must be >= 0, got {N}")
    pair = DiffPair(base, Difference(base))
    values(pair.diff, N)
    return pair
