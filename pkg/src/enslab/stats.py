"""Small statistics helpers for paired comparisons and reporting."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np


def sign_test_pvalue(a: Sequence[float], b: Sequence[float]) -> float:
    """Exact one-sided paired sign test for the alternative "a tends below b".

    With k = #{i: a_i < b_i} wins among the n untied pairs, returns
    P[Binomial(n, 1/2) >= k], the probability of at least k wins under the
    null of no systematic difference. Small values support a < b. Ties are
    dropped, the standard treatment; if every pair ties, returns 1.0.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("need two equal-length 1-D samples")
    if a.size == 0:
        raise ValueError("need at least one pair")
    wins = int(np.sum(a < b))
    n = int(np.sum(a != b))
    if n == 0:
        return 1.0
    total = sum(math.comb(n, j) for j in range(wins, n + 1))
    return total / 2.0**n


def mean_and_stderr(values: Sequence[float]) -> tuple[float, float]:
    """Sample mean and its standard error (0 for a single value)."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("need a non-empty 1-D sample")
    if arr.size == 1:
        return float(arr[0]), 0.0
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(arr.size))
