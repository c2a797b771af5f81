"""Exact sign-test and summary-statistic checks."""

import math

import numpy as np
import pytest

from enslab.stats import mean_and_stderr, sign_test_pvalue


class TestSignTest:
    def test_all_wins(self):
        p = sign_test_pvalue([1, 1, 1, 1, 1], [2, 2, 2, 2, 2])
        assert p == pytest.approx(1 / 32)

    def test_no_wins(self):
        assert sign_test_pvalue([2, 2, 2], [1, 1, 1]) == 1.0

    def test_hand_binomial_tail(self):
        # 4 wins of 5 untied pairs: (C(5,4) + C(5,5)) / 2^5 = 6/32.
        a = [0.0, 0.0, 0.0, 0.0, 5.0]
        b = [1.0, 1.0, 1.0, 1.0, 1.0]
        assert sign_test_pvalue(a, b) == pytest.approx(6 / 32)

    def test_ties_dropped(self):
        a = [1.0, 1.0, 0.0, 0.0]
        b = [1.0, 1.0, 1.0, 1.0]
        assert sign_test_pvalue(a, b) == pytest.approx(1 / 4)

    def test_all_ties_is_one(self):
        assert sign_test_pvalue([1.0, 2.0], [1.0, 2.0]) == 1.0

    def test_balanced_is_large(self):
        a = np.arange(10, dtype=float)
        b = a + np.where(np.arange(10) % 2 == 0, 1.0, -1.0)
        assert sign_test_pvalue(a, b) > 0.3

    def test_null_distribution_calibration(self):
        # Under exchangeable pairs, P[p <= 0.05] should be at most ~0.05.
        gen = np.random.default_rng(0)
        hits = 0
        trials = 400
        for _ in range(trials):
            a = gen.standard_normal(30)
            b = gen.standard_normal(30)
            hits += sign_test_pvalue(a, b) <= 0.05
        assert hits / trials < 0.09

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            sign_test_pvalue([1.0], [1.0, 2.0])
        with pytest.raises(ValueError):
            sign_test_pvalue([], [])


class TestMeanAndStderr:
    def test_hand_case(self):
        mean, se = mean_and_stderr([1.0, 2.0, 3.0])
        assert mean == pytest.approx(2.0)
        assert se == pytest.approx(1.0 / math.sqrt(3))

    def test_single_value(self):
        assert mean_and_stderr([4.2]) == (4.2, 0.0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            mean_and_stderr([])
