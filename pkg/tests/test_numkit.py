"""Kernel tests: factorizations, eigenvalues, Gaussian arithmetic, streams."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from enslab.numkit import (
    DimensionMismatch,
    GaussianBelief,
    NoConvergence,
    NotPositiveDefinite,
    RngStream,
    cholesky,
    draw_gaussian,
    gaussian_kl,
    solve_spd,
    sym_eigenvalues,
    sym_eigh,
)


def random_spd(rng, d, scale=1.0):
    a = rng.standard_normal((d, d))
    return scale * (a @ a.T + 0.5 * np.eye(d))


def random_symmetric(rng, d):
    a = rng.standard_normal((d, d))
    return (a + a.T) / 2.0


class TestCholesky:
    def test_identity(self):
        low = cholesky(np.eye(3))
        np.testing.assert_allclose(low, np.eye(3))

    def test_two_by_two(self):
        a = np.array([[2.0, 1.0], [1.0, 2.0]])
        low = cholesky(a)
        np.testing.assert_allclose(low @ low.T, a, rtol=1e-12)
        assert np.allclose(np.triu(low, 1), 0.0)

    @pytest.mark.parametrize("d", [1, 2, 5, 20, 100])
    def test_roundtrip_random(self, d):
        rng = np.random.default_rng(7 + d)
        a = random_spd(rng, d)
        low = cholesky(a)
        err = np.linalg.norm(low @ low.T - a) / np.linalg.norm(a)
        assert err < 1e-8

    def test_singular_rescued_by_jitter(self):
        # Rank-one PSD matrix: plain factorization fails, ladder succeeds.
        v = np.array([1.0, 2.0])
        a = np.outer(v, v)
        low = cholesky(a)
        assert np.linalg.norm(low @ low.T - a) < 1e-6

    def test_strict_mode_raises_on_singular(self):
        with pytest.raises(NotPositiveDefinite):
            cholesky(np.zeros((2, 2)), jitter=False)

    def test_indefinite_raises(self):
        with pytest.raises(NotPositiveDefinite):
            cholesky(np.array([[1.0, 0.0], [0.0, -1.0]]))

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            cholesky(np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_non_square_rejected(self):
        with pytest.raises(DimensionMismatch):
            cholesky(np.ones((2, 3)))


class TestSymEigenvalues:
    def test_diagonal(self):
        w = sym_eigenvalues(np.diag([3.0, 1.0, 2.0]))
        np.testing.assert_allclose(w, [1.0, 2.0, 3.0])

    def test_exchange_matrix(self):
        # Characteristic polynomial x^2 - 1.
        w = sym_eigenvalues(np.array([[0.0, 1.0], [1.0, 0.0]]))
        np.testing.assert_allclose(w, [-1.0, 1.0], atol=1e-12)

    def test_one_by_one(self):
        np.testing.assert_allclose(sym_eigenvalues(np.array([[4.0]])), [4.0])

    @pytest.mark.parametrize("d", [2, 5, 20, 50])
    def test_trace_and_det_invariants(self, d):
        rng = np.random.default_rng(d)
        a = random_symmetric(rng, d)
        w = sym_eigenvalues(a)
        assert np.all(np.diff(w) >= 0.0)
        np.testing.assert_allclose(w.sum(), np.trace(a), rtol=1e-10, atol=1e-10)
        sign, logdet = np.linalg.slogdet(a)
        if sign != 0:
            my_logdet = np.sum(np.log(np.abs(w)))
            np.testing.assert_allclose(my_logdet, logdet, rtol=1e-8)

    def test_eigenvectors_reconstruct(self):
        rng = np.random.default_rng(3)
        a = random_symmetric(rng, 8)
        w, v = sym_eigh(a)
        np.testing.assert_allclose(v @ np.diag(w) @ v.T, a, atol=1e-9)
        np.testing.assert_allclose(v.T @ v, np.eye(8), atol=1e-10)

    def test_no_convergence_with_zero_budget(self):
        with pytest.raises(NoConvergence):
            sym_eigenvalues(np.array([[0.0, 1.0], [1.0, 0.0]]), sweep_limit=0)

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=25, deadline=None)
    def test_spectrum_matches_reference_solver(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(1, 9))
        a = random_symmetric(rng, d)
        np.testing.assert_allclose(
            sym_eigenvalues(a), np.linalg.eigvalsh(a), atol=1e-9, rtol=1e-9
        )


class TestGaussianBelief:
    def test_zero_covariance_allowed(self):
        b = GaussianBelief(np.zeros(3), np.zeros((3, 3)))
        assert b.dim == 3

    def test_indefinite_covariance_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            GaussianBelief(np.zeros(2), np.diag([1.0, -1e-3]))

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(DimensionMismatch):
            GaussianBelief(np.zeros(3), np.eye(2))

    def test_asymmetric_covariance_rejected(self):
        with pytest.raises(ValueError):
            GaussianBelief(np.zeros(2), np.array([[1.0, 0.5], [0.0, 1.0]]))


class TestGaussianKl:
    def test_identical_is_zero(self):
        rng = np.random.default_rng(0)
        cov = random_spd(rng, 4)
        p = GaussianBelief(rng.standard_normal(4), cov)
        assert abs(gaussian_kl(p, p)) < 1e-10

    def test_scalar_variance_doubling(self):
        # KL(N(0,1) || N(0,2)) = 0.5*(ln 2 - 1 + 1/2)
        p = GaussianBelief(np.zeros(1), np.eye(1))
        q = GaussianBelief(np.zeros(1), 2.0 * np.eye(1))
        expected = 0.5 * (math.log(2.0) - 1.0 + 0.5)
        np.testing.assert_allclose(gaussian_kl(p, q), expected, rtol=1e-12)

    def test_scalar_mean_shift(self):
        # KL(N(1,1) || N(0,1)) = 1/2
        p = GaussianBelief(np.ones(1), np.eye(1))
        q = GaussianBelief(np.zeros(1), np.eye(1))
        np.testing.assert_allclose(gaussian_kl(p, q), 0.5, rtol=1e-12)

    def test_isotropic_mean_shift_general_dim(self):
        # Independent coordinates add: KL = sum of per-coordinate shifts.
        d = 5
        mu = np.full(d, 2.0)
        p = GaussianBelief(mu, np.eye(d))
        q = GaussianBelief(np.zeros(d), np.eye(d))
        np.testing.assert_allclose(gaussian_kl(p, q), d * 2.0, rtol=1e-12)

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=25, deadline=None)
    def test_nonnegative(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(1, 7))
        p = GaussianBelief(rng.standard_normal(d), random_spd(rng, d))
        q = GaussianBelief(rng.standard_normal(d), random_spd(rng, d))
        assert gaussian_kl(p, q) >= 0.0

    def test_singular_q_lenient_sentinel(self):
        p = GaussianBelief(np.zeros(2), np.eye(2))
        q = GaussianBelief(np.zeros(2), np.zeros((2, 2)))
        assert gaussian_kl(p, q, lenient=True) == math.inf

    def test_singular_q_strict_raises(self):
        p = GaussianBelief(np.zeros(2), np.eye(2))
        q = GaussianBelief(np.zeros(2), np.zeros((2, 2)))
        with pytest.raises(NotPositiveDefinite):
            gaussian_kl(p, q)

    def test_dimension_mismatch(self):
        p = GaussianBelief(np.zeros(2), np.eye(2))
        q = GaussianBelief(np.zeros(3), np.eye(3))
        with pytest.raises(DimensionMismatch):
            gaussian_kl(p, q)


class TestDrawGaussian:
    def test_zero_covariance_gives_exact_copies(self):
        mu = np.array([1.5, -2.0, 0.0])
        b = GaussianBelief(mu, np.zeros((3, 3)))
        samples = draw_gaussian(RngStream(1), b, 5)
        assert samples.shape == (5, 3)
        assert np.array_equal(samples, np.tile(mu, (5, 1)))

    def test_same_stream_reproduces(self):
        b = GaussianBelief(np.zeros(4), np.eye(4))
        s = RngStream(9, 3)
        a = draw_gaussian(s, b, 10)
        bb = draw_gaussian(s, b, 10)
        assert np.array_equal(a, bb)

    def test_distinct_streams_differ(self):
        b = GaussianBelief(np.zeros(4), np.eye(4))
        a = draw_gaussian(RngStream(9, 0), b, 10)
        c = draw_gaussian(RngStream(9, 1), b, 10)
        assert not np.array_equal(a, c)

    def test_moments_match_belief(self):
        rng = np.random.default_rng(5)
        cov = random_spd(rng, 3)
        mu = rng.standard_normal(3)
        b = GaussianBelief(mu, cov)
        n = 200_000
        samples = draw_gaussian(RngStream(77), b, n)
        se_mean = np.sqrt(np.diag(cov) / n)
        assert np.all(np.abs(samples.mean(axis=0) - mu) < 5 * se_mean)
        emp_cov = np.cov(samples.T)
        assert np.linalg.norm(emp_cov - cov) / np.linalg.norm(cov) < 0.02

    def test_singular_but_nonzero_covariance(self):
        # Samples stay on the line spanned by v.
        v = np.array([1.0, 1.0]) / math.sqrt(2.0)
        b = GaussianBelief(np.zeros(2), np.outer(v, v))
        samples = draw_gaussian(RngStream(4), b, 1000)
        residual = samples - np.outer(samples @ v, v)
        assert np.abs(residual).max() < 1e-9


class TestRngStream:
    def test_generator_deterministic(self):
        a = RngStream(123, 456).generator().standard_normal(8)
        b = RngStream(123, 456).generator().standard_normal(8)
        assert np.array_equal(a, b)

    def test_substream_changes_sequence(self):
        base = RngStream(123)
        a = base.generator().standard_normal(8)
        b = base.substream(1).generator().standard_normal(8)
        assert not np.array_equal(a, b)

    def test_substream_tags_order_sensitive(self):
        base = RngStream(0)
        assert base.substream(1, 2) != base.substream(2, 1)

    def test_string_tags_stable(self):
        assert RngStream(5).substream("dataset").stream_id == RngStream(
            5
        ).substream("dataset").stream_id

    def test_seed_changes_everything(self):
        a = RngStream(1, 7).generator().standard_normal(4)
        b = RngStream(2, 7).generator().standard_normal(4)
        assert not np.array_equal(a, b)

    def test_substreams_look_independent(self):
        # Correlation between sibling streams should be at noise level.
        base = RngStream(2024)
        n = 20_000
        x = base.substream("x").generator().standard_normal(n)
        y = base.substream("y").generator().standard_normal(n)
        corr = float(np.corrcoef(x, y)[0, 1])
        assert abs(corr) < 4.0 / math.sqrt(n)
