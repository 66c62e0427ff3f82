import numpy as np
import pytest

from marfit import (
    BandSpec,
    BandedDesign,
    NoiseSpec,
    SparseDesign,
    StationarityError,
    MarCoefficients,
    gen_banded_coeffs,
    gen_sparse_coeffs,
    kron,
    simulate,
    spectral_radius,
    vec,
)


class TestBandedGeneration:
    def test_zero_pattern_and_rho(self):
        truth = gen_banded_coeffs(BandedDesign(6, 4, BandSpec(2, 1), 0.5), seed=7)
        i, j = np.indices((6, 6))
        assert np.all(truth.A[np.abs(i - j) > 2] == 0.0)
        assert np.all(truth.A[np.abs(i - j) <= 2] != 0.0)
        i, j = np.indices((4, 4))
        assert np.all(truth.B[np.abs(i - j) > 1] == 0.0)
        assert spectral_radius(truth.A) * spectral_radius(truth.B) == pytest.approx(0.5, abs=1e-8)
        assert np.linalg.norm(truth.A, "fro") == pytest.approx(1.0, abs=1e-10)
        assert np.trace(truth.A) >= 0

    def test_zero_bandwidth_is_diagonal(self):
        truth = gen_banded_coeffs(BandedDesign(5, 3, BandSpec(0, 0), 0.4), seed=1)
        assert np.all(truth.A[~np.eye(5, dtype=bool)] == 0.0)

    def test_deterministic_given_seed(self):
        a = gen_banded_coeffs(BandedDesign(6, 4, BandSpec(1, 1), 0.5), seed=3)
        b = gen_banded_coeffs(BandedDesign(6, 4, BandSpec(1, 1), 0.5), seed=3)
        np.testing.assert_array_equal(a.A, b.A)
        np.testing.assert_array_equal(a.B, b.B)


class TestSparseGeneration:
    def test_row_nonzero_counts(self):
        truth = gen_sparse_coeffs(SparseDesign(6, 4, 0.3, 0.3, 0.9), seed=5)
        assert np.all((truth.A != 0).sum(axis=1) == int(0.3 * 6))
        assert np.all((truth.B != 0).sum(axis=1) == int(0.3 * 4))

    def test_full_density(self):
        truth = gen_sparse_coeffs(SparseDesign(5, 3, 1.0, 1.0, 0.5), seed=2)
        assert np.all(truth.A != 0)

    def test_rho_target(self):
        truth = gen_sparse_coeffs(SparseDesign(6, 4, 0.4, 0.4, 0.9), seed=9)
        assert spectral_radius(truth.A) * spectral_radius(truth.B) == pytest.approx(0.9, abs=1e-8)
        assert np.linalg.norm(truth.A, "fro") == pytest.approx(1.0, abs=1e-10)

    def test_design_validation(self):
        with pytest.raises(ValueError):
            SparseDesign(6, 4, 0.1, 0.3, 0.9)  # floor(0.1*6) = 0
        with pytest.raises(ValueError):
            SparseDesign(6, 4, 0.3, 0.3, 1.5)


class TestSimulate:
    def test_pure_noise_covariance(self):
        coeffs = MarCoefficients(A=np.zeros((2, 2)), B=np.eye(2))
        s = simulate(coeffs, NoiseSpec(), T=20_000, burn_in=10, seed=0)
        ys = np.stack([vec(Y) for Y in s.data])
        cov = np.cov(ys.T)
        np.testing.assert_allclose(cov, np.eye(4), atol=0.05)

    def test_zero_noise_fixed_point(self):
        coeffs = MarCoefficients(A=0.5 * np.eye(2), B=0.5 * np.eye(3))
        s = simulate(coeffs, NoiseSpec(scale=0.0), T=10, burn_in=5, seed=0)
        np.testing.assert_array_equal(s.data, np.zeros((10, 2, 3)))

    def test_lag_one_cross_moment(self):
        # stationary Yule-Walker relation: E[y_t y_{t-1}'] = (B (x) A) Var(y_t)
        rng = np.random.default_rng(12)
        A = 0.6 * np.eye(2) + 0.1 * rng.standard_normal((2, 2))
        B = 0.6 * np.eye(2) + 0.1 * rng.standard_normal((2, 2))
        coeffs = MarCoefficients(A=A, B=B)
        assert spectral_radius(A) * spectral_radius(B) < 1
        s = simulate(coeffs, NoiseSpec(), T=50_000, burn_in=200, seed=4)
        ys = np.stack([vec(Y) for Y in s.data])
        gamma0 = ys.T @ ys / len(ys)
        gamma1 = ys[1:].T @ ys[:-1] / (len(ys) - 1)
        np.testing.assert_allclose(gamma1, kron(B, A) @ gamma0, atol=0.05)

    def test_deterministic(self):
        coeffs = MarCoefficients(A=0.5 * np.eye(2), B=0.5 * np.eye(2))
        a = simulate(coeffs, NoiseSpec(), T=50, seed=8)
        b = simulate(coeffs, NoiseSpec(), T=50, seed=8)
        np.testing.assert_array_equal(a.data, b.data)

    def test_nonstationary_rejected(self):
        coeffs = MarCoefficients(A=np.eye(2), B=np.eye(2))
        with pytest.raises(StationarityError):
            simulate(coeffs, NoiseSpec(), T=10, seed=0)

    def test_noise_spec_validation(self):
        with pytest.raises(ValueError):
            NoiseSpec(kind="laplace")
        with pytest.raises(ValueError):
            NoiseSpec(scale=-1.0)
