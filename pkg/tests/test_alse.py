import numpy as np
import pytest

from marfit import (
    AlseConfig,
    BandSpec,
    BandedDesign,
    IllPosedRegressionError,
    MarCoefficients,
    MatrixSeries,
    NoiseSpec,
    fit_alse,
    gen_banded_coeffs,
    kron,
    ls_step_A,
    ls_step_B,
    simulate,
    vec,
)
from marfit.alse import residual_ss


def exact_series(truth: MarCoefficients, T: int, seed=0) -> MatrixSeries:
    """A noise-free chain: every consecutive pair satisfies the model exactly."""
    rng = np.random.default_rng(seed)
    data = np.empty((T, truth.p1, truth.p2))
    data[0] = rng.standard_normal((truth.p1, truth.p2))
    for t in range(1, T):
        data[t] = truth.A @ data[t - 1] @ truth.B.T
    return MatrixSeries(data)


def orthogonal_truth(p1: int, p2: int, seed=0) -> MarCoefficients:
    """Orthogonal (A, B): noise-free chains keep their norm, so long exact
    series stay well conditioned."""
    rng = np.random.default_rng(seed)
    Qa, _ = np.linalg.qr(rng.standard_normal((p1, p1)))
    Qb, _ = np.linalg.qr(rng.standard_normal((p2, p2)))
    return MarCoefficients(A=Qa, B=Qb)


@pytest.fixture
def banded_truth():
    return gen_banded_coeffs(BandedDesign(4, 3, BandSpec(1, 1), 0.5), seed=2)


class TestHalfSteps:
    def test_noise_free_recovery_A(self, banded_truth):
        chain = exact_series(banded_truth, 12, seed=1)
        A_hat = ls_step_A(chain, banded_truth.B)
        np.testing.assert_allclose(A_hat, banded_truth.A, atol=1e-8)

    def test_noise_free_recovery_B(self, banded_truth):
        chain = exact_series(banded_truth, 12, seed=3)
        B_hat = ls_step_B(chain, banded_truth.A)
        np.testing.assert_allclose(B_hat, banded_truth.B, atol=1e-8)

    def test_scalar_case_is_ols_slope(self):
        rng = np.random.default_rng(4)
        y = np.empty(200)
        y[0] = rng.standard_normal()
        for t in range(1, 200):
            y[t] = 0.6 * y[t - 1] + rng.standard_normal()
        series = MatrixSeries(y.reshape(-1, 1, 1))
        slope = ls_step_A(series, np.array([[1.0]])).item()
        ols = float(np.sum(y[1:] * y[:-1]) / np.sum(y[:-1] ** 2))
        assert slope == pytest.approx(ols, abs=1e-12)

    def test_A_step_matches_vec_form_normal_equations(self, banded_truth):
        series = simulate(banded_truth, NoiseSpec(), T=60, seed=5)
        B = banded_truth.B
        A_hat = ls_step_A(series, B)
        # brute-force p1^2-dimensional normal equations of the vec form
        p1 = series.p1
        Zs = [kron((B @ series.data[t - 1].T), np.eye(p1)) for t in range(1, series.T_len)]
        G = sum(Z.T @ Z for Z in Zs)
        rhs = sum(Z.T @ vec(series.data[t]) for t, Z in zip(range(1, series.T_len), Zs))
        alpha = np.linalg.solve(G, rhs)
        np.testing.assert_allclose(vec(A_hat), alpha, atol=1e-8)

    def test_B_step_matches_vec_form_normal_equations(self, banded_truth):
        series = simulate(banded_truth, NoiseSpec(), T=60, seed=6)
        A = banded_truth.A
        B_hat = ls_step_B(series, A)
        p2 = series.p2
        Zs = [kron((A @ series.data[t - 1]), np.eye(p2)) for t in range(1, series.T_len)]
        G = sum(Z.T @ Z for Z in Zs)
        rhs = sum(Z.T @ vec(series.data[t].T) for t, Z in zip(range(1, series.T_len), Zs))
        beta = np.linalg.solve(G, rhs)
        np.testing.assert_allclose(vec(B_hat), beta, atol=1e-8)

    def test_transpose_symmetry(self, banded_truth):
        series = simulate(banded_truth, NoiseSpec(), T=80, seed=7)
        flipped = MatrixSeries(series.data.transpose(0, 2, 1))
        B_hat = ls_step_B(series, banded_truth.A)
        A_of_flipped = ls_step_A(flipped, banded_truth.A)
        np.testing.assert_allclose(B_hat, A_of_flipped, atol=1e-10)

    def test_singular_gram_raises(self):
        series = MatrixSeries(np.zeros((5, 2, 2)) + 1.0)  # constant series, rank-1 design
        with pytest.raises(IllPosedRegressionError) as err:
            ls_step_A(series, np.eye(2))
        assert err.value.condition > 1e12 or not np.isfinite(err.value.condition)


class TestFitAlse:
    def test_noise_free_exact_from_truth_start(self, banded_truth):
        chain = exact_series(banded_truth, 12, seed=8)
        coeffs, trace = fit_alse(chain, AlseConfig(init=banded_truth))
        assert trace.converged and trace.iterations <= 3
        assert residual_ss(chain.data, coeffs.A, coeffs.B) <= 1e-12

    def test_noise_free_generic_start_converges(self):
        truth = orthogonal_truth(4, 3, seed=0)
        chain = exact_series(truth, 40, seed=100)
        coeffs, trace = fit_alse(chain)
        assert trace.converged
        assert residual_ss(chain.data, coeffs.A, coeffs.B) <= 1e-9

    def test_objective_nonincreasing_half_steps(self):
        rng = np.random.default_rng(9)
        for rep in range(50):
            truth = gen_banded_coeffs(BandedDesign(3, 3, BandSpec(1, 1), 0.6), seed=100 + rep)
            series = simulate(truth, NoiseSpec(), T=30, seed=200 + rep)
            _, trace = fit_alse(series, AlseConfig(max_iter=20))
            obj = np.array(trace.objective)
            assert np.all(np.diff(obj) <= 1e-8 * obj[:-1] + 1e-9)

    def test_output_is_normalized(self, banded_truth):
        series = simulate(banded_truth, NoiseSpec(), T=100, seed=10)
        coeffs, _ = fit_alse(series)
        assert coeffs.normalized
        assert np.linalg.norm(coeffs.A, "fro") == pytest.approx(1.0, abs=1e-12)
        assert np.trace(coeffs.A) >= 0

    def test_permutation_equivariance(self, banded_truth):
        series = simulate(banded_truth, NoiseSpec(), T=150, seed=11)
        rng = np.random.default_rng(12)
        P = np.eye(4)[rng.permutation(4)]
        permuted = MatrixSeries(np.einsum("ij,tjk->tik", P, series.data))
        base, _ = fit_alse(series)
        perm, _ = fit_alse(permuted)
        np.testing.assert_allclose(perm.A, P @ base.A @ P.T, atol=1e-6)

    def test_order_insensitive_fixed_point(self, banded_truth):
        series = simulate(banded_truth, NoiseSpec(), T=200, seed=13)
        a_first, _ = fit_alse(series, AlseConfig(order="A"))
        b_first, _ = fit_alse(series, AlseConfig(order="B"))
        assert np.linalg.norm(a_first.A - b_first.A, "fro") <= 1e-6

    def test_small_sample_warns(self):
        data = np.random.default_rng(14).standard_normal((2, 3, 3))
        with pytest.warns(UserWarning):
            try:
                fit_alse(MatrixSeries(data), AlseConfig(max_iter=1))
            except IllPosedRegressionError:
                pass

    def test_config_validation(self):
        with pytest.raises(ValueError):
            AlseConfig(eta=0.0)
        with pytest.raises(ValueError):
            AlseConfig(max_iter=0)
        with pytest.raises(ValueError):
            AlseConfig(order="C")
