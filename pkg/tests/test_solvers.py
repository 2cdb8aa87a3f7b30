"""Tests for projections, the projected-gradient loop, coordinate descent,
principal components, alternating least squares, and OLS."""

import numpy as np
import pytest

import _oracles
from synthconf import (
    DimensionError,
    ElasticNetPenalty,
    LassoPenalty,
    RankDeficiencyError,
    SolverConfig,
    alternating_ls,
    coordinate_descent_penalized,
    ols,
    pca_factors,
    project_l1_ball,
    project_nuclear_ball,
    project_simplex,
    projected_gradient_ls,
)


class TestProjectSimplex:
    def test_point_on_simplex_unchanged(self):
        v = np.array([0.2, 0.5, 0.3])
        np.testing.assert_allclose(project_simplex(v), v, atol=1e-14)

    def test_vertex_case(self):
        np.testing.assert_allclose(project_simplex(np.array([2.0, 0.0])), [1.0, 0.0])

    def test_matches_grid_search(self, rng):
        for n in (2, 3):
            for _ in range(5):
                v = 2.0 * rng.standard_normal(n)
                ours = project_simplex(v)
                grid_best = _oracles.simplex_projection_grid_search(v, step=1e-3)
                assert np.abs(ours - grid_best).max() < 2e-3

    def test_matches_bisection(self, rng):
        for n in (2, 4, 9):
            v = 3.0 * rng.standard_normal(n)
            np.testing.assert_allclose(
                project_simplex(v), _oracles.simplex_projection_bisect(v), atol=1e-6
            )

    def test_output_feasible(self, rng):
        for _ in range(20):
            w = project_simplex(5 * rng.standard_normal(rng.integers(1, 12)))
            assert (w >= 0).all()
            assert abs(w.sum() - 1.0) < 1e-12


class TestProjectL1Ball:
    def test_interior_point_unchanged(self):
        v = np.array([0.3, -0.2])
        np.testing.assert_array_equal(project_l1_ball(v, 1.0), v)

    def test_scalar_clip(self):
        np.testing.assert_allclose(project_l1_ball(np.array([3.0]), 1.0), [1.0])

    def test_matches_bisection(self, rng):
        for _ in range(20):
            v = 4.0 * rng.standard_normal(rng.integers(2, 15))
            radius = float(rng.uniform(0.2, 2.0))
            np.testing.assert_allclose(
                project_l1_ball(v, radius),
                _oracles.l1_projection_bisect(v, radius),
                atol=1e-6,
            )

    def test_norm_bound(self, rng):
        for _ in range(20):
            w = project_l1_ball(5 * rng.standard_normal(8), 1.0)
            assert np.abs(w).sum() <= 1.0 + 1e-12

    def test_invalid_radius(self):
        with pytest.raises(ValueError):
            project_l1_ball(np.ones(3), 0.0)


class TestProjectNuclearBall:
    def test_feasible_matrix_unchanged(self, rng):
        a = 0.1 * rng.standard_normal((4, 3))
        np.testing.assert_allclose(project_nuclear_ball(a, 10.0), a, atol=1e-10)

    def test_diagonal_example(self):
        a = np.diag([3.0, 1.0])
        np.testing.assert_allclose(project_nuclear_ball(a, 2.0), np.diag([2.0, 0.0]), atol=1e-12)

    def test_rank_one_rescaling(self, rng):
        u = rng.standard_normal(5)
        v = rng.standard_normal(3)
        a = 4.0 * np.outer(u / np.linalg.norm(u), v / np.linalg.norm(v))
        projected = project_nuclear_ball(a, 2.5)
        np.testing.assert_allclose(projected, a * 2.5 / 4.0, atol=1e-10)

    def test_nuclear_norm_bound(self, rng):
        a = rng.standard_normal((6, 4))
        projected = project_nuclear_ball(a, 1.5)
        assert np.linalg.svd(projected, compute_uv=False).sum() <= 1.5 + 1e-9


class TestProjectionProperties:
    """Idempotence and non-expansiveness on sampled points."""

    def test_idempotent(self, rng):
        for _ in range(10):
            v = 3 * rng.standard_normal(7)
            for proj in (project_simplex, lambda x: project_l1_ball(x, 1.3)):
                once = proj(v)
                np.testing.assert_allclose(proj(once), once, atol=1e-12)
        a = rng.standard_normal((5, 4))
        once = project_nuclear_ball(a, 2.0)
        np.testing.assert_allclose(project_nuclear_ball(once, 2.0), once, atol=1e-9)

    def test_nonexpansive(self, rng):
        for proj in (project_simplex, lambda x: project_l1_ball(x, 0.8)):
            for _ in range(25):
                u, v = 3 * rng.standard_normal((2, 6))
                lhs = np.linalg.norm(proj(u) - proj(v))
                assert lhs <= np.linalg.norm(u - v) + 1e-12
        for _ in range(10):
            a, b = rng.standard_normal((2, 5, 4))
            lhs = np.linalg.norm(project_nuclear_ball(a, 1.0) - project_nuclear_ball(b, 1.0))
            assert lhs <= np.linalg.norm(a - b) + 1e-12


class TestProjectedGradientLS:
    def test_recovers_feasible_noise_free_solution(self, rng):
        X = rng.standard_normal((30, 4))
        w_star = np.array([0.4, 0.3, 0.2, 0.1])
        y = X @ w_star
        w, report = projected_gradient_ls(X, y, project_simplex)
        assert report.converged
        assert report.final_objective < 1e-6
        np.testing.assert_allclose(w, w_star, atol=1e-4)

    def test_simplex_matches_1d_grid(self, rng):
        X = rng.standard_normal((12, 2))
        y = X @ np.array([0.7, 0.3]) + 0.5 * rng.standard_normal(12)
        w, report = projected_gradient_ls(X, y, project_simplex)
        w1 = np.linspace(0.0, 1.0, 10001)
        grid = np.column_stack([w1, 1.0 - w1])
        grid_best = ((y[:, None] - X @ grid.T) ** 2).sum(axis=0).min()
        assert abs(report.final_objective - grid_best) < 1e-4

    def test_l1_ball_matches_grid(self, rng):
        X = rng.standard_normal((10, 3))
        y = X @ np.array([0.5, -0.3, 0.1]) + 0.3 * rng.standard_normal(10)
        _, report = projected_gradient_ls(X, y, lambda v: project_l1_ball(v, 1.0))
        grid_best = _oracles.l1_ball_objective_grid_search(X, y, radius=1.0, step=1e-2)
        assert abs(report.final_objective - grid_best) < 5e-3

    def test_objective_monotone_under_backtracking(self, rng):
        X = rng.standard_normal((20, 6))
        y = rng.standard_normal(20)
        _, report = projected_gradient_ls(X, y, project_simplex)
        trace = np.asarray(report.objective_trace)
        assert (np.diff(trace) <= 1e-10 * np.maximum(1.0, np.abs(trace[:-1]))).all()

    def test_fixed_step_rule(self, rng):
        X = rng.standard_normal((15, 3))
        y = rng.standard_normal(15)
        w_bt, _ = projected_gradient_ls(X, y, project_simplex)
        w_fx, report = projected_gradient_ls(
            X, y, project_simplex, SolverConfig(step_rule="fixed", max_iters=50_000)
        )
        assert report.converged
        np.testing.assert_allclose(w_fx, w_bt, atol=1e-6)

    def test_nonconvergence_reported(self, rng):
        X = rng.standard_normal((10, 3))
        y = rng.standard_normal(10)
        _, report = projected_gradient_ls(
            X, y, project_simplex, SolverConfig(max_iters=2, tol=1e-14)
        )
        assert not report.converged
        assert report.iterations == 2


class TestCoordinateDescent:
    def test_unpenalized_limit_is_ols(self, rng):
        X = rng.standard_normal((40, 3))
        y = rng.standard_normal(40)
        mu, w, report = coordinate_descent_penalized(X, y, LassoPenalty(0.0))
        design = np.column_stack([np.ones(40), X])
        expected = _oracles.ols_via_qr(design, y)
        assert report.converged
        np.testing.assert_allclose(np.concatenate([[mu], w]), expected, atol=1e-8)

    def test_full_shrinkage_threshold(self, rng):
        X = rng.standard_normal((25, 4))
        y = rng.standard_normal(25)
        lam = 2.0 * np.abs(X.T @ (y - y.mean())).max()
        _, w, _ = coordinate_descent_penalized(X, y, LassoPenalty(lam * 1.0001))
        np.testing.assert_array_equal(w, np.zeros(4))

    def test_stationarity_by_perturbation(self, rng):
        X = rng.standard_normal((10, 3))
        y = rng.standard_normal(10)
        penalty = LassoPenalty(0.7)
        mu, w, _ = coordinate_descent_penalized(X, y, penalty)

        def objective(mu_, w_):
            r = y - mu_ - X @ w_
            return float(r @ r) + penalty.value(w_)

        base = objective(mu, w)
        for j in range(3):
            for delta in (1e-4, -1e-4):
                bumped = w.copy()
                bumped[j] += delta
                assert objective(mu, bumped) >= base - 1e-12
        for delta in (1e-4, -1e-4):
            assert objective(mu + delta, w) >= base - 1e-12

    def test_elastic_net_alpha_one_is_lasso(self, rng):
        X = rng.standard_normal((15, 4))
        y = rng.standard_normal(15)
        mu_l, w_l, _ = coordinate_descent_penalized(X, y, LassoPenalty(0.5))
        mu_e, w_e, _ = coordinate_descent_penalized(X, y, ElasticNetPenalty(0.5, 1.0))
        assert abs(mu_l - mu_e) < 1e-10
        np.testing.assert_allclose(w_l, w_e, atol=1e-10)

    def test_penalty_validation(self):
        with pytest.raises(ValueError):
            LassoPenalty(-1.0)
        with pytest.raises(ValueError):
            ElasticNetPenalty(1.0, 1.5)


class TestPcaFactors:
    def test_exact_rank_one(self, rng):
        f = rng.standard_normal(20)
        lam = rng.standard_normal(6)
        Y = np.outer(f, lam)
        factors, loadings = pca_factors(Y, 1)
        np.testing.assert_allclose(factors @ loadings.T, Y, atol=1e-8)

    def test_full_rank_reconstruction(self, rng):
        Y = rng.standard_normal((7, 5))
        factors, loadings = pca_factors(Y, 5)
        np.testing.assert_allclose(factors @ loadings.T, Y, atol=1e-8)

    def test_normalization_and_diagonal_loadings(self, rng):
        Y = rng.standard_normal((20, 10))
        factors, loadings = pca_factors(Y, 3)
        np.testing.assert_allclose(factors.T @ factors / 20, np.eye(3), atol=1e-8)
        gram = loadings.T @ loadings
        np.testing.assert_allclose(gram, np.diag(np.diag(gram)), atol=1e-8)

    def test_residual_equals_tail_singular_energy(self, rng):
        Y = rng.standard_normal((20, 10))
        factors, loadings = pca_factors(Y, 2)
        resid = ((Y - factors @ loadings.T) ** 2).sum()
        s = np.linalg.svd(Y, compute_uv=False)
        np.testing.assert_allclose(resid, (s[2:] ** 2).sum(), rtol=1e-10)

    def test_sign_convention(self, rng):
        Y = rng.standard_normal((12, 4))
        factors, _ = pca_factors(Y, 2)
        for col in range(2):
            assert factors[np.abs(factors[:, col]).argmax(), col] > 0

    def test_k_bounds(self, rng):
        Y = rng.standard_normal((6, 4))
        for k in (0, 5):
            with pytest.raises(DimensionError):
                pca_factors(Y, k)


class TestAlternatingLS:
    def test_without_covariates_reduces_to_pca(self, rng):
        Y = rng.standard_normal((15, 6))
        f_pca, l_pca = pca_factors(Y, 2)
        f_als, l_als, beta, report = alternating_ls(Y, None, 2)
        assert beta is None
        np.testing.assert_array_equal(f_als, f_pca)
        np.testing.assert_array_equal(l_als, l_pca)
        assert report.converged

    def test_noise_free_model_reaches_zero(self, rng):
        T, N, k = 25, 8, 2
        F = rng.standard_normal((T, k))
        L = rng.standard_normal((N, k))
        X = rng.standard_normal((T, N, 3))
        beta = np.array([0.5, -1.0, 0.25])
        Y = F @ L.T + X @ beta
        *_, report = alternating_ls(Y, X, k, SolverConfig(tol=1e-12))
        assert report.final_objective < 1e-6

    def test_objective_trace_monotone(self, rng):
        Y = rng.standard_normal((18, 7))
        X = rng.standard_normal((18, 7, 2))
        *_, report = alternating_ls(Y, X, 2)
        trace = np.asarray(report.objective_trace)
        assert (np.diff(trace) <= 1e-10 * np.maximum(1.0, trace[:-1])).all()


class TestOls:
    def test_identity_design(self):
        y = np.array([1.0, -2.0, 3.0])
        np.testing.assert_allclose(ols(np.eye(3), y), y, atol=1e-12)

    def test_exact_solution(self, rng):
        X = rng.standard_normal((20, 4))
        b = rng.standard_normal(4)
        np.testing.assert_allclose(ols(X, X @ b), b, atol=1e-10)

    def test_matches_qr(self, rng):
        X = rng.standard_normal((30, 5))
        y = rng.standard_normal(30)
        np.testing.assert_allclose(ols(X, y), _oracles.ols_via_qr(X, y), atol=1e-9)

    def test_normal_equation_residual(self, rng):
        X = rng.standard_normal((30, 5))
        y = rng.standard_normal(30)
        b = ols(X, y)
        lhs = np.abs(X.T @ (y - X @ b)).max()
        assert lhs <= 1e-8 * np.abs(X.T @ y).max()

    def test_singular_design_raises(self):
        X = np.ones((10, 2))
        with pytest.raises(RankDeficiencyError, match="condition number"):
            ols(X, np.arange(10.0))
