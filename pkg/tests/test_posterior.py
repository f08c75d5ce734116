import numpy as np
import pytest
from scipy import sparse
from scipy.stats import multivariate_normal

from rational_spde.errors import ValidationError
from rational_spde.experiments.field import matern_model
from rational_spde.inference.posterior import krige, log_likelihood, posterior, posterior_sample
from rational_spde.models.matern import MaternParams
from rational_spde.models.observations import ObservationSet
from rational_spde.models.spde import dense_covariance, log_det_P_l, log_det_Q


def dense_log_likelihood(model, obs, sigma2):
    A = model.ops.restrict(obs.A).toarray()
    cov = A @ dense_covariance(model) @ A.T + sigma2 * np.eye(obs.n_obs)
    return sum(multivariate_normal(np.zeros(obs.n_obs), cov).logpdf(y) for y in obs.y)


class TestLogLikelihood:
    @pytest.mark.parametrize("beta", [0.6, 0.75, 1.0, 1.4, 2.3])
    @pytest.mark.parametrize("m", [1, 2])
    @pytest.mark.parametrize("sigma2", [0.01, 0.1])
    def test_matches_dense_gaussian(self, small_mesh, beta, m, sigma2):
        params = MaternParams(kappa=5.0, phi2=1.3, nu=2.0 * beta - 1.0)
        model = matern_model(small_mesh, params, m)
        rng = np.random.default_rng(int(100 * beta) + 10 * m)
        locations = rng.uniform(0.0, 1.0, size=(25, 2))
        obs = ObservationSet.build(small_mesh, locations, rng.standard_normal((3, 25)))
        expected = dense_log_likelihood(model, obs, sigma2)
        assert log_likelihood(model, obs, sigma2) == pytest.approx(expected, abs=1e-6)

    def test_nugget_from_observations(self, model, observations):
        assert log_likelihood(model, observations) == pytest.approx(
            log_likelihood(model, observations.with_sigma2(1.0), 0.1)
        )

    def test_needs_a_nugget(self, model, observations):
        with pytest.raises(ValidationError):
            log_likelihood(model, observations.with_sigma2(1.0), 0.0)


class TestPosterior:
    def test_state(self, model, observations):
        post = posterior(model, observations)
        assert post.mu.shape == (observations.n_replicates, model.n)
        assert post.sigma2 == 0.1
        residual = post.Q_xy @ post.mu.T - post.AP.T @ observations.y.T / 0.1
        np.testing.assert_allclose(residual, 0.0, atol=1e-8)

    def test_krige_matches_dense_conditioning(self, model, observations):
        post = posterior(model, observations)
        points = np.array([(0.3, 0.3), (0.72, 0.41), (0.9, 0.05)])
        A_pred = model.ops.restrict(model.ops.mesh.basis_matrix(points)).toarray()
        A = model.ops.restrict(observations.A).toarray()
        sigma = dense_covariance(model)
        joint = A @ sigma @ A.T + 0.1 * np.eye(observations.n_obs)
        cross = A_pred @ sigma @ A.T
        expected_means = (cross @ np.linalg.solve(joint, observations.y.T)).T
        expected_vars = np.diag(A_pred @ sigma @ A_pred.T - cross @ np.linalg.solve(joint, cross.T))

        means, variances = krige(post, model, model.ops.mesh.basis_matrix(points))
        np.testing.assert_allclose(means, expected_means, rtol=1e-7, atol=1e-9)
        np.testing.assert_allclose(variances, expected_vars, rtol=1e-7, atol=1e-9)

    def test_posterior_samples(self, model, observations):
        post = posterior(model, observations)
        draws = posterior_sample(post, model, 4000, 9, replicate=1)
        assert draws.shape == (4000, model.n)
        np.testing.assert_array_equal(draws[:5], posterior_sample(post, model, 4000, 9, 1)[:5])
        np.testing.assert_allclose(draws.mean(axis=0), model.P_r @ post.mu[1], atol=0.2)
        with pytest.raises(ValidationError):
            posterior_sample(post, model, 0, 9)


def prior_variances(model, A_pred):
    B = model.ops.restrict(A_pred).toarray()
    return np.diag(B @ dense_covariance(model) @ B.T)


class TestLimits:
    points = np.array([(0.3, 0.3), (0.72, 0.41), (0.9, 0.05), (0.5, 0.5)])

    def test_uninformative_data(self, model, observations):
        post = posterior(model, observations, 1e12)
        assert np.abs(post.mu).max() <= 1e-6
        A_pred = model.ops.mesh.basis_matrix(self.points)
        _, variances = krige(post, model, A_pred)
        np.testing.assert_allclose(variances, prior_variances(model, A_pred), rtol=1e-6)

    def test_exact_observation_is_interpolated(self, model, small_mesh):
        node = small_mesh.nearest_node((0.5, 0.5))
        location = small_mesh.nodes[node][None, :]
        obs = ObservationSet.build(small_mesh, location, [[0.7], [-0.2]], 1e-10)
        means, variances = krige(posterior(model, obs), model, small_mesh.basis_matrix(location))
        np.testing.assert_allclose(means[:, 0], [0.7, -0.2], atol=1e-4)
        assert variances[0] < 1e-4

    def test_variance_never_exceeds_prior(self, model, observations):
        grid = np.linspace(0.0, 1.0, 9)
        points = np.array([(x, y) for x in grid for y in grid])
        A_pred = model.ops.mesh.basis_matrix(points)
        _, variances = krige(posterior(model, observations), model, A_pred)
        assert np.all(variances <= prior_variances(model, A_pred) + 1e-12)

    def test_no_observations(self, model, small_mesh):
        empty = ObservationSet(
            np.empty((0, 2)), np.empty((1, 0)), sparse.csr_matrix((0, small_mesh.n_nodes)), 1.0
        )
        assert log_det_P_l(model) - 0.5 * log_det_Q(model) == pytest.approx(
            0.5 * model.log_det_C_lumped, rel=1e-10, abs=1e-8
        )
        assert log_likelihood(model, empty) == pytest.approx(0.0, abs=1e-7)

    def test_replicates_add_up(self, model, observations):
        single = [
            ObservationSet(observations.locations, y, observations.A, observations.sigma2)
            for y in observations.y
        ]
        total = sum(log_likelihood(model, obs) for obs in single)
        assert log_likelihood(model, observations) == pytest.approx(total, rel=1e-10)
