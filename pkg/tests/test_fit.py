import numpy as np
import pytest

from rational_spde.errors import ValidationError
from rational_spde.experiments.field import matern_model
from rational_spde.inference.fit import (
    PARAMETERS,
    FitOptions,
    evaluate_log_likelihood,
    mle_fit,
)
from rational_spde.inference.posterior import log_likelihood
from rational_spde.models.fem import CoefficientField, assemble
from rational_spde.models.matern import MaternParams
from rational_spde.models.observations import ObservationSet
from rational_spde.models.spde import sample


@pytest.fixture
def simulated(small_mesh):
    truth = MaternParams(kappa=6.0, phi2=1.0, nu=0.5, sigma2=0.05)
    model = matern_model(small_mesh, truth, 1)
    rng = np.random.default_rng(31)
    locations = rng.uniform(0.0, 1.0, size=(60, 2))
    fields = sample(model, 4, rng)
    A = model.ops.restrict(small_mesh.basis_matrix(locations))
    y = (A @ fields.T).T + np.sqrt(truth.sigma2) * rng.standard_normal((4, 60))
    return truth, ObservationSet.build(small_mesh, locations, y)


class TestEvaluate:
    def test_matches_direct_model(self, small_mesh, simulated):
        truth, obs = simulated
        base = assemble(small_mesh, CoefficientField(kappa2=0.0))
        direct = log_likelihood(matern_model(small_mesh, truth, 2), obs, truth.sigma2)
        assert evaluate_log_likelihood(truth, obs, base, 2) == pytest.approx(direct)


class TestMleFit:
    def test_all_fixed_returns_init(self, small_mesh, simulated):
        truth, obs = simulated
        result = mle_fit(obs, small_mesh, 1, truth, FitOptions(fixed=frozenset(PARAMETERS)))
        assert result.params == truth
        assert result.loglik == result.init_loglik
        assert result.converged

    def test_improves_the_likelihood(self, small_mesh, simulated):
        truth, obs = simulated
        init = MaternParams(kappa=9.0, phi2=0.6, nu=0.5, sigma2=0.2)
        result = mle_fit(obs, small_mesh, 1, init, FitOptions(fixed=frozenset({"nu"}), maxiter=200))
        assert result.loglik > result.init_loglik
        assert result.params.nu == pytest.approx(0.5)
        assert result.n_evaluations > 1

    def test_options_validation(self):
        with pytest.raises(ValidationError):
            FitOptions(fixed=frozenset({"range"}))
        with pytest.raises(ValidationError):
            FitOptions(maxiter=0)

    def test_likelihood_ridge_reparameterization(self, small_mesh, simulated):
        truth, obs = simulated
        opts = FitOptions(maxiter=2000, fixed=frozenset({"nu", "sigma2"}))
        scaled = MaternParams(
            kappa=1.5 * truth.kappa,
            phi2=truth.phi2 * 1.5 ** (-2 * truth.nu),
            nu=truth.nu,
            sigma2=truth.sigma2,
        )
        assert scaled.phi2 * scaled.kappa ** (2 * scaled.nu) == pytest.approx(
            truth.phi2 * truth.kappa ** (2 * truth.nu)
        )
        first = mle_fit(obs, small_mesh, 1, truth, opts)
        second = mle_fit(obs, small_mesh, 1, scaled, opts)
        assert second.loglik == pytest.approx(first.loglik, abs=1e-3)


class TestNuggetProfile:
    def test_recovers_sigma2_alone(self, small_mesh):
        truth = MaternParams(kappa=6.0, phi2=1.0, nu=0.5, sigma2=0.2)
        model = matern_model(small_mesh, truth, 1)
        rng = np.random.default_rng(5)
        locations = rng.uniform(0.0, 1.0, size=(100, 2))
        fields = sample(model, 100, rng)
        A = model.ops.restrict(small_mesh.basis_matrix(locations))
        y = (A @ fields.T).T + np.sqrt(truth.sigma2) * rng.standard_normal((100, 100))
        obs = ObservationSet.build(small_mesh, locations, y)
        init = MaternParams(kappa=6.0, phi2=1.0, nu=0.5, sigma2=0.05)
        opts = FitOptions(fixed=frozenset({"kappa", "phi2", "nu"}))
        result = mle_fit(obs, small_mesh, 1, init, opts)
        assert result.params.sigma2 == pytest.approx(truth.sigma2, rel=0.05)
        assert result.params.kappa == pytest.approx(init.kappa)
