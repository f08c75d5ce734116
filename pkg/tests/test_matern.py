import math

import numpy as np
import pytest
from scipy.special import gamma

from rational_spde.errors import ValidationError
from rational_spde.models.matern import MaternParams, param_convert, practical_range


class TestMaternParams:
    def test_exponential_amplitude(self):
        params = MaternParams(kappa=1.0, phi2=1.0, nu=0.5)
        assert params.beta == 0.75
        assert params.tau == pytest.approx(1.0 / math.sqrt(2.0 * math.pi))

    @pytest.mark.parametrize("nu, kappa, phi2", [(0.3, 2.0, 1.5), (1.0, 8.0, 0.2), (2.5, 0.5, 4.0)])
    def test_variance_identity(self, nu, kappa, phi2):
        params = MaternParams(kappa=kappa, phi2=phi2, nu=nu)
        beta, tau = param_convert(params)
        expected = gamma(nu) / (tau**2 * gamma(2 * beta) * 4 * math.pi * kappa ** (2 * nu))
        assert expected == pytest.approx(phi2, rel=1e-12)
        back = MaternParams.from_beta_tau(kappa, beta, tau)
        assert back.phi2 == pytest.approx(phi2, rel=1e-12)
        assert back.nu == pytest.approx(nu)

    def test_practical_range(self):
        params = MaternParams.from_range(0.1, nu=1.5, phi2=2.0, sigma2=0.3)
        assert practical_range(params) == pytest.approx(0.1)
        assert params.kappa == pytest.approx(math.sqrt(12.0) / 0.1)
        assert (params.phi2, params.sigma2) == (2.0, 0.3)

    def test_other_dimensions(self):
        assert MaternParams(kappa=1.0, phi2=1.0, nu=0.5, d=1).beta == 0.5
        assert np.isfinite(MaternParams(kappa=1.0, phi2=1.0, nu=0.5, d=3).tau)

    @pytest.mark.parametrize(
        "values",
        [
            {"kappa": 0.0, "phi2": 1.0, "nu": 1.0},
            {"kappa": 1.0, "phi2": -1.0, "nu": 1.0},
            {"kappa": 1.0, "phi2": 1.0, "nu": math.nan},
            {"kappa": 1.0, "phi2": 1.0, "nu": 1.0, "sigma2": -0.1},
            {"kappa": 1.0, "phi2": 1.0, "nu": 1.0, "d": 4},
        ],
    )
    def test_rejects(self, values):
        with pytest.raises(ValidationError):
            MaternParams(**values)

    def test_from_range_rejects(self):
        with pytest.raises(ValidationError):
            MaternParams.from_range(0.0, 0.5)
        with pytest.raises(ValidationError):
            MaternParams.from_beta_tau(1.0, 0.5, 1.0)
