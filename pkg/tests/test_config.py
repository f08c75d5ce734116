import math
import pathlib

import pytest

from rational_spde.errors import ValidationError
from rational_spde.experiments.config import ExperimentConfig, build_mesh, matern_params
from rational_spde.models.flags import BoundaryCondition
from rational_spde.persistence.serializer import dump_mesh
from rational_spde.view.renderer import OutputFormat


class TestExperimentConfig:
    def test_defaults(self):
        config = ExperimentConfig(command="coeffs")
        assert config.fmt is OutputFormat.CSV
        assert config.bc is BoundaryCondition.NEUMANN
        assert config.m == 1

    def test_coerces_values(self):
        config = ExperimentConfig(command="coeffs", m_list=[3, 4], fmt="json", bc="dirichlet")
        assert config.m_list == (3, 4)
        assert config.fmt is OutputFormat.JSON
        assert config.bc is BoundaryCondition.DIRICHLET

    def test_from_mapping(self):
        config = ExperimentConfig.from_mapping(
            {"command": "sample", "seed": 3, "kappa": None, "verbose": 2}
        )
        assert config.seed == 3
        assert config.kappa is None

    def test_recorded(self, tmp_path):
        config = ExperimentConfig(command="coeffs", out=tmp_path / "x.csv", fmt="json")
        recorded = config.recorded()
        assert recorded["out"] == str(tmp_path / "x.csv")
        assert recorded["fmt"] == "json"
        assert recorded["bc"] == "neumann"

    @pytest.mark.parametrize(
        "values",
        [
            {"command": "plot"},
            {"command": "convergence"},
            {"command": "coeffs", "seed": -1},
            {"command": "coeffs", "kappa": 0.0},
            {"command": "coeffs", "phi2": math.inf},
            {"command": "coeffs", "sigma2": -0.1},
            {"command": "coeffs", "beta": 0.75, "nu": 1.0},
            {"command": "coeffs", "kappa": 1.0, "practical_range": 0.3},
            {"command": "coeffs", "m_list": ()},
            {"command": "coeffs", "m_list": (21,)},
            {"command": "coeffs", "delta": 1.0},
            {"command": "coeffs", "threads": 0},
            {"command": "coeffs", "levels": 1},
            {"command": "coeffs", "extension": -0.5},
            {"command": "coeffs", "node_counts": (2,)},
            {"command": "coeffs", "standard_betas": (0,)},
            {"command": "coeffs", "nu_grid": (0.5, -1.0)},
            {"command": "coeffs", "source": "gaussian"},
            {"command": "coeffs", "init": (1.0, 1.0, 0.0, 0.5)},
            {"command": "coeffs", "mesh_path": pathlib.Path("/nonexistent/mesh.txt")},
            {"command": "fit"},
        ],
    )
    def test_rejects(self, values):
        with pytest.raises(ValidationError):
            ExperimentConfig(**values)

    def test_loglik_needs_a_nugget(self, tmp_path):
        data = tmp_path / "obs.csv"
        data.write_text("x,y,replicate,value\n")
        with pytest.raises(ValidationError, match="sigma2"):
            ExperimentConfig(command="loglik", data_path=data)

    def test_consistent_beta_and_nu(self):
        assert ExperimentConfig(command="coeffs", beta=0.75, nu=0.5).beta == 0.75


class TestBuilders:
    def test_structured_mesh(self):
        mesh = build_mesh(ExperimentConfig(command="coeffs", cells=6, extension=0.5))
        assert mesh.n_nodes == 13 * 13

    def test_mesh_file(self, tmp_path, unit_mesh):
        path = tmp_path / "mesh.txt"
        dump_mesh(unit_mesh, path)
        assert build_mesh(ExperimentConfig(command="coeffs", mesh_path=path)).n_nodes == 25

    def test_params_from_beta(self):
        params = matern_params(ExperimentConfig(command="coeffs", beta=1.25, kappa=3.0))
        assert params.nu == pytest.approx(1.5)
        assert params.kappa == 3.0

    def test_params_from_range(self):
        params = matern_params(ExperimentConfig(command="coeffs", nu=1.0, practical_range=0.4))
        assert params.kappa == pytest.approx(math.sqrt(8.0) / 0.4)

    def test_default_range(self):
        params = matern_params(ExperimentConfig(command="coeffs"))
        assert params.nu == 0.5
        assert params.practical_range == pytest.approx(0.2)
