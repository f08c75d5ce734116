import numpy as np
import pytest

from rational_spde.errors import LocateError, ShapeError, ValidationError
from rational_spde.models.observations import ObservationSet


class TestObservationSet:
    def test_build(self, unit_mesh):
        obs = ObservationSet.build(unit_mesh, [(0.1, 0.2), (0.5, 0.5)], [1.0, 2.0])
        assert (obs.n_obs, obs.n_replicates) == (2, 1)
        assert obs.y.shape == (1, 2)
        assert obs.A.shape == (2, unit_mesh.n_nodes)
        assert obs.sigma2 is None
        assert obs.with_sigma2(0.5).sigma2 == 0.5

    def test_replicates(self, unit_mesh):
        obs = ObservationSet.build(unit_mesh, [(0.1, 0.2)], [[1.0], [2.0], [3.0]], 0.1)
        assert obs.n_replicates == 3

    def test_shape_mismatch(self, unit_mesh):
        with pytest.raises(ShapeError):
            ObservationSet.build(unit_mesh, [(0.1, 0.2), (0.5, 0.5)], [1.0, 2.0, 3.0])

    @pytest.mark.parametrize("y, sigma2", [([np.nan], None), ([1.0], 0.0), ([1.0], -1.0)])
    def test_invalid_values(self, unit_mesh, y, sigma2):
        with pytest.raises(ValidationError):
            ObservationSet.build(unit_mesh, [(0.5, 0.5)], y, sigma2)

    def test_location_outside_mesh(self, unit_mesh):
        with pytest.raises(LocateError):
            ObservationSet.build(unit_mesh, [(0.5, 1.5)], [0.0])
