"""Provide the observation set of the measurement model y = A u + noise.

The module contains the following classes:
- `ObservationSet`: Replicated observations at fixed locations.

The module contains the following functions:
- `validate_observations`: Checks shapes and finiteness.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from rational_spde.errors import ShapeError, ValidationError
from rational_spde.models.mesh import TriMesh, basis_eval_matrix


@dataclass(frozen=True, eq=False)
class ObservationSet:
    """Observations of R replicates at the same N locations.

    Attributes:
        locations: np.ndarray
            Observation points, shape (N, 2).
        y: np.ndarray
            Values, replicate-major, shape (R, N).
        A: sparse.csr_matrix
            Basis evaluated at the locations, shape (N, n_nodes).
        sigma2: float | None
            Nugget variance, None when unknown.
    """

    locations: np.ndarray
    y: np.ndarray
    A: sparse.csr_matrix
    sigma2: float | None = field(default=None)

    def __post_init__(self) -> None:
        locations = np.asarray(self.locations, dtype=float).reshape(-1, 2)
        y = np.asarray(self.y, dtype=float)
        if y.ndim == 1:
            y = y[None, :]
        object.__setattr__(self, "locations", locations)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "A", sparse.csr_matrix(self.A))
        validate_observations(self)

    @classmethod
    def build(
        cls, mesh: TriMesh, locations, y, sigma2: float | None = None
    ) -> "ObservationSet":
        """Evaluates the basis of `mesh` at `locations` and wraps the data."""
        locations = np.asarray(locations, dtype=float).reshape(-1, 2)
        return cls(locations, y, basis_eval_matrix(mesh, locations), sigma2)

    @property
    def n_obs(self) -> int:
        """Number of locations N."""
        return len(self.locations)

    @property
    def n_replicates(self) -> int:
        """Number of replicates R."""
        return self.y.shape[0]

    def with_sigma2(self, sigma2: float) -> "ObservationSet":
        """Copy with a different nugget."""
        return ObservationSet(self.locations, self.y, self.A, sigma2)


def validate_observations(obs: ObservationSet) -> None:
    """Checks that A and y match the locations and y is finite.

    Args:
        obs (ObservationSet): Represents the observations to be validated.

    Raises:
        ShapeError: On mismatched shapes.
        ValidationError: On non-finite values or a negative nugget.
    """
    if obs.A.shape[0] != obs.n_obs:
        raise ShapeError(f"A has {obs.A.shape[0]} rows for {obs.n_obs} locations")
    if obs.y.ndim != 2 or obs.y.shape[1] != obs.n_obs:
        raise ShapeError(f"y has shape {obs.y.shape}, need (R, {obs.n_obs})")
    if not np.all(np.isfinite(obs.y)):
        raise ValidationError("observations must be finite")
    if obs.sigma2 is not None and not obs.sigma2 > 0:
        raise ValidationError(f"nugget must be positive, got {obs.sigma2}")
