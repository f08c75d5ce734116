"""Provide the validated configuration shared by all experiments.

Examples:

    >>> from rational_spde.experiments.config import ExperimentConfig

    >>> config = ExperimentConfig(command="coeffs", beta=0.75, m_list=(1, 2, 3))
    >>> config.recorded()["m_list"]
    [1, 2, 3]

    >>> ExperimentConfig(command="sample")
    Traceback (most recent call last):
    ...
    rational_spde.errors.ValidationError: command 'sample' is stochastic and needs --seed

The module contains the following classes:
- `ExperimentConfig`: Every parameter of one command-line run.

The module contains the following functions:
- `validate_config`: Checks every value before any computation.
- `build_mesh`: The mesh a configuration describes.
- `matern_params`: The Matérn parameters a configuration describes.
"""

import math
import pathlib
from dataclasses import asdict, dataclass, fields
from typing import Any

from rational_spde.errors import ValidationError
from rational_spde.models.flags import BoundaryCondition
from rational_spde.models.matern import MaternParams
from rational_spde.models.mesh import Rect, TriMesh, build_rect_mesh
from rational_spde.models.rational import MAX_DEGREE
from rational_spde.persistence.serializer import load_mesh
from rational_spde.view.renderer import OutputFormat

COMMANDS: tuple[str, ...] = (
    "coeffs",
    "cov-error",
    "fem-error",
    "convergence",
    "sample",
    "loglik",
    "fit",
    "simulate-study",
    "dump-mesh",
)
STOCHASTIC_COMMANDS: frozenset[str] = frozenset(
    {"fem-error", "convergence", "sample", "simulate-study"}
)
SOURCES: tuple[str, ...] = ("rational", "matern")


@dataclass(frozen=True)
class ExperimentConfig:
    """Every parameter of one command-line run.

    Model parameters are given either as `nu` or as `beta`; the other is
    derived with d = 2. Fields a command does not use keep their defaults.

    Attributes:
        command: str
            The subcommand.
        seed: int | None
            Master seed, mandatory for stochastic commands.
        out: pathlib.Path | None
            Output file, standard output when None.
        threads: int
            Worker threads for independent repetitions.
        fmt: OutputFormat
            CSV or JSON.
        beta, nu, kappa, phi2, sigma2: float | None
            Model parameters.
        practical_range: float | None
            Alternative to kappa: sqrt(8 nu)/practical_range.
        m_list: tuple[int, ...]
            Rational degrees.
        delta: float | None
            Fitting interval end, default per degree.
        cells: int
            Cells per side of the unit-square mesh.
        extension: float
            Mesh extension beyond the unit square.
        bc: BoundaryCondition
            Boundary condition.
        mesh_path, data_path: pathlib.Path | None
            Input mesh and observation CSV.
        model_path, mesh_out: pathlib.Path | None
            Targets of the model dump and the mesh dump.
        n_samples: int
            Number of fields drawn by `sample`.
        nu_grid: tuple[float, ...]
            Smoothness values of `cov-error`.
        error_range: float
            Upper end of the distance interval of `cov-error`.
        n_points: int
            Grid points of `cov-error`.
        quadrature_nodes: int
            Node count of the quadrature baseline.
        node_counts: tuple[int, ...]
            Nodes per side of the `fem-error` meshes.
        standard_betas: tuple[int, ...]
            Integer exponents of the non-fractional columns of `fem-error`.
        n_locations: int
            Random observation locations timed by `fem-error`.
        levels: int
            Number of h-halving meshes of `convergence`.
        replicates, n_obs, repetitions: int
            Desk-scale knobs of `simulate-study`.
        source: str
            Data source of `simulate-study`, rational or matern.
        init: tuple[float, float, float, float] | None
            Initial (kappa, phi2, sigma2, nu) of `fit`.
        fixed: tuple[str, ...]
            Parameters `fit` holds at their initial value.
    """

    command: str
    seed: int | None = None
    out: pathlib.Path | None = None
    threads: int = 1
    fmt: OutputFormat = OutputFormat.CSV
    beta: float | None = None
    nu: float | None = None
    kappa: float | None = None
    phi2: float = 1.0
    sigma2: float = 0.0
    practical_range: float | None = None
    m_list: tuple[int, ...] = (1,)
    delta: float | None = None
    cells: int = 16
    extension: float = 0.0
    bc: BoundaryCondition = BoundaryCondition.NEUMANN
    mesh_path: pathlib.Path | None = None
    data_path: pathlib.Path | None = None
    model_path: pathlib.Path | None = None
    mesh_out: pathlib.Path | None = None
    n_samples: int = 1
    nu_grid: tuple[float, ...] = (0.5, 1.0)
    error_range: float = 2.0
    n_points: int = 2000
    quadrature_nodes: int = 12
    node_counts: tuple[int, ...] = (57, 85, 115)
    standard_betas: tuple[int, ...] = (2, 3, 4)
    n_locations: int = 1000
    levels: int = 4
    replicates: int = 10
    n_obs: int = 300
    repetitions: int = 10
    source: str = "rational"
    init: tuple[float, float, float, float] | None = None
    fixed: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for name in ("m_list", "nu_grid", "node_counts", "standard_betas", "fixed"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "fmt", OutputFormat(self.fmt))
        object.__setattr__(self, "bc", BoundaryCondition(self.bc))
        validate_config(self)

    @classmethod
    def from_mapping(cls, values: dict[str, Any]) -> "ExperimentConfig":
        """Builds the configuration from parsed arguments, ignoring unknown keys
        and None values."""
        known = {item.name for item in fields(cls)}
        return cls(**{k: v for k, v in values.items() if k in known and v is not None})

    @property
    def m(self) -> int:
        """The first rational degree."""
        return self.m_list[0]

    def recorded(self) -> dict[str, Any]:
        """The configuration as plain values, for the comment line of outputs."""
        out = {}
        for key, value in asdict(self).items():
            if isinstance(value, tuple):
                value = list(value)
            elif isinstance(value, (pathlib.Path, OutputFormat, BoundaryCondition)):
                value = str(getattr(value, "value", value))
            out[key] = value
        return out


def _positive(name: str, value: float | None) -> None:
    if value is not None and not (value > 0 and math.isfinite(value)):
        raise ValidationError(f"{name} must be positive, got {value}")


def validate_config(config: ExperimentConfig) -> None:
    """Checks every value before any computation.

    Args:
        config (ExperimentConfig): Represents the configuration to be validated.

    Raises:
        ValidationError: On an unknown command, a missing seed for a
            stochastic command, or an inadmissible value.
    """
    if config.command not in COMMANDS:
        raise ValidationError(f"unknown command {config.command!r}")
    if config.command in STOCHASTIC_COMMANDS and config.seed is None:
        raise ValidationError(f"command {config.command!r} is stochastic and needs --seed")
    if config.seed is not None and config.seed < 0:
        raise ValidationError(f"seed must be nonnegative, got {config.seed}")
    for name in ("beta", "nu", "kappa", "phi2", "practical_range", "delta", "error_range"):
        _positive(name, getattr(config, name))
    if config.sigma2 < 0:
        raise ValidationError(f"sigma2 must be nonnegative, got {config.sigma2}")
    if config.beta is not None and config.nu is not None:
        if abs(config.beta - (config.nu / 2.0 + 0.5)) > 1e-12:
            raise ValidationError("give either beta or nu, they disagree")
    if config.kappa is not None and config.practical_range is not None:
        raise ValidationError("give either kappa or practical_range")
    if not config.m_list or any(not 1 <= m <= MAX_DEGREE for m in config.m_list):
        raise ValidationError(f"degrees must lie in [1, {MAX_DEGREE}], got {config.m_list}")
    if config.delta is not None and not config.delta < 1:
        raise ValidationError(f"delta must lie in (0, 1), got {config.delta}")
    for name in (
        "threads", "cells", "n_samples", "n_points", "quadrature_nodes", "n_locations",
        "replicates", "n_obs", "repetitions",
    ):
        if getattr(config, name) < 1:
            raise ValidationError(f"{name} must be at least 1, got {getattr(config, name)}")
    if config.levels < 2:
        raise ValidationError(f"convergence needs at least two meshes, got {config.levels}")
    if config.extension < 0:
        raise ValidationError(f"extension must be nonnegative, got {config.extension}")
    if any(n < 3 for n in config.node_counts):
        raise ValidationError(f"meshes need at least 3 nodes per side, got {config.node_counts}")
    if any(b < 1 for b in config.standard_betas):
        raise ValidationError(f"standard exponents must be positive integers, got {config.standard_betas}")
    if any(not nu > 0 for nu in config.nu_grid) or not config.nu_grid:
        raise ValidationError(f"smoothness values must be positive, got {config.nu_grid}")
    if config.source not in SOURCES:
        raise ValidationError(f"source must be one of {SOURCES}, got {config.source!r}")
    if config.init is not None:
        if len(config.init) != 4 or any(not v > 0 for v in config.init):
            raise ValidationError("init needs four positive values kappa phi2 sigma2 nu")
    for path in (config.mesh_path, config.data_path):
        if path is not None and not path.is_file():
            raise ValidationError(f"no such file: {path}")
    if config.command in ("loglik", "fit") and config.data_path is None:
        raise ValidationError(f"command {config.command!r} needs --data")
    if config.command == "loglik" and not config.sigma2 > 0:
        raise ValidationError("loglik needs a positive --sigma2")


def build_mesh(config: ExperimentConfig) -> TriMesh:
    """The mesh from `mesh_path`, or the structured unit-square mesh."""
    if config.mesh_path is not None:
        return load_mesh(config.mesh_path)
    return build_rect_mesh(config.cells, config.cells, Rect(0.0, 0.0, 1.0, 1.0), config.extension)


def matern_params(config: ExperimentConfig, default_nu: float = 0.5) -> MaternParams:
    """Matérn parameters from nu or beta, and kappa or the practical range.

    Without either scale the practical range defaults to 0.2.
    """
    if config.nu is not None:
        nu = config.nu
    elif config.beta is not None:
        nu = 2.0 * config.beta - 1.0
    else:
        nu = default_nu
    if config.kappa is not None:
        return MaternParams(config.kappa, config.phi2, nu, config.sigma2)
    return MaternParams.from_range(config.practical_range or 0.2, nu, config.phi2, config.sigma2)
