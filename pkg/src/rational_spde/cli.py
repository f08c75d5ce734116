"""Provide the command-line interface.

Every subcommand parses its arguments into a validated `ExperimentConfig`,
runs, and renders its result as CSV or JSON to `--out` or standard output.
Exit codes: 0 on success, 2 on invalid input, 1 on numerical failure.

The module contains the following functions:
- `build_parser`: The argument parser with all subcommands.
- `parse_config`: Parses arguments into a configuration.
- `run`: Runs the command of a configuration.
- `main`: The console entry point.
"""

import argparse
import logging
import pathlib
import sys
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from rational_spde.errors import NumericalError, ValidationError
from rational_spde.experiments.coeffs import coefficient_table
from rational_spde.experiments.config import (
    ExperimentConfig,
    SOURCES,
    build_mesh,
    matern_params,
)
from rational_spde.experiments.convergence import (
    convergence_table,
    covariance_errors,
    strong_errors,
)
from rational_spde.experiments.cov_error import cov_error_table
from rational_spde.experiments.estimation import (
    STUDY_TRUTH,
    fit_summary,
    loglik_summary,
    simulate_study,
)
from rational_spde.experiments.fem_error import fem_error_table
from rational_spde.experiments.field import matern_model, sample_table
from rational_spde.inference.fit import PARAMETERS, FitOptions, mle_fit
from rational_spde.models.flags import BoundaryCondition
from rational_spde.models.matern import MaternParams
from rational_spde.persistence.serializer import (
    dump_mesh,
    dump_model,
    load_observations,
    serialize,
)
from rational_spde.view.renderer import OutputFormat, Renderer, Table

logger = logging.getLogger(__name__)

LOG_FORMAT: str = "%(levelname)s: %(name)s: %(message)s"

Result = Table | Mapping[str, Any] | None


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="master seed, required by stochastic commands")
    common.add_argument("--out", type=pathlib.Path, help="output file (default: standard output)")
    common.add_argument("--threads", type=int, default=1, help="worker threads (default: 1)")
    common.add_argument(
        "--format",
        dest="fmt",
        choices=[f.value for f in OutputFormat],
        default=OutputFormat.CSV.value,
        help="output format (default: csv)",
    )
    common.add_argument("-v", "--verbose", action="count", default=0, help="more logging")
    common.add_argument("-q", "--quiet", action="count", default=0, help="less logging")
    return common


def _model_flags(parser: argparse.ArgumentParser) -> None:
    smoothness = parser.add_mutually_exclusive_group()
    smoothness.add_argument("--nu", type=float, help="Matérn smoothness (default: 0.5)")
    smoothness.add_argument("--beta", type=float, help="exponent, nu/2 + 1/2")
    scale = parser.add_mutually_exclusive_group()
    scale.add_argument("--kappa", type=float, help="range parameter")
    scale.add_argument("--practical-range", type=float, help="sqrt(8 nu)/kappa")
    parser.add_argument("--phi2", type=float, default=1.0, help="marginal variance")
    parser.add_argument("--sigma2", type=float, default=0.0, help="nugget variance")


def _mesh_flags(parser: argparse.ArgumentParser, cells: int = 16) -> None:
    parser.add_argument("--mesh", dest="mesh_path", type=pathlib.Path, help="mesh file")
    parser.add_argument("--cells", type=int, default=cells, help="cells per side of the unit square")
    parser.add_argument("--extension", type=float, default=0.0, help="mesh margin")
    parser.add_argument(
        "--bc",
        choices=[b.value for b in BoundaryCondition],
        default=BoundaryCondition.NEUMANN.value,
        help="boundary condition",
    )


def _degrees(parser: argparse.ArgumentParser, default: Sequence[int]) -> None:
    parser.add_argument(
        "--m", dest="m_list", type=int, nargs="+", default=list(default), help="rational degrees"
    )
    parser.add_argument("--delta", type=float, help="fitting interval end")


def build_parser() -> argparse.ArgumentParser:
    """The argument parser with all subcommands."""
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="rational-spde",
        description="Rational SPDE approximations of fractional Gaussian random fields.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    coeffs = commands.add_parser("coeffs", parents=[common], help="rational coefficients")
    coeffs.add_argument("--beta", type=float, default=0.75)
    _degrees(coeffs, (1, 2, 3))

    cov_error = commands.add_parser(
        "cov-error", parents=[common], help="covariance errors on the plane"
    )
    cov_error.add_argument("--nu", dest="nu_grid", type=float, nargs="+", default=[0.5, 1.0])
    _degrees(cov_error, (1, 2, 3))
    cov_error.add_argument("--range", dest="error_range", type=float, default=2.0)
    cov_error.add_argument("--practical-range", type=float, default=1.0)
    cov_error.add_argument("--points", dest="n_points", type=int, default=2000)
    cov_error.add_argument("--quadrature-nodes", type=int, default=12)

    fem_error = commands.add_parser(
        "fem-error", parents=[common], help="finite element covariance errors and timings"
    )
    fem_error.add_argument("--beta", type=float, default=0.75)
    _degrees(fem_error, (1, 2, 3))
    fem_error.add_argument("--nodes", dest="node_counts", type=int, nargs="+", default=[57, 85, 115])
    fem_error.add_argument("--standard-betas", type=int, nargs="*", default=[2, 3, 4])
    fem_error.add_argument("--practical-range", type=float, default=0.1)
    fem_error.add_argument("--locations", dest="n_locations", type=int, default=1000)

    convergence = commands.add_parser(
        "convergence", parents=[common], help="covariance and strong convergence rates in h"
    )
    convergence.add_argument("--beta", type=float, default=0.75)
    _degrees(convergence, (3,))
    convergence.add_argument("--cells", type=int, default=4, help="cells of the coarsest mesh")
    convergence.add_argument("--levels", type=int, default=4)
    convergence.add_argument("--samples", dest="n_samples", type=int, default=100)
    convergence.add_argument("--practical-range", type=float, default=0.5)

    sample = commands.add_parser("sample", parents=[common], help="draw fields")
    _model_flags(sample)
    _mesh_flags(sample)
    _degrees(sample, (1,))
    sample.add_argument("--n", dest="n_samples", type=int, default=1)
    sample.add_argument("--dump-model", dest="model_path", type=pathlib.Path)
    sample.add_argument("--dump-mesh", dest="mesh_out", type=pathlib.Path)

    for name, help_text in (("loglik", "log-likelihood"), ("fit", "maximum likelihood")):
        command = commands.add_parser(name, parents=[common], help=help_text)
        _model_flags(command)
        _mesh_flags(command)
        _degrees(command, (1,))
        command.add_argument("--data", dest="data_path", type=pathlib.Path, required=True)
        command.set_defaults(fmt=OutputFormat.JSON.value)
    fit = commands.choices["fit"]
    fit.add_argument(
        "--init", type=float, nargs=4, metavar=("KAPPA", "PHI2", "SIGMA2", "NU")
    )
    fit.add_argument("--fix", dest="fixed", nargs="*", choices=PARAMETERS, default=[])

    study = commands.add_parser(
        "simulate-study", parents=[common], help="parameter recovery study"
    )
    study.add_argument("--kappa", type=float, default=STUDY_TRUTH.kappa)
    study.add_argument("--phi2", type=float, default=STUDY_TRUTH.phi2)
    study.add_argument("--sigma2", type=float, default=STUDY_TRUTH.sigma2)
    study.add_argument("--nu", type=float, default=STUDY_TRUTH.nu)
    _degrees(study, (1,))
    study.add_argument("--cells", type=int, default=20)
    study.add_argument("--replicates", type=int, default=10)
    study.add_argument("--obs", dest="n_obs", type=int, default=300)
    study.add_argument("--repetitions", type=int, default=10)
    study.add_argument("--source", choices=SOURCES, default="rational")
    study.set_defaults(fmt=OutputFormat.JSON.value)

    dump = commands.add_parser("dump-mesh", parents=[common], help="write the mesh text file")
    dump.add_argument("--cells", type=int, default=16)
    dump.add_argument("--extension", type=float, default=0.0)
    return parser


def parse_config(argv: Sequence[str] | None = None) -> tuple[ExperimentConfig, int]:
    """Parses arguments into a configuration and a logging level.

    Raises:
        ValidationError: On inadmissible values.
        SystemExit: On unparsable arguments, with status 2.
    """
    args = vars(build_parser().parse_args(argv))
    level = logging.WARNING - 10 * args.pop("verbose") + 10 * args.pop("quiet")
    for key in ("m_list", "nu_grid", "node_counts", "standard_betas", "fixed", "init"):
        if args.get(key) is not None:
            args[key] = tuple(args[key])
    return ExperimentConfig.from_mapping(args), level


def run_coeffs(config: ExperimentConfig) -> Result:
    return coefficient_table(config.beta, config.m_list, config.delta)


def run_cov_error(config: ExperimentConfig) -> Result:
    return cov_error_table(
        config.nu_grid,
        config.m_list,
        practical_range=config.practical_range,
        error_range=config.error_range,
        n_points=config.n_points,
        quadrature_nodes=config.quadrature_nodes,
        delta=config.delta,
    )


def run_fem_error(config: ExperimentConfig) -> Result:
    return fem_error_table(
        config.node_counts,
        config.m_list,
        config.standard_betas,
        beta=config.beta,
        practical_range=config.practical_range,
        n_locations=config.n_locations,
        seed=config.seed,
    )


def run_convergence(config: ExperimentConfig) -> Result:
    params = MaternParams.from_range(config.practical_range, 2.0 * config.beta - 1.0)
    strong = strong_errors(
        params, config.cells, config.levels, config.m, config.n_samples, config.seed
    )
    covariance = covariance_errors(params, config.cells, config.levels, config.m)
    return convergence_table(covariance, strong, config.beta, config.m)


def run_sample(config: ExperimentConfig) -> Result:
    mesh = build_mesh(config)
    model = matern_model(mesh, matern_params(config), config.m, config.bc, config.delta)
    if config.mesh_out is not None:
        dump_mesh(mesh, config.mesh_out)
    if config.model_path is not None:
        dump_model(model, config.model_path, config.mesh_out or config.mesh_path)
    return sample_table(model, config.n_samples, config.seed)


def run_loglik(config: ExperimentConfig) -> Result:
    mesh = build_mesh(config)
    obs = load_observations(config.data_path, mesh, config.sigma2)
    return loglik_summary(obs, mesh, matern_params(config), config.m, config.bc, config.delta)


def run_fit(config: ExperimentConfig) -> Result:
    mesh = build_mesh(config)
    obs = load_observations(config.data_path, mesh)
    if config.init is not None:
        kappa, phi2, sigma2, nu = config.init
        init = MaternParams(kappa=kappa, phi2=phi2, nu=nu, sigma2=sigma2)
    else:
        init = matern_params(config)
        if not init.sigma2 > 0:
            sigma2 = 0.1 * float(np.var(obs.y))
            init = MaternParams(init.kappa, init.phi2, init.nu, sigma2)
    opts = FitOptions(bc=config.bc, delta=config.delta, fixed=frozenset(config.fixed))
    return fit_summary(mle_fit(obs, mesh, config.m, init, opts))


def run_simulate_study(config: ExperimentConfig) -> Result:
    truth = MaternParams(config.kappa, config.phi2, config.nu, config.sigma2)
    return simulate_study(
        truth,
        replicates=config.replicates,
        n_obs=config.n_obs,
        repetitions=config.repetitions,
        seed=config.seed,
        m=config.m,
        cells=config.cells,
        source=config.source,
        threads=config.threads,
    )


def run_dump_mesh(config: ExperimentConfig) -> Result:
    mesh = build_mesh(config)
    if config.out is not None:
        dump_mesh(mesh, config.out)
        return None
    header, body = serialize(mesh)
    header.write(sys.stdout)
    body.write(sys.stdout)
    return None


RUNNERS: dict[str, Callable[[ExperimentConfig], Result]] = {
    "coeffs": run_coeffs,
    "cov-error": run_cov_error,
    "fem-error": run_fem_error,
    "convergence": run_convergence,
    "sample": run_sample,
    "loglik": run_loglik,
    "fit": run_fit,
    "simulate-study": run_simulate_study,
    "dump-mesh": run_dump_mesh,
}


def run(config: ExperimentConfig) -> None:
    """Runs the command of a configuration and writes its result."""
    result = RUNNERS[config.command](config)
    if result is not None:
        Renderer(config.recorded(), config.fmt).render(result).write(config.out)


def main(argv: Sequence[str] | None = None) -> int:
    """The console entry point; returns the exit code."""
    try:
        config, level = parse_config(argv)
    except ValidationError as error:
        logging.basicConfig(format=LOG_FORMAT)
        logger.error("%s", error)
        return 2
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)
    try:
        run(config)
    except (ValidationError, OSError) as error:
        logger.error("%s", error)
        return 2
    except NumericalError as error:
        logger.error("numerical failure: %s", error)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
