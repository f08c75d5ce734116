"""Provide likelihood evaluation, fitting and the parameter recovery study.

The study repeatedly simulates replicated noisy observations at random
locations in the unit square, either from the discretized model or from an
exact Matérn field, and fits (kappa, phi2, sigma2, nu) by maximum likelihood
on a mesh extended beyond the square. Repetition i draws from its own seed,
spawned from the master seed, so results do not depend on the number of
threads.

The module contains the following functions:
- `loglik_summary`: The log-likelihood at given parameters.
- `fit_summary`: The maximum-likelihood estimate.
- `simulate_observations`: Replicated noisy observations of a field.
- `simulate_study`: Repeated simulation and fitting.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any

import numpy as np
import scipy.linalg
from scipy.spatial.distance import cdist

from rational_spde.experiments.field import matern_model
from rational_spde.inference.fit import (
    PARAMETERS,
    FitResult,
    evaluate_log_likelihood,
    mle_fit,
)
from rational_spde.models.fem import CoefficientField, assemble
from rational_spde.models.flags import BoundaryCondition
from rational_spde.models.matern import MaternParams
from rational_spde.models.mesh import Rect, TriMesh, build_rect_mesh
from rational_spde.models.observations import ObservationSet
from rational_spde.models.spde import SpdeModel, sample
from rational_spde.oracle.covariance import matern_cov

logger = logging.getLogger(__name__)

STUDY_TRUTH = MaternParams(kappa=10.0, phi2=1.0, nu=0.5, sigma2=0.1)
STUDY_CELLS: int = 20
INIT_SPREAD: float = 0.5


def _params_record(params: MaternParams) -> dict[str, float]:
    return {name: float(getattr(params, name)) for name in PARAMETERS}


def loglik_summary(
    obs: ObservationSet,
    mesh: TriMesh,
    params: MaternParams,
    m: int = 1,
    bc: BoundaryCondition = BoundaryCondition.NEUMANN,
    delta: float | None = None,
) -> dict[str, Any]:
    """The log-likelihood at `params`, whose sigma2 is the nugget."""
    base = assemble(mesh, CoefficientField(kappa2=0.0), bc)
    value = evaluate_log_likelihood(params, obs, base, m, delta)
    return {**_params_record(params), "beta": params.beta, "m": m, "loglik": value}


def fit_summary(result: FitResult) -> dict[str, Any]:
    """The estimate as a flat mapping."""
    return {
        **_params_record(result.params),
        "practical_range": result.params.practical_range,
        "loglik": result.loglik,
        "init_loglik": result.init_loglik,
        "n_evaluations": result.n_evaluations,
        "converged": result.converged,
    }


def simulate_observations(
    model: SpdeModel,
    truth: MaternParams,
    n_obs: int,
    replicates: int,
    rng: np.random.Generator,
    source: str = "rational",
) -> ObservationSet:
    """Noisy observations of `replicates` fields at `n_obs` random locations
    in the unit square.

    Args:
        model (SpdeModel): The discretized model, used when `source` is
            rational.
        truth (MaternParams): Parameters; sigma2 is the noise variance.
        n_obs (int): Number of locations.
        replicates (int): Number of independent fields.
        rng (np.random.Generator): Random source.
        source (str): `rational` to sample the discretized model, `matern`
            to sample the exact Matérn field at the locations.

    Returns:
        ObservationSet: The observations with the true nugget.
    """
    mesh = model.ops.mesh
    locations = rng.uniform(0.0, 1.0, size=(n_obs, 2))
    obs = ObservationSet.build(mesh, locations, np.zeros((replicates, n_obs)), truth.sigma2)
    if source == "rational":
        fields = sample(model, replicates, rng)
        latent = np.asarray(model.ops.restrict(obs.A) @ fields.T).T
    else:
        cov = matern_cov(cdist(locations, locations), truth)
        factor = scipy.linalg.cholesky(cov, lower=True)
        latent = (factor @ rng.standard_normal((n_obs, replicates))).T
    y = latent + math.sqrt(truth.sigma2) * rng.standard_normal(latent.shape)
    return ObservationSet(obs.locations, y, obs.A, truth.sigma2)


def _random_init(truth: MaternParams, rng: np.random.Generator) -> MaternParams:
    factors = np.exp(rng.uniform(-INIT_SPREAD, INIT_SPREAD, size=4))
    return MaternParams(
        kappa=truth.kappa * factors[0],
        phi2=truth.phi2 * factors[1],
        sigma2=truth.sigma2 * factors[2],
        nu=truth.nu * factors[3],
    )


def simulate_study(
    truth: MaternParams = STUDY_TRUTH,
    replicates: int = 10,
    n_obs: int = 300,
    repetitions: int = 10,
    seed: int = 0,
    m: int = 1,
    cells: int = STUDY_CELLS,
    source: str = "rational",
    threads: int = 1,
) -> dict[str, Any]:
    """Repeated simulation and maximum-likelihood fitting.

    The mesh covers the unit square with `cells` cells per side, extended by
    twice the practical range on every side.

    Args:
        truth (MaternParams): True parameters, sigma2 > 0.
        replicates (int): Fields per data set. Defaults to 10.
        n_obs (int): Locations per data set. Defaults to 300.
        repetitions (int): Data sets. Defaults to 10.
        seed (int): Master seed.
        m (int): Rational degree of the simulation and fitting models.
        cells (int): Cells per side of the unit square. Defaults to 20.
        source (str): `rational` or `matern`.
        threads (int): Worker threads. Defaults to 1.

    Returns:
        dict[str, Any]: Truth, mean and standard deviation of every
            parameter, and the individual estimates.
    """
    mesh = build_rect_mesh(cells, cells, Rect(0.0, 0.0, 1.0, 1.0), 2.0 * truth.practical_range)
    model = matern_model(mesh, truth, m)
    seeds = np.random.SeedSequence(seed).spawn(repetitions)
    logger.info(
        "study: %d repetitions of %dx%d observations on %d nodes (%s data)",
        repetitions, replicates, n_obs, mesh.n_nodes, source,
    )

    def repetition(index: int) -> FitResult:
        rng = np.random.default_rng(seeds[index])
        obs = simulate_observations(model, truth, n_obs, replicates, rng, source)
        result = mle_fit(obs, mesh, m, _random_init(truth, rng))
        logger.info("repetition %d: %s", index, _params_record(result.params))
        return result

    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(repetition, range(repetitions)))

    estimates = np.array([[getattr(r.params, name) for name in PARAMETERS] for r in results])
    spread = estimates.std(axis=0, ddof=1) if repetitions > 1 else np.zeros(len(PARAMETERS))
    return {
        "truth": _params_record(truth),
        "mean": dict(zip(PARAMETERS, estimates.mean(axis=0).tolist())),
        "std": dict(zip(PARAMETERS, spread.tolist())),
        "n_nodes": mesh.n_nodes,
        "source": source,
        "estimates": [fit_summary(r) for r in results],
    }
