"""Provide the dump and load functions for meshes, observations and models.

Examples:

    >>> import tempfile
    >>> from pathlib import Path
    >>> from rational_spde.models.mesh import build_rect_mesh
    >>> from rational_spde.persistence.serializer import dump_mesh, load_mesh

    >>> mesh = build_rect_mesh(3, 2, extension=0.4)
    >>> with tempfile.TemporaryDirectory() as folder:
    ...     path = Path(folder) / "square.mesh"
    ...     dump_mesh(mesh, path)
    ...     loaded = load_mesh(path)
    >>> loaded is mesh
    False
    >>> (loaded.n_nodes, loaded.n_triangles) == (mesh.n_nodes, mesh.n_triangles)
    True
    >>> loaded.rect == mesh.rect
    True

The module contains the following functions:
- `dump_mesh`: Writes the mesh text file.
- `load_mesh`: Reads the mesh text file.
- `serialize`: Produces the header and body records of a mesh.
- `deserialize`: Rebuilds a mesh from the header and body records.
- `dump_observations`: Writes observations as CSV `x,y,replicate,value`.
- `load_observations`: Reads observations from CSV `x,y,replicate,value`.
- `dump_model`: Writes the model description and its matrices.
- `load_rational`: Reads the rational approximation of a dumped model.
- `load_model_matrices`: Reads the matrices of a dumped model.
"""

import csv
import json
import logging
import pathlib
from collections import defaultdict

import numpy as np
from scipy import sparse

from rational_spde.errors import ShapeError, ValidationError
from rational_spde.models.flags import NodeFlag
from rational_spde.models.mesh import Rect, TriMesh
from rational_spde.models.observations import ObservationSet
from rational_spde.models.rational import RationalApprox
from rational_spde.models.spde import SpdeModel
from rational_spde.persistence.file_format import MeshBody, MeshHeader
from rational_spde.persistence.matrix_market import read_matrix, write_matrix

logger = logging.getLogger(__name__)

FORMAT_VERSION: int = 1
OBSERVATION_FIELDS: tuple[str, ...] = ("x", "y", "replicate", "value")
MODEL_MATRICES: tuple[str, ...] = ("P_l", "P_r", "Q")


def dump_mesh(mesh: TriMesh, path: pathlib.Path) -> None:
    """Writes the mesh text file.

    Args:
        mesh (TriMesh): The mesh.
        path (pathlib.Path): Target file.
    """
    header, body = serialize(mesh)
    with path.open(mode="w", encoding="utf-8") as file:
        header.write(file)
        body.write(file)
    logger.debug("dumped %d nodes to %s", mesh.n_nodes, path)


def load_mesh(path: pathlib.Path) -> TriMesh:
    """Reads the mesh text file.

    Args:
        path (pathlib.Path): Location of the file.

    Raises:
        MeshError: On a malformed file or an invalid triangulation.

    Returns:
        TriMesh: The mesh.
    """
    with path.open("r", encoding="utf-8") as file:
        header = MeshHeader.read(file)
        body = MeshBody.read(header, file)
    return deserialize(header, body)


def serialize(mesh: TriMesh) -> tuple[MeshHeader, MeshBody]:
    """Produces the header and body records of a mesh."""
    header = MeshHeader(mesh.n_nodes, mesh.n_triangles)
    columns = np.array([flag.columns for flag in mesh.flags], dtype=np.int64)
    return header, MeshBody(mesh.nodes, columns, mesh.triangles)


def deserialize(header: MeshHeader, body: MeshBody) -> TriMesh:
    """Rebuilds a mesh from its records.

    The unextended rectangle is recovered as the bounding box of the core
    nodes.
    """
    flags = [NodeFlag.from_columns(*row) for row in body.flag_columns]
    boundary = [i for i, flag in enumerate(flags) if NodeFlag.BOUNDARY in flag]
    core = [i for i, flag in enumerate(flags) if NodeFlag.CORE in flag]
    rect = None
    if core:
        lower = body.nodes[core].min(axis=0)
        upper = body.nodes[core].max(axis=0)
        rect = Rect(float(lower[0]), float(lower[1]), float(upper[0]), float(upper[1]))
    return TriMesh(
        nodes=body.nodes,
        triangles=body.triangles,
        boundary_nodes=boundary,
        core_nodes=core,
        rect=rect,
    )


def dump_observations(obs: ObservationSet, path: pathlib.Path) -> None:
    """Writes observations as CSV `x,y,replicate,value`, replicate-major."""
    with path.open(mode="w", encoding="utf-8", newline="") as file:
        writer = csv.writer(file)
        writer.writerow(OBSERVATION_FIELDS)
        for replicate, values in enumerate(obs.y):
            for (x, y), value in zip(obs.locations, values):
                writer.writerow([repr(float(x)), repr(float(y)), replicate, repr(float(value))])


def load_observations(
    path: pathlib.Path, mesh: TriMesh, sigma2: float | None = None
) -> ObservationSet:
    """Reads observations from CSV `x,y,replicate,value`.

    Every replicate must observe the same locations in the same order.

    Args:
        path (pathlib.Path): The CSV file with a header row.
        mesh (TriMesh): Mesh the basis is evaluated on.
        sigma2 (float | None): Nugget, when known.

    Raises:
        ValidationError: On missing columns or unparsable values.
        ShapeError: When replicates observe different locations.
        LocateError: When a location lies outside the mesh.

    Returns:
        ObservationSet: The observations.
    """
    replicates: dict[int, list[tuple[float, float, float]]] = defaultdict(list)
    with path.open("r", encoding="utf-8", newline="") as file:
        reader = csv.DictReader(file)
        missing = set(OBSERVATION_FIELDS) - set(reader.fieldnames or ())
        if missing:
            raise ValidationError(f"{path.name}: missing columns {sorted(missing)}")
        try:
            for row in reader:
                replicates[int(row["replicate"])].append(
                    (float(row["x"]), float(row["y"]), float(row["value"]))
                )
        except (TypeError, ValueError) as error:
            raise ValidationError(f"{path.name}: {error}") from error
    if not replicates:
        raise ValidationError(f"{path.name}: no observations")

    records = [np.array(replicates[key]) for key in sorted(replicates)]
    locations = records[0][:, :2]
    for key, record in zip(sorted(replicates), records):
        if record.shape != records[0].shape or not np.array_equal(record[:, :2], locations):
            raise ShapeError(f"replicate {key} observes different locations")
    y = np.stack([record[:, 2] for record in records])
    logger.info("loaded %d replicates of %d observations", *y.shape)
    return ObservationSet.build(mesh, locations, y, sigma2)


def dump_model(
    model: SpdeModel, path: pathlib.Path, mesh_path: pathlib.Path | None = None
) -> None:
    """Writes the model description as JSON and its matrices next to it.

    The matrices go to `P_l.mtx`, `P_r.mtx` and `Q.mtx` in the directory of
    `path`; the JSON refers to them by file name.

    Args:
        model (SpdeModel): The model.
        path (pathlib.Path): The JSON file.
        mesh_path (pathlib.Path | None): Mesh file the model was built on.
    """
    folder = path.parent
    matrices = {"P_l": (model.P_l, False), "P_r": (model.P_r, False), "Q": (model.Q, True)}
    for name, (matrix, symmetric) in matrices.items():
        write_matrix(folder / f"{name}.mtx", matrix, symmetric)
    ra = model.ra
    document = {
        "format_version": FORMAT_VERSION,
        "beta": ra.beta,
        "m": ra.m,
        "m_beta": ra.m_beta,
        "beta_hat": ra.beta_hat,
        "delta": ra.delta,
        "c": ra.c.tolist(),
        "b": ra.b.tolist(),
        "r1": ra.r1.tolist(),
        "r2": ra.r2.tolist(),
        "sup_err": ra.sup_err,
        "tau": model.tau,
        "tau_tilde": model.tau_tilde,
        "scale": model.ops.scale,
        "boundary_condition": model.ops.bc.value,
        "n": model.n,
        "mesh": None if mesh_path is None else str(mesh_path),
        "matrices": {name: f"{name}.mtx" for name in matrices},
    }
    path.write_text(json.dumps(document, indent=2), encoding="utf-8")
    logger.info("dumped model beta=%.4g m=%d to %s", ra.beta, ra.m, path)


def _read_document(path: pathlib.Path) -> dict:
    document = json.loads(path.read_text(encoding="utf-8"))
    if document.get("format_version") != FORMAT_VERSION:
        raise ValidationError("Unsupported file format version")
    return document


def load_rational(path: pathlib.Path) -> RationalApprox:
    """Reads the rational approximation of a dumped model.

    Raises:
        ValidationError: On an unsupported format version.
    """
    document = _read_document(path)
    return RationalApprox(
        beta=float(document["beta"]),
        m=int(document["m"]),
        m_beta=int(document["m_beta"]),
        beta_hat=float(document["beta_hat"]),
        delta=float(document["delta"]),
        c=np.array(document["c"], dtype=float),
        b=np.array(document["b"], dtype=float),
        r1=np.array(document["r1"], dtype=float),
        r2=np.array(document["r2"], dtype=float),
        sup_err=float(document["sup_err"]),
    )


def load_model_matrices(path: pathlib.Path) -> dict[str, sparse.csr_matrix]:
    """Reads the matrices of a dumped model, keyed by `P_l`, `P_r` and `Q`.

    Raises:
        ShapeError: When a matrix does not match the recorded size.
    """
    document = _read_document(path)
    matrices = {
        name: read_matrix(path.parent / document["matrices"][name]) for name in MODEL_MATRICES
    }
    for name, matrix in matrices.items():
        if matrix.shape != (document["n"], document["n"]):
            raise ShapeError(f"{name} has shape {matrix.shape}, model has n={document['n']}")
    return matrices
