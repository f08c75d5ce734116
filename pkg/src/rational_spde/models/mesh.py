"""Provide the triangulated rectangles the finite element spaces live on.

This module builds structured right-triangle meshes of axis-aligned
rectangles, optionally extended beyond the rectangle to push boundary effects
away from the region of interest, and evaluates the piecewise linear nodal
basis at arbitrary points.

Examples:

    >>> from rational_spde.models.mesh import Rect, build_rect_mesh

    >>> mesh = build_rect_mesh(2, 2, Rect(0.0, 0.0, 1.0, 1.0))
    >>> mesh.n_nodes, mesh.n_triangles
    (9, 8)
    >>> round(mesh.h, 12)
    0.707106781187

    >>> A = mesh.basis_matrix([(0.5, 0.5)])
    >>> A.toarray()[0, 4]
    1.0

The module contains the following classes:
- `Rect`: An axis-aligned rectangle.
- `TriMesh`: An immutable triangulation with node tags.

The module contains the following functions:
- `build_rect_mesh`: Builds the structured triangulation of a rectangle.
- `basis_eval_matrix`: Evaluates the nodal basis at points.
- `barycentric`: Barycentric coordinates of a point in several triangles.
- `validate_triangles`: Checks node indices and node usage.
- `validate_orientation`: Checks that every triangle is counterclockwise.
- `validate_edges`: Checks that no edge is shared by more than two triangles.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from rational_spde.errors import LocateError, MeshError
from rational_spde.models.flags import NodeFlag

logger = logging.getLogger(__name__)

HULL_TOLERANCE: float = 1e-10
LOCATE_CANDIDATES: int = 12


class Rect(NamedTuple):
    """An axis-aligned rectangle [x0, x1] x [y0, y1].

    Args:
        x0: float
            Left edge.
        y0: float
            Bottom edge.
        x1: float
            Right edge.
        y1: float
            Top edge.
    """

    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def width(self) -> float:
        """Extent along x."""
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        """Extent along y."""
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        """Area of the rectangle."""
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        """Midpoint of the rectangle."""
        return (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    def grow(self, margin: float) -> "Rect":
        """Returns the rectangle grown by `margin` on each side."""
        return Rect(
            self.x0 - margin, self.y0 - margin, self.x1 + margin, self.y1 + margin
        )


UNIT_SQUARE = Rect(0.0, 0.0, 1.0, 1.0)


@dataclass(frozen=True, eq=False)
class TriMesh:
    """An immutable triangulation of a planar domain.

    Attributes:
        nodes: np.ndarray
            Node coordinates, shape (n_nodes, 2).
        triangles: np.ndarray
            Node indices of every triangle, counterclockwise, shape
            (n_triangles, 3).
        boundary_nodes: np.ndarray
            Sorted indices of the nodes on the domain boundary.
        core_nodes: np.ndarray
            Sorted indices of the nodes inside the unextended rectangle.
        rect: Rect | None
            The unextended rectangle, when the mesh was built from one.

    Methods:
        h(self) -> float:
            Mesh width, the longest edge over all triangles.
        areas(self) -> np.ndarray:
            Area of every triangle.
        flags(self) -> list[NodeFlag]:
            Boundary/core flags of every node.
        nearest_node(self, point) -> int:
            Index of the node closest to a point.
        basis_matrix(self, points) -> sparse.csr_matrix:
            Nodal basis evaluated at points.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_nodes: np.ndarray
    core_nodes: np.ndarray
    rect: Rect | None = field(default=None)

    def __post_init__(self) -> None:
        for name, dtype in (
            ("nodes", float),
            ("triangles", np.int64),
            ("boundary_nodes", np.int64),
            ("core_nodes", np.int64),
        ):
            array = np.array(getattr(self, name), dtype=dtype)
            array.setflags(write=False)
            object.__setattr__(self, name, array)
        validate_triangles(self)
        validate_orientation(self)
        validate_edges(self)

    @property
    def n_nodes(self) -> int:
        """Number of nodes."""
        return len(self.nodes)

    @property
    def n_triangles(self) -> int:
        """Number of triangles."""
        return len(self.triangles)

    @cached_property
    def vertices(self) -> np.ndarray:
        """Vertex coordinates per triangle, shape (n_triangles, 3, 2)."""
        return self.nodes[self.triangles]

    @cached_property
    def areas(self) -> np.ndarray:
        """Signed area of every triangle (positive for a valid mesh)."""
        v = self.vertices
        e1 = v[:, 1] - v[:, 0]
        e2 = v[:, 2] - v[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @cached_property
    def h(self) -> float:
        """Mesh width: the maximum over triangles of the longest edge."""
        v = self.vertices
        edges = np.stack(
            [v[:, 1] - v[:, 0], v[:, 2] - v[:, 1], v[:, 0] - v[:, 2]], axis=1
        )
        return float(np.linalg.norm(edges, axis=2).max())

    @cached_property
    def diameter(self) -> float:
        """Diameter of the bounding box of the nodes."""
        return float(np.linalg.norm(self.nodes.max(axis=0) - self.nodes.min(axis=0)))

    @cached_property
    def flags(self) -> list[NodeFlag]:
        """Boundary/core flags of every node."""
        flags = [NodeFlag.INTERIOR] * self.n_nodes
        for index in self.boundary_nodes:
            flags[index] |= NodeFlag.BOUNDARY
        for index in self.core_nodes:
            flags[index] |= NodeFlag.CORE
        return flags

    @cached_property
    def interior_nodes(self) -> np.ndarray:
        """Sorted indices of the nodes not on the boundary."""
        return np.setdiff1d(np.arange(self.n_nodes), self.boundary_nodes)

    @cached_property
    def locator(self) -> cKDTree:
        """KD-tree over triangle centroids, used to pick location candidates."""
        return cKDTree(self.vertices.mean(axis=1))

    def nearest_node(self, point: Iterable[float]) -> int:
        """Index of the node closest to `point`."""
        distance = np.linalg.norm(self.nodes - np.asarray(point, dtype=float), axis=1)
        return int(np.argmin(distance))

    def basis_matrix(self, points: Iterable[Iterable[float]]) -> sparse.csr_matrix:
        """Nodal basis evaluated at `points`, see `basis_eval_matrix`."""
        return basis_eval_matrix(self, points)


def build_rect_mesh(
    nx: int, ny: int, rect: Rect = UNIT_SQUARE, extension: float = 0.0
) -> TriMesh:
    """Builds the structured triangulation of a rectangle.

    The rectangle is split into nx by ny cells, each cell into two right
    triangles along the same diagonal. With a positive extension, whole
    cells of the same size are appended on every side until the lattice
    covers the rectangle grown by `extension`, so the nodes of the
    unextended rectangle keep their coordinates.

    Args:
        nx (int): Number of cells along x inside `rect`.
        ny (int): Number of cells along y inside `rect`.
        rect (Rect): The rectangle. Defaults to the unit square.
        extension (float): Margin added on every side. Defaults to 0.

    Raises:
        MeshError: On zero cells, a degenerate rectangle or a negative
            extension.

    Returns:
        TriMesh: The triangulation, nodes numbered row by row.
    """
    rect = Rect(*map(float, rect))
    if nx < 1 or ny < 1:
        raise MeshError(f"need at least one cell per direction, got {nx}x{ny}")
    if not rect.width > 0 or not rect.height > 0:
        raise MeshError(f"degenerate rectangle {rect}")
    if not extension >= 0:
        raise MeshError(f"extension must be nonnegative, got {extension}")

    dx, dy = rect.width / nx, rect.height / ny
    ex = math.ceil(extension / dx - 1e-9) if extension > 0 else 0
    ey = math.ceil(extension / dy - 1e-9) if extension > 0 else 0
    i = np.arange(-ex, nx + ex + 1)
    j = np.arange(-ey, ny + ey + 1)
    xs = rect.x0 + rect.width * i / nx
    ys = rect.y0 + rect.height * j / ny
    columns = len(xs)

    grid_x, grid_y = np.meshgrid(xs, ys)
    nodes = np.column_stack([grid_x.ravel(), grid_y.ravel()])

    cell_i, cell_j = np.meshgrid(np.arange(columns - 1), np.arange(len(ys) - 1))
    a = (cell_j * columns + cell_i).ravel()
    b, c, d = a + 1, a + columns + 1, a + columns
    triangles = np.empty((2 * len(a), 3), dtype=np.int64)
    triangles[0::2] = np.column_stack([a, b, c])
    triangles[1::2] = np.column_stack([a, c, d])

    index_i, index_j = np.meshgrid(i, j)
    index_i, index_j = index_i.ravel(), index_j.ravel()
    on_boundary = (
        (index_i == i[0]) | (index_i == i[-1]) | (index_j == j[0]) | (index_j == j[-1])
    )
    in_core = (index_i >= 0) & (index_i <= nx) & (index_j >= 0) & (index_j <= ny)

    mesh = TriMesh(
        nodes=nodes,
        triangles=triangles,
        boundary_nodes=np.flatnonzero(on_boundary),
        core_nodes=np.flatnonzero(in_core),
        rect=rect,
    )
    logger.debug(
        "built %dx%d-cell mesh (+%d/%d extension cells): %d nodes, h=%.4g",
        nx, ny, ex, ey, mesh.n_nodes, mesh.h,
    )
    return mesh


def barycentric(mesh: TriMesh, candidates: np.ndarray, point: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of one point with respect to several triangles.

    Args:
        mesh (TriMesh): The mesh.
        candidates (np.ndarray): Triangle indices, shape (k,).
        point (np.ndarray): The point, shape (2,).

    Returns:
        np.ndarray: Coordinates, shape (k, 3), each row summing to one.
    """
    v = mesh.vertices[candidates]
    x0, y0 = v[:, 0, 0], v[:, 0, 1]
    x1, y1 = v[:, 1, 0], v[:, 1, 1]
    x2, y2 = v[:, 2, 0], v[:, 2, 1]
    px, py = point[0], point[1]
    det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
    lam1 = ((px - x0) * (y2 - y0) - (x2 - x0) * (py - y0)) / det
    lam2 = ((x1 - x0) * (py - y0) - (px - x0) * (y1 - y0)) / det
    return np.column_stack([1.0 - lam1 - lam2, lam1, lam2])


def _locate(
    mesh: TriMesh, point: np.ndarray, candidates: np.ndarray, tol: float
) -> tuple[int, np.ndarray] | None:
    lam = barycentric(mesh, candidates, point)
    inside = np.flatnonzero(lam.min(axis=1) >= -tol)
    if len(inside) == 0:
        return None
    first = inside[0]
    return int(candidates[first]), lam[first]


def basis_eval_matrix(
    mesh: TriMesh, points: Iterable[Iterable[float]]
) -> sparse.csr_matrix:
    """Evaluates the piecewise linear nodal basis at points.

    Row i of the result holds the barycentric coordinates of point i in its
    containing triangle, placed in the columns of the triangle's nodes.
    Candidate triangles come from the nearest centroids; a full scan over
    all triangles is the fallback.

    Args:
        mesh (TriMesh): The mesh.
        points (Iterable[Iterable[float]]): Points, shape (N, 2).

    Raises:
        LocateError: When a point lies outside the mesh beyond tolerance.

    Returns:
        sparse.csr_matrix: Matrix of shape (N, n_nodes), rows summing to 1.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(points) == 0:
        return sparse.csr_matrix((0, mesh.n_nodes))
    tol = HULL_TOLERANCE * mesh.diameter
    k = min(LOCATE_CANDIDATES, mesh.n_triangles)
    _, nearest = mesh.locator.query(points, k=k)
    nearest = np.asarray(nearest).reshape(len(points), k)
    everything = np.arange(mesh.n_triangles)

    rows = np.repeat(np.arange(len(points)), 3)
    cols = np.empty(3 * len(points), dtype=np.int64)
    vals = np.empty(3 * len(points))
    for index, point in enumerate(points):
        found = _locate(mesh, point, nearest[index], tol)
        if found is None:
            found = _locate(mesh, point, everything, tol)
        if found is None:
            raise LocateError(index, (float(point[0]), float(point[1])))
        triangle, lam = found
        if lam.min() < 0.0:
            lam = np.clip(lam, 0.0, None)
            lam = lam / lam.sum()
        cols[3 * index : 3 * index + 3] = mesh.triangles[triangle]
        vals[3 * index : 3 * index + 3] = lam

    matrix = sparse.csr_matrix((vals, (rows, cols)), shape=(len(points), mesh.n_nodes))
    matrix.eliminate_zeros()
    return matrix


def validate_triangles(mesh: TriMesh) -> None:
    """Checks that triangle node indices are valid and every node is used.

    Args:
        mesh (TriMesh): Represents the mesh to be validated.

    Raises:
        MeshError: On invalid indices or unused nodes.
    """
    if mesh.nodes.ndim != 2 or mesh.nodes.shape[1] != 2:
        raise MeshError("nodes must have shape (n, 2)")
    if mesh.triangles.ndim != 2 or mesh.triangles.shape[1] != 3:
        raise MeshError("triangles must have shape (t, 3)")
    if mesh.triangles.size == 0:
        raise MeshError("mesh has no triangles")
    if mesh.triangles.min() < 0 or mesh.triangles.max() >= mesh.n_nodes:
        raise MeshError("triangle refers to a node that does not exist")
    used = np.zeros(mesh.n_nodes, dtype=bool)
    used[mesh.triangles.ravel()] = True
    if not used.all():
        raise MeshError(f"node {int(np.argmin(used))} belongs to no triangle")


def validate_orientation(mesh: TriMesh) -> None:
    """Checks that every triangle has positive signed area.

    Args:
        mesh (TriMesh): Represents the mesh to be validated.

    Raises:
        MeshError: On a clockwise or degenerate triangle.
    """
    bad = np.flatnonzero(mesh.areas <= 0.0)
    if len(bad):
        raise MeshError(f"triangle {int(bad[0])} is not counterclockwise")


def validate_edges(mesh: TriMesh) -> None:
    """Checks that each edge is shared by at most two triangles.

    Args:
        mesh (TriMesh): Represents the mesh to be validated.

    Raises:
        MeshError: On an edge shared by three or more triangles.
    """
    t = mesh.triangles
    edges = np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
    _, counts = np.unique(edges, axis=0, return_counts=True)
    if counts.max() > 2:
        raise MeshError("an edge is shared by more than two triangles")
