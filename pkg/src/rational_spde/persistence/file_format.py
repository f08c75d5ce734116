"""Provide the records of the mesh text format.

A mesh file is a header line `nodes n triangles t`, then n node lines
`x y boundary_flag core_flag` and t triangle lines `i j k` with 0-based
node indices.

The module contains the following classes:
- `MeshHeader`: The header line of the mesh file.
- `MeshBody`: The node and triangle records of the mesh file.
"""

from dataclasses import dataclass
from typing import TextIO

import numpy as np

from rational_spde.errors import MeshError

HEADER_WORDS: tuple[str, str] = ("nodes", "triangles")


def _next_line(file: TextIO) -> str:
    line = file.readline()
    if not line:
        raise MeshError("unexpected end of mesh file")
    return line


@dataclass(frozen=True)
class MeshHeader:
    """The header line of the mesh file.

    Methods:
        read(cls, file: TextIO) -> "MeshHeader":
            Reads the header line from a text file.
        write(self, file: TextIO) -> None:
            Writes the header line into a text file.
    """

    n_nodes: int
    n_triangles: int

    @classmethod
    def read(cls, file: TextIO) -> "MeshHeader":
        """Reads the header line from a text file.

        Args:
            file (TextIO): Text file positioned at the header.

        Raises:
            MeshError: When the line is not `nodes n triangles t`.

        Returns:
            MeshHeader: The counts.
        """
        words = _next_line(file).split()
        if len(words) != 4 or (words[0], words[2]) != HEADER_WORDS:
            raise MeshError("unknown file type, expected 'nodes n triangles t'")
        try:
            n_nodes, n_triangles = int(words[1]), int(words[3])
        except ValueError as error:
            raise MeshError(f"bad counts in mesh header: {error}") from error
        if n_nodes < 3 or n_triangles < 1:
            raise MeshError(f"mesh needs nodes and triangles, got {n_nodes}/{n_triangles}")
        return cls(n_nodes, n_triangles)

    def write(self, file: TextIO) -> None:
        """Writes the header line into a text file."""
        file.write(f"nodes {self.n_nodes} triangles {self.n_triangles}\n")


@dataclass(frozen=True, eq=False)
class MeshBody:
    """The node and triangle records of the mesh file.

    Methods:
        read(cls, header: MeshHeader, file: TextIO) -> "MeshBody":
            Reads the records announced by the header.
        write(self, file: TextIO) -> None:
            Writes the records into a text file.
    """

    nodes: np.ndarray
    flag_columns: np.ndarray
    triangles: np.ndarray

    @classmethod
    def read(cls, header: MeshHeader, file: TextIO) -> "MeshBody":
        """Reads the records announced by the header.

        Args:
            header (MeshHeader): Represents the header of the mesh file.
            file (TextIO): Text file positioned after the header.

        Raises:
            MeshError: On malformed or missing records.

        Returns:
            MeshBody: The records.
        """
        nodes = np.empty((header.n_nodes, 2))
        flag_columns = np.empty((header.n_nodes, 2), dtype=np.int64)
        triangles = np.empty((header.n_triangles, 3), dtype=np.int64)
        try:
            for row in range(header.n_nodes):
                x, y, boundary, core = _next_line(file).split()
                nodes[row] = float(x), float(y)
                flag_columns[row] = int(boundary), int(core)
            for row in range(header.n_triangles):
                triangles[row] = [int(word) for word in _next_line(file).split()]
        except ValueError as error:
            raise MeshError(f"malformed mesh record: {error}") from error
        if not np.isin(flag_columns, (0, 1)).all():
            raise MeshError("node flags must be 0 or 1")
        return cls(nodes, flag_columns, triangles)

    def write(self, file: TextIO) -> None:
        """Writes the records into a text file."""
        for (x, y), (boundary, core) in zip(self.nodes, self.flag_columns):
            file.write(f"{float(x)!r} {float(y)!r} {int(boundary)} {int(core)}\n")
        for i, j, k in self.triangles:
            file.write(f"{i} {j} {k}\n")
