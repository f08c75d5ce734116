"""Provide the enumerations that tag mesh nodes and boundary conditions.

Examples:

    >>> from rational_spde.models.flags import NodeFlag, BoundaryCondition

    >>> flag = NodeFlag.BOUNDARY | NodeFlag.CORE
    >>> flag
    <NodeFlag.BOUNDARY|CORE: 3>

    >>> NodeFlag.CORE in flag
    True
    >>> NodeFlag.from_columns(1, 0)
    <NodeFlag.BOUNDARY: 1>
    >>> flag.columns
    (1, 1)

    >>> BoundaryCondition("dirichlet")
    <BoundaryCondition.DIRICHLET: 'dirichlet'>

The module contains the following classes:
- `NodeFlag(IntFlag)`: Flags attached to every node of a mesh.
- `BoundaryCondition(Enum)`: Boundary condition of the elliptic operator.
"""

from enum import Enum, IntFlag, auto


class NodeFlag(IntFlag):
    """Flags attached to a mesh node. Extends IntFlag so flags combine with
    bitwise operations.

    Attributes:
        INTERIOR = 0
            Node with no flag set.
        BOUNDARY = auto()
            Node on the boundary of the meshed (possibly extended) rectangle.
        CORE = auto()
            Node inside the unextended rectangle.
    """

    INTERIOR = 0
    BOUNDARY = auto()
    CORE = auto()

    @classmethod
    def from_columns(cls, boundary: int, core: int) -> "NodeFlag":
        """Builds the flag from the two 0/1 columns of the mesh dump format.

        Args:
            boundary (int): 1 when the node lies on the boundary.
            core (int): 1 when the node lies in the unextended rectangle.

        Returns:
            NodeFlag: The combined flag.
        """
        flag = cls.INTERIOR
        if boundary:
            flag |= cls.BOUNDARY
        if core:
            flag |= cls.CORE
        return flag

    @property
    def columns(self) -> tuple[int, int]:
        """The (boundary, core) 0/1 columns of the mesh dump format."""
        return int(NodeFlag.BOUNDARY in self), int(NodeFlag.CORE in self)


class BoundaryCondition(Enum):
    """Boundary condition imposed on the operator L.

    Attributes:
        NEUMANN = "neumann"
            Homogeneous Neumann condition, natural for the weak form.
        DIRICHLET = "dirichlet"
            Homogeneous Dirichlet condition, imposed by restricting the
            system to interior nodes.
    """

    NEUMANN = "neumann"
    DIRICHLET = "dirichlet"
