"""Provide Matrix Market storage of sparse matrices.

Examples:

    >>> import tempfile
    >>> from pathlib import Path
    >>> from scipy import sparse
    >>> from rational_spde.persistence.matrix_market import read_matrix, write_matrix

    >>> M = sparse.csr_matrix([[2.0, -1.0], [-1.0, 2.0]])
    >>> with tempfile.TemporaryDirectory() as folder:
    ...     path = Path(folder) / "M.mtx"
    ...     write_matrix(path, M, symmetric=True)
    ...     (read_matrix(path) != M).nnz
    0

The module contains the following functions:
- `write_matrix`: Writes a sparse matrix in coordinate format.
- `read_matrix`: Reads a Matrix Market file into CSR.
"""

import logging
import pathlib

from scipy import sparse
from scipy.io import mmread, mmwrite

from rational_spde.errors import ShapeError, ValidationError
from rational_spde.linalg.sparse_core import as_csr, is_symmetric

logger = logging.getLogger(__name__)

PRECISION: int = 17


def write_matrix(path: pathlib.Path, M, symmetric: bool = False) -> None:
    """Writes a sparse matrix in coordinate format.

    Args:
        path (pathlib.Path): Target file, conventionally with suffix .mtx.
        M: Sparse matrix.
        symmetric (bool): Store only the lower triangle. The matrix must be
            exactly symmetric.

    Raises:
        ValidationError: When `symmetric` is requested for a nonsymmetric matrix.
    """
    M = as_csr(M)
    if symmetric and not is_symmetric(M):
        raise ValidationError(f"{path.name}: matrix is not symmetric")
    mmwrite(
        str(path),
        sparse.coo_matrix(M),
        symmetry="symmetric" if symmetric else "general",
        precision=PRECISION,
    )
    logger.debug("wrote %s (%dx%d, nnz=%d)", path, *M.shape, M.nnz)


def read_matrix(path: pathlib.Path) -> sparse.csr_matrix:
    """Reads a Matrix Market file into CSR.

    Raises:
        ShapeError: When the file holds a dense array.
    """
    M = mmread(str(path))
    if not sparse.issparse(M):
        raise ShapeError(f"{path.name}: expected coordinate format")
    return as_csr(M)
