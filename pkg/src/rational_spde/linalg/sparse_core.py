"""Provide the sparse linear algebra the models are built on.

Storage is `scipy.sparse` CSR; factorizations go through SuperLU. A sparse
Cholesky factor is obtained from SuperLU by forcing diagonal pivoting with a
symmetric ordering, in which case U = D Lᵀ and the Cholesky factor is
L D^{1/2}. Small systems use dense LAPACK instead.

Examples:

    >>> import numpy as np
    >>> from scipy import sparse
    >>> from rational_spde.linalg.sparse_core import cholesky, lu, pattern_power

    >>> factor = cholesky(sparse.diags([1.0, 4.0, 9.0]))
    >>> round(factor.logdet, 12) == round(float(np.log(36.0)), 12)
    True

    >>> swap = lu(sparse.csr_matrix([[0.0, 1.0], [1.0, 0.0]]))
    >>> swap.logabsdet, swap.sign
    (0.0, -1.0)

    >>> pattern_power(sparse.eye(3, k=1) + sparse.eye(3, k=-1), 1).toarray()
    array([[1, 1, 0],
           [1, 1, 1],
           [0, 1, 1]], dtype=int8)

The module contains the following classes:
- `Ordering`: Column ordering used by the factorizations.
- `CholFactor`: A Cholesky factor with its permutation and log-determinant.
- `LUFactor`: An LU factor with its signed log-determinant.

The module contains the following functions:
- `as_csr`: Canonical CSR copy of a matrix.
- `is_symmetric`: Exact structural and numerical symmetry check.
- `symmetrize`: The symmetric part of a matrix.
- `cholesky`: Sparse Cholesky factorization.
- `lu`: Sparse LU factorization.
- `spmul`, `spadd`, `matvec`: Shape-checked products and sums.
- `prune`: Drops numerically zero entries.
- `pattern_power`: Sparsity pattern of a matrix power.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, TypeAlias

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse.linalg import splu

from rational_spde.errors import (
    NotPositiveDefiniteError,
    ShapeError,
    SingularMatrixError,
)

logger = logging.getLogger(__name__)

SparseMat: TypeAlias = sparse.csr_matrix
Solver: TypeAlias = Callable[[np.ndarray], np.ndarray]

DENSE_CUTOFF: int = 64
PRUNE_TOL: float = 1e-300


class Ordering(Enum):
    """Column ordering of a factorization; values are SuperLU `permc_spec`
    names.

    Attributes:
        NATURAL = "NATURAL"
            Keep the matrix ordering.
        FILL_REDUCING = "MMD_AT_PLUS_A"
            Approximate minimum degree on the symmetric pattern.
    """

    NATURAL = "NATURAL"
    FILL_REDUCING = "MMD_AT_PLUS_A"


@dataclass(frozen=True, eq=False)
class CholFactor:
    """A Cholesky factorization M[perm][:, perm] = L Lᵀ.

    Attributes:
        perm: np.ndarray
            Row/column permutation applied before factoring.
        L: sparse.csr_matrix
            Lower-triangular factor of the permuted matrix.
        logdet: float
            Log-determinant of M.

    Methods:
        solve(self, b) -> np.ndarray:
            Solves M x = b.
        solve_Lt(self, z) -> np.ndarray:
            Returns x = Pᵀ L⁻ᵀ z, so that x ~ N(0, M⁻¹) for z ~ N(0, I).
    """

    perm: np.ndarray
    L: SparseMat
    logdet: float
    _solve: Solver = field(repr=False)

    @property
    def n(self) -> int:
        """Order of the factored matrix."""
        return len(self.perm)

    def solve(self, b: np.ndarray) -> np.ndarray:
        """Solves M x = b for a vector or a matrix of right-hand sides."""
        b = np.asarray(b, dtype=float)
        if b.shape[0] != self.n:
            raise ShapeError(f"right-hand side has {b.shape[0]} rows, need {self.n}")
        return self._solve(b)

    def solve_Lt(self, z: np.ndarray) -> np.ndarray:
        """Returns Pᵀ L⁻ᵀ z.

        Uses the identity Pᵀ L⁻ᵀ z = M⁻¹ Pᵀ L z, which needs one product and
        one full solve instead of a sparse triangular solve.
        """
        z = np.asarray(z, dtype=float)
        if z.shape[0] != self.n:
            raise ShapeError(f"vector has {z.shape[0]} rows, need {self.n}")
        w = np.empty_like(z)
        w[self.perm] = self.L @ z
        return self._solve(w)


@dataclass(frozen=True, eq=False)
class LUFactor:
    """An LU factorization with its signed log-determinant.

    Attributes:
        logabsdet: float
            log |det M|.
        sign: float
            Sign of det M, +1.0 or -1.0.
    """

    logabsdet: float
    sign: float
    _solve: Solver = field(repr=False)

    def solve(self, b: np.ndarray) -> np.ndarray:
        """Solves M x = b."""
        return self._solve(np.asarray(b, dtype=float))


def as_csr(M) -> SparseMat:
    """Canonical CSR copy: duplicates summed, column indices sorted."""
    out = sparse.csr_matrix(M, dtype=float, copy=True)
    out.sum_duplicates()
    out.sort_indices()
    return out


def is_symmetric(M) -> bool:
    """True when M equals its transpose exactly."""
    M = as_csr(M)
    if M.shape[0] != M.shape[1]:
        return False
    return (M != M.T).nnz == 0


def symmetrize(M) -> SparseMat:
    """Returns (M + Mᵀ)/2, exactly symmetric."""
    M = as_csr(M)
    return as_csr(0.5 * (M + M.T))


def _check_square(M) -> None:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeError(f"matrix must be square, got shape {M.shape}")


def cholesky(M, ordering: Ordering = Ordering.FILL_REDUCING) -> CholFactor:
    """Factors a symmetric positive definite matrix.

    Args:
        M: Symmetric positive definite matrix, sparse or dense.
        ordering (Ordering): Column ordering. Defaults to approximate
            minimum degree.

    Raises:
        ShapeError: When M is not square.
        NotPositiveDefiniteError: On a nonpositive pivot.

    Returns:
        CholFactor: The factor, its permutation and log-determinant.
    """
    M = as_csr(M)
    _check_square(M)
    n = M.shape[0]
    if n <= DENSE_CUTOFF:
        return _dense_cholesky(M)

    lu_ = _symmetric_splu(M, ordering)
    if lu_ is None and ordering is not Ordering.NATURAL:
        logger.debug("symmetric pivoting failed, retrying with natural ordering")
        lu_ = _symmetric_splu(M, Ordering.NATURAL)
    if lu_ is None:
        raise NotPositiveDefiniteError(None, 0.0)

    pivots = lu_.U.diagonal()
    bad = np.flatnonzero(~(pivots > 0.0))
    if len(bad):
        raise NotPositiveDefiniteError(int(bad[0]), float(pivots[bad[0]]))
    perm = np.argsort(lu_.perm_c)
    L = as_csr(lu_.L @ sparse.diags(np.sqrt(pivots)))
    logdet = float(np.sum(np.log(pivots)))
    logger.debug("cholesky n=%d nnz(M)=%d nnz(L)=%d", n, M.nnz, L.nnz)
    return CholFactor(perm=perm, L=L, logdet=logdet, _solve=lu_.solve)


def _symmetric_splu(M: SparseMat, ordering: Ordering):
    try:
        lu_ = splu(
            M.tocsc(),
            permc_spec=ordering.value,
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
    except RuntimeError as error:
        logger.debug("SuperLU failed: %s", error)
        return None
    if not np.array_equal(lu_.perm_r, lu_.perm_c):
        return None
    return lu_


def _dense_cholesky(M: SparseMat) -> CholFactor:
    dense = M.toarray()
    try:
        lower = scipy.linalg.cholesky(dense, lower=True)
    except scipy.linalg.LinAlgError as error:
        diagonal = np.diag(dense)
        raise NotPositiveDefiniteError(None, float(diagonal.min())) from error
    pivots = np.diag(lower)
    if not np.all(pivots > 0.0):
        bad = int(np.argmin(pivots))
        raise NotPositiveDefiniteError(bad, float(pivots[bad]))

    def solve(b: np.ndarray) -> np.ndarray:
        return scipy.linalg.cho_solve((lower, True), b)

    return CholFactor(
        perm=np.arange(M.shape[0]),
        L=as_csr(lower),
        logdet=float(2.0 * np.sum(np.log(pivots))),
        _solve=solve,
    )


def _parity(perm: np.ndarray) -> float:
    """Sign of a permutation, from its cycle decomposition."""
    seen = np.zeros(len(perm), dtype=bool)
    sign = 1.0
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        index = start
        while not seen[index]:
            seen[index] = True
            index = perm[index]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def lu(M) -> LUFactor:
    """Factors a square nonsingular matrix with partial pivoting.

    Args:
        M: Square matrix, sparse or dense.

    Raises:
        ShapeError: When M is not square.
        SingularMatrixError: When M is numerically singular.

    Returns:
        LUFactor: log |det M|, its sign and a solver.
    """
    M = as_csr(M)
    _check_square(M)
    n = M.shape[0]
    if n <= DENSE_CUTOFF:
        lu_piv = scipy.linalg.lu_factor(M.toarray(), check_finite=True)
        diagonal = np.diag(lu_piv[0])
        _check_pivots(diagonal)
        swaps = np.count_nonzero(lu_piv[1] != np.arange(n))
        sign = float(np.prod(np.sign(diagonal))) * (-1.0) ** swaps
        return LUFactor(
            logabsdet=float(np.sum(np.log(np.abs(diagonal)))),
            sign=sign,
            _solve=lambda b: scipy.linalg.lu_solve(lu_piv, b),
        )
    try:
        lu_ = splu(M.tocsc(), permc_spec=Ordering.FILL_REDUCING.value)
    except RuntimeError as error:
        raise SingularMatrixError(str(error)) from error
    diagonal = lu_.U.diagonal()
    _check_pivots(diagonal)
    sign = (
        float(np.prod(np.sign(diagonal)))
        * _parity(lu_.perm_r)
        * _parity(lu_.perm_c)
    )
    return LUFactor(
        logabsdet=float(np.sum(np.log(np.abs(diagonal)))),
        sign=sign,
        _solve=lu_.solve,
    )


def _check_pivots(diagonal: np.ndarray) -> None:
    scale = np.abs(diagonal).max(initial=0.0)
    if scale == 0.0 or np.abs(diagonal).min() <= np.finfo(float).eps * scale:
        raise SingularMatrixError("matrix is numerically singular")


def _check_product(A, B) -> None:
    if A.shape[1] != B.shape[0]:
        raise ShapeError(f"cannot multiply {A.shape} by {B.shape}")


def spmul(A, B) -> SparseMat:
    """Sparse product A B."""
    _check_product(A, B)
    return as_csr(sparse.csr_matrix(A) @ sparse.csr_matrix(B))


def spadd(A, B, alpha: float = 1.0, beta: float = 1.0) -> SparseMat:
    """Sparse linear combination alpha A + beta B."""
    if A.shape != B.shape:
        raise ShapeError(f"cannot add {A.shape} and {B.shape}")
    return as_csr(alpha * sparse.csr_matrix(A) + beta * sparse.csr_matrix(B))


def matvec(A, x: np.ndarray) -> np.ndarray:
    """Product of a sparse matrix with a vector or dense matrix."""
    x = np.asarray(x, dtype=float)
    _check_product(A, x)
    return sparse.csr_matrix(A) @ x


def prune(M, tol: float = PRUNE_TOL) -> SparseMat:
    """Drops stored entries with magnitude below `tol`."""
    M = as_csr(M)
    M.data[np.abs(M.data) < tol] = 0.0
    M.eliminate_zeros()
    return M


def pattern_power(S, k: int) -> sparse.csr_matrix:
    """Sparsity pattern of (S + I)^k as a 0/1 int8 matrix.

    Args:
        S: Square matrix whose stored entries define the pattern.
        k (int): Nonnegative power.

    Returns:
        sparse.csr_matrix: Pattern with ones where the power can be nonzero.
    """
    _check_square(S)
    if k < 0:
        raise ShapeError(f"power must be nonnegative, got {k}")
    base = sparse.csr_matrix(S, copy=True)
    base.data = np.ones_like(base.data, dtype=float)
    base = (base + sparse.eye(S.shape[0], format="csr")).astype(bool).astype(float)
    result = sparse.eye(S.shape[0], format="csr")
    for _ in range(k):
        result = (result @ base).astype(bool).astype(float)
    result = sparse.csr_matrix(result)
    result.sort_indices()
    return result.astype(np.int8)
