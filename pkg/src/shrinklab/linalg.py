"""Exact linear algebra over the prime field F_p.

Matrices are numpy int64 arrays whose entries are kept reduced to 0..p-1. Row
reduction uses vectorized elimination (one outer product per pivot), which is
exact because every intermediate entry stays below p².
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from shrinklab.exceptions import DimensionMismatch

log = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, Sequence[Sequence[int]], Sequence[int]]


def as_fp(matrix: ArrayLike, p: int) -> np.ndarray:
    """Return a reduced int64 copy of matrix."""
    return np.mod(np.asarray(matrix, dtype=np.int64), p)


def inv_mod(value: int, p: int) -> int:
    """Return the inverse of a nonzero residue."""
    value = int(value) % p
    if value == 0:
        raise ZeroDivisionError(f"0 has no inverse modulo {p}")
    return pow(value, p - 2, p)


@dataclass(frozen=True)
class RowReduction:
    """Reduced row echelon form of a matrix over F_p."""

    rank: int
    pivots: Tuple[int, ...]
    reduced: np.ndarray


def _as_2d(matrix: ArrayLike, p: int) -> np.ndarray:
    work = as_fp(matrix, p)
    if work.ndim != 2:
        raise DimensionMismatch(
            f"Expected a matrix, got an array of shape {work.shape}"
        )
    return work


def rref(matrix: ArrayLike, p: int) -> RowReduction:
    """Row-reduce matrix over F_p.

    Args:
        matrix: Matrix with integer entries.
        p: Prime modulus.

    Returns:
        The rank, the pivot columns and the reduced row echelon form.
    """
    work = _as_2d(matrix, p).copy()
    rows, cols = work.shape
    pivots: List[int] = []
    row = 0
    for col in range(cols):
        if row == rows:
            break
        candidates = np.nonzero(work[row:, col])[0]
        if candidates.size == 0:
            continue
        pivot = row + int(candidates[0])
        if pivot != row:
            work[[row, pivot]] = work[[pivot, row]]
        work[row] = (work[row] * inv_mod(work[row, col], p)) % p
        factors = work[:, col].copy()
        factors[row] = 0
        to_clear = np.nonzero(factors)[0]
        if to_clear.size:
            work[to_clear] = (
                work[to_clear] - np.outer(factors[to_clear], work[row])
            ) % p
        pivots.append(col)
        row += 1
    return RowReduction(rank=row, pivots=tuple(pivots), reduced=work)


def rank(matrix: ArrayLike, p: int) -> int:
    """Return the rank of matrix over F_p."""
    work = _as_2d(matrix, p)
    if work.size == 0:
        return 0
    return rref(work, p).rank


def kernel(matrix: ArrayLike, p: int) -> np.ndarray:
    """Return a basis of the right null space as the rows of an array.

    The basis vector attached to the free column f has a 1 at f and zeros on
    the other free columns, so a zero matrix yields the standard basis.
    """
    work = _as_2d(matrix, p)
    cols = work.shape[1]
    reduction = rref(work, p)
    free = [col for col in range(cols) if col not in set(reduction.pivots)]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    if not free:
        return basis
    basis[np.arange(len(free)), free] = 1
    if reduction.rank:
        basis[:, list(reduction.pivots)] = (
            -reduction.reduced[: reduction.rank][:, free].T
        ) % p
    return basis


def solve(matrix: ArrayLike, vector: ArrayLike, p: int) -> Optional[np.ndarray]:
    """Return one solution x of matrix·x = vector, or None if there is none.

    Free variables are set to zero, so the solution only uses pivot columns.
    """
    work = _as_2d(matrix, p)
    target = as_fp(vector, p).reshape(-1)
    if target.shape[0] != work.shape[0]:
        raise DimensionMismatch(
            f"Right hand side has length {target.shape[0]}, "
            f"matrix has {work.shape[0]} rows"
        )
    cols = work.shape[1]
    reduction = rref(np.hstack([work, target.reshape(-1, 1)]), p)
    if reduction.rank and reduction.pivots[-1] == cols:
        return None
    solution = np.zeros(cols, dtype=np.int64)
    if reduction.rank:
        solution[list(reduction.pivots)] = reduction.reduced[: reduction.rank, cols]
    return solution


def inverse(matrix: ArrayLike, p: int) -> np.ndarray:
    """Return the inverse of a square matrix, raising if it is singular."""
    work = _as_2d(matrix, p)
    size = work.shape[0]
    if work.shape != (size, size):
        raise DimensionMismatch(
            f"Only square matrices are invertible, got {work.shape}"
        )
    reduction = rref(np.hstack([work, np.eye(size, dtype=np.int64)]), p)
    if not np.array_equal(reduction.reduced[:, :size], np.eye(size, dtype=np.int64)):
        raise DimensionMismatch("Matrix is singular over F_p")
    return reduction.reduced[:, size:]


def matmul(left: ArrayLike, right: ArrayLike, p: int) -> np.ndarray:
    """Multiply two matrices over F_p."""
    left_arr = as_fp(left, p)
    right_arr = as_fp(right, p)
    if left_arr.shape[-1] != right_arr.shape[0]:
        raise DimensionMismatch(
            f"Can't multiply shapes {left_arr.shape} and {right_arr.shape}"
        )
    return np.mod(left_arr @ right_arr, p)


def row_basis(matrix: ArrayLike, p: int) -> np.ndarray:
    """Return a basis of the row space (the nonzero rows of the rref)."""
    work = _as_2d(matrix, p)
    if work.shape[0] == 0:
        return work
    reduction = rref(work, p)
    return reduction.reduced[: reduction.rank]


def independent_rows(matrix: ArrayLike, p: int) -> Tuple[int, ...]:
    """Return the indices of the rows that are independent of the earlier ones."""
    work = _as_2d(matrix, p)
    if work.shape[0] == 0:
        return ()
    return rref(work.T, p).pivots


@dataclass(frozen=True, eq=False)
class FpMatrix:
    """Matrix over F_p with reduced entries."""

    p: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        """Reduce the entries."""
        object.__setattr__(self, "entries", _as_2d(self.entries, self.p))

    @classmethod
    def zeros(cls, p: int, rows: int, cols: int) -> "FpMatrix":
        """Return the zero matrix."""
        return cls(p, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, p: int, size: int) -> "FpMatrix":
        """Return the identity matrix."""
        return cls(p, np.eye(size, dtype=np.int64))

    @property
    def rows(self) -> int:
        """Return the number of rows."""
        return int(self.entries.shape[0])

    @property
    def cols(self) -> int:
        """Return the number of columns."""
        return int(self.entries.shape[1])

    def rref(self) -> RowReduction:
        """Return the row reduction."""
        return rref(self.entries, self.p)

    def rank(self) -> int:
        """Return the rank."""
        return rank(self.entries, self.p)

    def kernel(self) -> List[np.ndarray]:
        """Return a basis of the null space."""
        return list(kernel(self.entries, self.p))

    def solve(self, vector: ArrayLike) -> Optional[np.ndarray]:
        """Return one solution of self·x = vector or None."""
        return solve(self.entries, vector, self.p)

    def __matmul__(self, other: "FpMatrix") -> "FpMatrix":
        """Multiply over F_p."""
        if other.p != self.p:
            raise DimensionMismatch(
                f"Can't multiply matrices over F_{self.p} and F_{other.p}"
            )
        return FpMatrix(self.p, matmul(self.entries, other.entries, self.p))

    def __eq__(self, other: object) -> bool:
        """Compare prime and entries."""
        if not isinstance(other, FpMatrix):
            return NotImplemented
        return self.p == other.p and np.array_equal(self.entries, other.entries)

    def __hash__(self) -> int:
        """Hash prime, shape and entries."""
        return hash((self.p, self.entries.shape, self.entries.tobytes()))
