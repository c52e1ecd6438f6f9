"""Sparse feature vectors and the flat matrix layout used by the learners.

A SparseVector is the per-document representation produced by the
vectorizer.  For training, vectors are stacked into a CSR-style triple of
flat arrays (indptr / cols / vals) so the tree learners can run
histogram-style split searches over sorted nonzeros without ever
materializing a dense matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class SparseVectorError(ValueError):
    pass


@dataclass(eq=False)
class SparseVector:
    """Column-sorted (column, value) pairs plus the total dimension.

    Invariants: columns strictly increasing, values nonzero, every column
    below ``dim``.
    """

    cols: np.ndarray
    vals: np.ndarray
    dim: int

    def __post_init__(self):
        self.cols = np.asarray(self.cols, dtype=np.int64)
        self.vals = np.asarray(self.vals, dtype=np.float64)
        if self.cols.shape != self.vals.shape:
            raise SparseVectorError("cols and vals must have equal length")
        if self.cols.size:
            if np.any(np.diff(self.cols) <= 0):
                raise SparseVectorError("columns must be strictly increasing")
            if self.cols[0] < 0 or self.cols[-1] >= self.dim:
                raise SparseVectorError("column out of range")
            if np.any(self.vals == 0.0):
                raise SparseVectorError("stored values must be nonzero")

    @property
    def nnz(self) -> int:
        return int(self.cols.size)

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.vals, self.vals)))

    def get(self, col: int) -> float:
        i = np.searchsorted(self.cols, col)
        if i < self.cols.size and self.cols[i] == col:
            return float(self.vals[i])
        return 0.0

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.cols] = self.vals
        return out

    def items(self):
        return list(zip(self.cols.tolist(), self.vals.tolist()))


def from_pairs(pairs, dim: int) -> SparseVector:
    """Build a vector from unordered (column, value) pairs, dropping zeros."""
    pairs = [(c, v) for c, v in pairs if v != 0.0]
    pairs.sort()
    cols = np.array([c for c, _ in pairs], dtype=np.int64)
    vals = np.array([v for _, v in pairs], dtype=np.float64)
    return SparseVector(cols, vals, dim)


@dataclass(eq=False)
class CsrMatrix:
    """Row-major stack of sparse vectors: standard indptr/cols/vals arrays."""

    indptr: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    n_rows: int
    n_cols: int
    # row id of every nonzero entry, aligned with cols/vals; used by the
    # tree split finder to slice node entries in one vectorized step.
    rows: np.ndarray = field(init=False)

    def __post_init__(self):
        self.rows = np.repeat(
            np.arange(self.n_rows, dtype=np.int64), np.diff(self.indptr)
        )

    def row(self, i: int) -> SparseVector:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return SparseVector(self.cols[lo:hi].copy(), self.vals[lo:hi].copy(), self.n_cols)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols))
        out[self.rows, self.cols] = self.vals
        return out


def take_rows(mat: CsrMatrix, rows) -> CsrMatrix:
    """Row-subset copy of a CSR matrix, preserving the given row order."""
    rows = np.asarray(rows, dtype=np.int64)
    lengths = np.diff(mat.indptr)[rows]
    indptr = np.zeros(rows.size + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(lengths)
    if indptr[-1] == 0:
        return CsrMatrix(indptr, np.zeros(0, dtype=np.int64), np.zeros(0), rows.size, mat.n_cols)
    cols = np.concatenate([mat.cols[mat.indptr[r]: mat.indptr[r + 1]] for r in rows])
    vals = np.concatenate([mat.vals[mat.indptr[r]: mat.indptr[r + 1]] for r in rows])
    return CsrMatrix(indptr, cols, vals, rows.size, mat.n_cols)


def stack(vectors: list[SparseVector]) -> CsrMatrix:
    if not vectors:
        raise SparseVectorError("cannot stack an empty list of vectors")
    dim = vectors[0].dim
    for v in vectors:
        if v.dim != dim:
            raise SparseVectorError("all vectors must share one dimension")
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([v.nnz for v in vectors])
    if indptr[-1] == 0:
        cols = np.zeros(0, dtype=np.int64)
        vals = np.zeros(0, dtype=np.float64)
    else:
        cols = np.concatenate([v.cols for v in vectors])
        vals = np.concatenate([v.vals for v in vectors])
    return CsrMatrix(indptr, cols, vals, len(vectors), dim)
