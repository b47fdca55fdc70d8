"""Matrices as two-level streams (row -> column -> value)."""

from __future__ import annotations

from ..combinators import map_, range_, zip_with
from ..evaluate import contract
from ..sources import DenseVec, SparseVec, singleton


def dense_matrix(rows) -> DenseVec:
    return DenseVec([DenseVec(list(r)) for r in rows])


def sparse_matrix(rows, search: str = "gallop") -> SparseVec:
    """Nonzero entries only; all-zero rows are dropped."""
    keys, out = [], []
    for i, r in enumerate(rows):
        cols = [j for j, x in enumerate(r) if x]
        if cols:
            keys.append(i)
            out.append(SparseVec(cols, [r[j] for j in cols], search))
    return SparseVec(keys, out, search)


def identity(n: int):
    return map_(lambda i, _: singleton(i, 1), range_(0, n))


def _scaled(x, row):
    return map_(lambda k, y: x * y, row)


def matmul(a, b):
    """``a @ b``. For each row of ``a``, the rows of ``b`` selected by its
    nonzero columns are scaled and summed into the output row."""
    return map_(lambda i, arow: contract(zip_with(_scaled, arow, b)), a)


def to_rows(sink, n: int, m: int) -> list[list]:
    """Read an evaluated two-level sink back into an ``n x m`` list."""
    out = [[0] * m for _ in range(n)]
    for i, row in sink.items():
        for j, x in row.items():
            out[i][j] = x
    return out
