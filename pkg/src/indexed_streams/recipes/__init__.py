"""Small programs built from the public combinators."""

from .matrix import dense_matrix, identity, matmul, sparse_matrix, to_rows

__all__ = ["dense_matrix", "identity", "matmul", "sparse_matrix", "to_rows"]
