"""Seeded input generators. Same (sizes, seed) -> bit-identical data."""

from __future__ import annotations

import numpy as np

from ..sources import SparseVec
from .rng import SplitMix64


def sparse_vector(rng: SplitMix64, nkeys: int, universe: int, planted=()) -> tuple:
    """Sorted distinct int64 keys (``nkeys`` random plus ``planted``) with
    values in 1..9."""
    keys = sorted(set(rng.sample(universe, nkeys)) | set(planted))
    values = [1 + rng.below(9) for _ in keys]
    return np.asarray(keys, dtype=np.int64), np.asarray(values, dtype=np.int64)


def v3_vectors(n: int, seed: int):
    """Three sparse vectors of about ``n`` keys over a universe of ``4n``,
    sharing ``n // 100 + 1`` planted keys."""
    rng = SplitMix64(seed)
    universe = 4 * n
    planted = rng.sample(universe, n // 100 + 1)
    return [sparse_vector(rng, n, universe, planted) for _ in range(3)]


def key_string(x: int, width: int = 8) -> str:
    return str(x).zfill(width)


def relation(rng: SplitMix64, rows: int, domain: int, skew: float, heavy: int,
             heavy_side: str) -> list[tuple[int, int]]:
    """``rows`` distinct pairs. With probability ``skew`` the ``heavy_side``
    attribute (``"left"``/``"right"``) is one of ``heavy`` hot values."""
    pairs: set[tuple[int, int]] = set()
    limit = domain * domain
    if rows > limit:
        raise ValueError("more rows than distinct pairs")
    while len(pairs) < rows:
        x, y = rng.below(domain), rng.below(domain)
        if skew and rng.uniform() < skew:
            h = rng.below(heavy)
            if heavy_side == "left":
                x = h
            else:
                y = h
        pairs.add((x, y))
    return sorted(pairs)


def csr(pairs, width: int = 8) -> SparseVec:
    """Nested sorted arrays: first attribute -> second attribute -> 1."""
    outer_keys: list[str] = []
    rows: list[SparseVec] = []
    inner: list[str] = []
    last = None
    for x, y in sorted((key_string(x, width), key_string(y, width)) for x, y in pairs):
        if x != last:
            if last is not None:
                rows.append(SparseVec(inner, [1] * len(inner), "gallop"))
            outer_keys.append(x)
            inner = []
            last = x
        inner.append(y)
    if last is not None:
        rows.append(SparseVec(inner, [1] * len(inner), "gallop"))
    return SparseVec(outer_keys, rows, "gallop")


def triangle_relations(rows: int, seed: int, skew: float = 0.5, heavy: int = 4,
                       domain: int | None = None):
    """R(a,b), S(b,c), T(a,c) as nested sorted string arrays.

    Skew concentrates R on a few hot ``b`` values and S on the same hot
    ``b`` values, so R joined with S is far larger than the triangle
    count (the shape that separates the three join strategies).
    """
    rng = SplitMix64(seed)
    d = domain if domain is not None else max(4, rows // 2)
    r = relation(rng, rows, d, skew, heavy, "right")
    s = relation(rng, rows, d, skew, heavy, "left")
    t = relation(rng, rows, d, 0.0, heavy, "left")
    return {"R": r, "S": s, "T": t}
