"""Benchmark programs: stream versions and handwritten baselines.

``range``/``nest``/``v3`` run compiled through numba (stream expressions
via the fused loop's numba backend, baselines as ``@njit`` loops), so the
comparison measures fusion overhead rather than interpreter speed. The
triangle join and tree intersections compare algorithms and run in plain
Python on both sides.
"""

from __future__ import annotations

import bisect

import numba

from ..combinators import map_, mul, range_, zip_with
from ..core import fold
from ..evaluate import MapSink, contract, eval_into
from ..fusion import compile_fold, compile_sum
from ..rbtree import OrderedTreeMap, successor, tree_stream
from ..sources import SparseVec, sparse_gallop, sparse_linear

# ---------------------------------------------------------------------------
# range / nest / v3


def range_stream(n: int):
    return map_(lambda k, v: k % 5, range_(0, n))


def compile_range(n: int):
    f = compile_sum(range_stream(n), backend="numba")
    return lambda: f(0)


@numba.njit(cache=False)
def range_baseline(n):
    acc = 0
    for i in range(n):
        acc += i % 5
    return acc


def nest_stream(n: int):
    rows = map_(lambda i, _: range_(0, n), range_(0, n))
    return map_(lambda i, row: map_(lambda j, _: j % 5, row).sum(), rows)


def compile_nest(n: int):
    f = compile_sum(nest_stream(n), backend="numba")
    return lambda: f(0)


@numba.njit(cache=False)
def nest_baseline(n):
    result = 0
    for _ in range(n):
        for j in range(n):
            result += j % 5
    return result


@numba.njit(cache=False)
def nest_baseline_2(n):
    result = 0
    for _ in range(n):
        a = 0
        for j in range(n):
            a += j % 5
        result += a
    return result


def v3_stream(vectors, search="linear"):
    make = sparse_linear if search == "linear" else sparse_gallop
    a, b, c = (make(k, v) for k, v in vectors)
    return mul(mul(a, b), c)


def compile_v3(vectors, search="linear"):
    f = compile_sum(v3_stream(vectors, search), backend="numba")
    return lambda: f(0)


@numba.njit(cache=False)
def v3_baseline(ka, va, kb, vb, kc, vc):
    i = j = k = 0
    na, nb, nc = len(ka), len(kb), len(kc)
    acc = 0
    while i < na and j < nb and k < nc:
        x, y, z = ka[i], kb[j], kc[k]
        if x == y and y == z:
            acc += va[i] * vb[j] * vc[k]
            i += 1
            j += 1
            k += 1
        else:
            m = max(x, max(y, z))
            if x < m:
                i += 1
            if y < m:
                j += 1
            if z < m:
                k += 1
    return acc


def v3_oracle(vectors) -> int:
    maps = [dict(zip(k.tolist(), v.tolist())) for k, v in vectors]
    common = set(maps[0]) & set(maps[1]) & set(maps[2])
    return sum(maps[0][x] * maps[1][x] * maps[2][x] for x in common)


# ---------------------------------------------------------------------------
# triangle join  R(a,b) ⋈ S(b,c) ⋈ T(a,c), counted


def _lookup(rel: SparseVec, key):
    ks = rel.keys
    i = bisect.bisect_left(ks, key)
    if i < len(ks) and ks[i] == key:
        return rel.values[i]
    return None


def _member(row: SparseVec, key) -> bool:
    ks = row.keys
    i = bisect.bisect_left(ks, key)
    return i < len(ks) and ks[i] == key


def triangle_naive(R: SparseVec, S: SparseVec, T: SparseVec) -> int:
    """Iterate R, look up S by b and T by (a, c), each lookup a fresh
    binary search."""
    count = 0
    for a, Ra in zip(R.keys, R.values):
        for b in Ra.keys:
            Sb = _lookup(S, b)
            if Sb is None:
                continue
            for c in Sb.keys:
                Ta = _lookup(T, a)
                if Ta is not None and _member(Ta, c):
                    count += 1
    return count


def _row_counts(Ra, S):
    # R(a, ·) ⋈ S: a -> c -> number of b linking them
    return contract(zip_with(lambda x, Sb: Sb, Ra, S))


def triangle_unfused(R: SparseVec, S: SparseVec, T: SparseVec) -> int:
    """Join R with S (galloping), materialize the result as a -> c ->
    multiplicity, then join that with T (galloping)."""
    rs = eval_into(map_(lambda a, Ra: _row_counts(Ra, S), R),
                   MapSink(lambda: MapSink(0)))
    keys = sorted(rs.data)
    rows = []
    for a in keys:
        d = rs.data[a].data
        ck = sorted(d)
        rows.append(SparseVec(ck, [d[c] for c in ck], "gallop", validate=False))
    temp = SparseVec(keys, rows, "gallop", validate=False)
    return sum_pairs(zip_with(lambda x, Ta: mul(x, Ta).sum(), temp, T))


def sum_pairs(s):
    return fold(_add_value, s, 0)


def _add_value(acc, k, v):
    return acc + v


def triangle_fused_stream(R: SparseVec, S: SparseVec, T: SparseVec):
    """a, then b, then c: one pass over each input, no intermediate."""
    return zip_with(lambda Ra, Ta: zip_with(lambda x, Sb: mul(Sb, Ta).sum(), Ra, S).sum(),
                    R, T)


def triangle_fused(R: SparseVec, S: SparseVec, T: SparseVec) -> int:
    return triangle_fused_stream(R, S, T).sum()


def compile_triangle_fused(R, S, T):
    f = compile_sum(triangle_fused_stream(R, S, T))
    return lambda: f(0)


def triangle_oracle(pairs) -> int:
    """Triple loop over the raw pair lists."""
    R, S, T = pairs["R"], pairs["S"], pairs["T"]
    tset = set(T)
    count = 0
    for a, b in R:
        for b2, c in S:
            if b2 == b and (a, c) in tset:
                count += 1
    return count


# ---------------------------------------------------------------------------
# tree intersection


def build_tree(keys) -> OrderedTreeMap:
    t = OrderedTreeMap()
    for k in keys:
        t.insert(k, 1)
    return t


def _collect(acc, k, v):
    acc.append(k)
    return acc


def intersect_stream(trees) -> list:
    s = tree_stream(trees[0])
    for t in trees[1:]:
        s = mul(s, tree_stream(t))
    return fold(_collect, s, [])


def compile_intersect(trees):
    s = tree_stream(trees[0])
    for t in trees[1:]:
        s = mul(s, tree_stream(t))
    f = compile_fold(s, _collect)
    return lambda: f([])


def intersect_lookup(trees) -> list:
    """Walk the first tree in order and look every key up in the others."""
    out = []
    others = trees[1:]
    n = trees[0].first()
    while n is not None:
        k = n.key
        for t in others:
            if t._find(k) is None:
                break
        else:
            out.append(k)
        n = successor(n)
    return out


__all__ = [name for name in dir() if not name.startswith("_")]
