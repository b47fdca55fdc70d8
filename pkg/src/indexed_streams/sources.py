"""Streams over concrete data: ranges, sorted and dense arrays, singletons."""

from __future__ import annotations

import bisect
import operator
from typing import Any, Callable, Sequence

from .core import (Contraction, IndexedStream, MaskFn, instrumentation)
from .fusion import INDENT, Gen, Val, below, data_val, element_val, indent


class ConstructionError(ValueError):
    """Invalid backing data; ``kind`` is ``"UnsortedKeys"`` or
    ``"LengthMismatch"``."""

    def __init__(self, kind: str, detail: str = ""):
        super().__init__(f"{kind}: {detail}" if detail else kind)
        self.kind = kind


def _count(field="seeks", n=1):
    c = instrumentation.counter
    if c is not None:
        setattr(c, field, getattr(c, field) + n)


def classify(values) -> tuple:
    """Element shape of a value array: ``("scalar",)``, ``("any",)`` or
    ``("stream", representative)`` when every element is a stream of one
    shared shape (so one nested loop body serves every row)."""
    if type(values).__module__ == "numpy" and getattr(values, "dtype", None) != object:
        return ("scalar",)
    types = set(map(type, values))
    if not any(issubclass(t, _LAZY) for t in types):
        return ("scalar",)
    if len(types) > 1 or not issubclass(next(iter(types)), IndexedStream):
        return ("any",)
    shapes = set(map(_shape_of, values))
    if len(shapes) != 1 or None in shapes:
        return ("any",)
    return ("stream", values[0])


_LAZY = (IndexedStream, Contraction, MaskFn)
_shape_of = operator.methodcaller("_shape")


def shape_key(vshape):
    return (vshape[0],) if vshape[0] != "stream" else ("stream", vshape[1]._shape())


def _seek_value(key, strict):
    return key + 1 if strict else key


# ---------------------------------------------------------------------------


class Range(IndexedStream):
    """``k -> k`` for ``lo <= k < hi``; the state is the cursor."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        self.lo = lo
        self.hi = hi

    def start(self):
        return self.lo

    def valid(self, q):
        return q < self.hi

    def ready(self, q):
        return True

    def index(self, q):
        return q

    def value(self, q):
        return q

    def seek(self, q, key, strict):
        _count()
        return max(q, _seek_value(key, strict))

    def _shape(self):
        return ("range",)

    def _gen(self, em, ref):
        init = []
        lo = ref.load(em, init, "lo", "lo")
        hi = ref.load(em, init, "hi", "hi")
        c = em.fresh("c")
        init.append(f"{c} = {lo}")

        def seek(k, s):
            lines = em.count("seeks")
            if em.own_index(k, c) and s in ("True", "False"):
                return lines + ([f"{c} = {k} + 1"] if s == "True" else [])
            if s in ("True", "False"):
                t = f"{k} + 1" if s == "True" else k
                return lines + [f"if {t} > {c}:", f"{INDENT}{c} = {t}"]
            t = em.fresh("t")
            return lines + [f"{t} = {k} + 1 if {s} else {k}",
                            f"if {t} > {c}:", f"{INDENT}{c} = {t}"]

        return Gen(init, f"{c} < {hi}", c, "True", Val(c), seek)

    def extent(self):
        return max(0, self.hi - self.lo)

    def __repr__(self):
        return f"range_({self.lo!r}, {self.hi!r})"


def range_(lo, hi) -> Range:
    return Range(lo, hi)


class DenseVec(IndexedStream):
    """``values[k]`` at keys ``0..n-1``; seeks are one assignment."""

    __slots__ = ("values", "_vshape")

    def __init__(self, values: Sequence):
        self.values = values
        self._vshape = None

    def vshape(self):
        if self._vshape is None:
            self._vshape = classify(self.values)
        return self._vshape

    def start(self):
        return 0

    def valid(self, q):
        return q < len(self.values)

    def ready(self, q):
        return True

    def index(self, q):
        return q

    def value(self, q):
        return self.values[q]

    def seek(self, q, key, strict):
        _count()
        return max(q, _seek_value(key, strict))

    def _shape(self):
        return ("dense", shape_key(self.vshape()))

    def _gen(self, em, ref):
        init = []
        vs = ref.load(em, init, "values", "vs")
        n, c = em.fresh("n"), em.fresh("c")
        init += [f"{n} = len({vs})", f"{c} = 0"]

        def seek(k, s):
            lines = em.count("seeks")
            if em.own_index(k, c) and s in ("True", "False"):
                return lines + ([f"{c} = {k} + 1"] if s == "True" else [])
            if s in ("True", "False"):
                t = f"{k} + 1" if s == "True" else k
                return lines + [f"if {t} > {c}:", f"{INDENT}{c} = {t}"]
            t = em.fresh("t")
            return lines + [f"{t} = {k} + 1 if {s} else {k}",
                            f"if {t} > {c}:", f"{INDENT}{c} = {t}"]

        return Gen(init, f"{c} < {n}", c, "True",
                   element_val(em, vs, c, _node(ref).vshape()), seek)

    def extent(self):
        return len(self.values)

    def __repr__(self):
        return f"dense({list(self.values)!r})"


def _node(ref):
    return ref.node if hasattr(ref, "node") else ref.rep


def dense(values: Sequence) -> DenseVec:
    return DenseVec(values)


class SparseVec(IndexedStream):
    """Parallel ``keys``/``values`` arrays; the state is the cursor.

    ``search`` picks the seek algorithm: ``"linear"`` moves at most one
    position per seek, ``"gallop"`` jumps straight to the target with a
    doubling probe from the cursor followed by binary search.
    """

    __slots__ = ("keys", "values", "search", "_vshape")

    def __init__(self, keys: Sequence, values: Sequence, search: str = "gallop",
                 validate: bool = True):
        if search not in ("linear", "gallop"):
            raise ValueError(f"unknown search {search!r}")
        if validate:
            if len(keys) != len(values):
                raise ConstructionError("LengthMismatch",
                                        f"{len(keys)} keys, {len(values)} values")
            for i in range(1, len(keys)):
                if not keys[i - 1] < keys[i]:
                    raise ConstructionError(
                        "UnsortedKeys", f"keys[{i - 1}]={keys[i - 1]!r}, keys[{i}]={keys[i]!r}")
        self.keys = keys
        self.values = values
        self.search = search
        self._vshape = None

    def vshape(self):
        if self._vshape is None:
            self._vshape = classify(self.values)
        return self._vshape

    def start(self):
        return 0

    def valid(self, q):
        return q < len(self.keys)

    def ready(self, q):
        return True

    def index(self, q):
        return self.keys[q]

    def value(self, q):
        return self.values[q]

    def seek(self, q, key, strict):
        _count()
        ks = self.keys
        t = ks[q]
        if self.search == "linear":
            if t < key or (strict and t == key):
                return q + 1
            return q
        return gallop(ks, q, key, strict)

    def _shape(self):
        return ("sparse", self.search, shape_key(self.vshape()))

    def _gen(self, em, ref):
        init = []
        ks = ref.load(em, init, "keys", "ks")
        vs = ref.load(em, init, "values", "vs")
        n, c, t = em.fresh("n"), em.fresh("c"), em.fresh("t")
        init += [f"{n} = len({ks})", f"{c} = 0"]
        prep = [f"{t} = {ks}[{c}]"]
        node = _node(ref)

        def step(k, s):
            # keys are strictly increasing: past our own key is the next slot
            # (skipped when counting, so comparison counts match the protocol)
            if em.cnt is None and em.own_index(k, t) and s in ("True", "False"):
                return [f"{c} += 1"] if s == "True" else []
            return None

        if node.search == "linear":
            def seek(k, s):
                fast = step(k, s)
                if fast is not None:
                    return em.count("seeks") + fast
                return em.count("seeks") + [f"if {below(t, k, s)}:", f"{INDENT}{c} += 1"]
        else:
            def seek(k, s):
                fast = step(k, s)
                if fast is not None:
                    return em.count("seeks") + fast
                return em.count("seeks") + gallop_lines(em, ks, n, c, t, k, s)
        return Gen(init, f"{c} < {n}", t, "True", element_val(em, vs, c, node.vshape()),
                   seek, prep)

    def extent(self):
        return len(self.keys)

    def __repr__(self):
        return f"sparse_{self.search}({list(self.keys)!r}, {list(self.values)!r})"


def gallop(ks, c, key, strict):
    """Least position ``>= c`` whose key is not below the target.

    With a step counter active this runs the galloping search comparison
    by comparison; otherwise a C bisect over the remaining keys finds the
    same position.
    """
    counter = instrumentation.counter
    n = len(ks)
    if counter is None:
        return (bisect.bisect_right if strict else bisect.bisect_left)(ks, key, c, n)

    def is_below(x):
        if counter is not None:
            counter.comparisons += 1
        return x <= key if strict else x < key

    if not is_below(ks[c]):
        return c
    c += 1
    if c >= n or not is_below(ks[c]):
        return c
    lo, step = c, 1
    hi = c + 1
    while hi < n and is_below(ks[hi]):
        lo = hi
        step *= 2
        hi = c + step
    if hi > n:
        hi = n
    a, b = lo + 1, hi
    while a < b:
        m = (a + b) // 2
        if is_below(ks[m]):
            a = m + 1
        else:
            b = m
    return a


def gallop_lines(em, ks, n, c, t, k, s):
    lo, step, hi, a, b, m = (em.fresh(x) for x in ("lo", "step", "hi", "a", "b", "m"))
    cmp = em.count("comparisons")
    body = cmp + [f"if {below(t, k, s)}:"]
    # the next position first: most seeks in a merge move by one
    step1 = [f"{c} += 1"] + ([f"if {c} < {n}:"] + indent(cmp) if cmp else []) + [
        f"if {c} < {n} and {below(f'{ks}[{c}]', k, s)}:"]
    inner = [f"{lo} = {c}", f"{step} = 1", f"{hi} = {c} + 1"]
    inner += [f"while {hi} < {n}:"]
    inner += indent(cmp + [f"if not ({below(f'{ks}[{hi}]', k, s)}):", f"{INDENT}break",
                           f"{lo} = {hi}", f"{step} *= 2", f"{hi} = {c} + {step}"])
    inner += [f"if {hi} > {n}:", f"{INDENT}{hi} = {n}"]
    if em.backend == "python" and not em.counting and s in ("True", "False"):
        bis = em.lift(bisect.bisect_right if s == "True" else bisect.bisect_left, "bisect")
        inner += [f"if {hi} - {lo} > 1:", f"{INDENT}{c} = {bis}({ks}, {k}, {lo} + 1, {hi})",
                  "else:", f"{INDENT}{c} = {hi}"]
    else:
        inner += [f"{a} = {lo} + 1", f"{b} = {hi}", f"while {a} < {b}:"]
        inner += indent([f"{m} = ({a} + {b}) // 2"] + cmp
                        + [f"if {below(f'{ks}[{m}]', k, s)}:", f"{INDENT}{a} = {m} + 1",
                           "else:", f"{INDENT}{b} = {m}"])
        inner += [f"{c} = {a}"]
    return body + indent(step1 + indent(inner))


def sparse_linear(keys: Sequence, values: Sequence) -> SparseVec:
    return SparseVec(keys, values, "linear")


def sparse_gallop(keys: Sequence, values: Sequence) -> SparseVec:
    return SparseVec(keys, values, "gallop")


def unordered(keys: Sequence, values: Sequence) -> SparseVec:
    """A stream that emits the pairs in the given order, keys unsorted and
    possibly repeated. Not strictly monotone; ``memo`` recovers order."""
    return SparseVec(keys, values, "linear", validate=False)


class Singleton(IndexedStream):
    """One entry ``key -> val``; the state is a done flag."""

    __slots__ = ("key", "val")

    def __init__(self, key, val):
        self.key = key
        self.val = val

    def start(self):
        return False

    def valid(self, q):
        return not q

    def ready(self, q):
        return True

    def index(self, q):
        return self.key

    def value(self, q):
        return self.val

    def seek(self, q, key, strict):
        _count()
        return self.key < key or (strict and self.key == key)

    def _shape(self):
        v = self.val
        if isinstance(v, IndexedStream):
            return ("singleton", "stream", v._shape()) if v._shape() is not None else None
        if isinstance(v, (Contraction, MaskFn)):
            return None
        return ("singleton",)

    def _gen(self, em, ref):
        init = []
        key = ref.load(em, init, "key", "key")
        d = em.fresh("done")
        init.append(f"{d} = False")
        vinit: list[str] = []
        v = data_val(em, ref, vinit, "val")
        v.stmts = vinit + v.stmts

        def seek(k, s):
            return em.count("seeks") + [f"if {below(key, k, s)}:", f"{INDENT}{d} = True"]

        return Gen(init, f"not {d}", key, "True", v, seek)

    def extent(self):
        return 1

    def __repr__(self):
        return f"singleton({self.key!r}, {self.val!r})"


def singleton(key, val) -> Singleton:
    return Singleton(key, val)


def mask(p: Callable[[Any], bool], value: Callable[[Any], Any] | None = None) -> MaskFn:
    """A key predicate for use as a ``zip_with`` factor."""
    return MaskFn(p, value)
