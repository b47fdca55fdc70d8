"""Stream transformers and the intersection product.

Every combinator is defined componentwise on its inputs, both as protocol
methods and as code fragments, so a composed expression compiles to a
single loop.
"""

from __future__ import annotations

import operator
from typing import Any, Callable

from .core import BOTTOM, IndexedStream, MaskFn, take_right
from .fusion import INDENT, Gen, Val, and_, data_val, indent, run_sum
from .sources import range_


class Mapped(IndexedStream):
    """``value = f(index, inner.value)``; everything else delegates."""

    __slots__ = ("f", "inner")

    def __init__(self, f, inner):
        self.f = f
        self.inner = inner

    def start(self):
        return self.inner.start()

    def valid(self, q):
        return self.inner.valid(q)

    def ready(self, q):
        return self.inner.ready(q)

    def index(self, q):
        return self.inner.index(q)

    def seek(self, q, key, strict):
        return self.inner.seek(q, key, strict)

    def value(self, q):
        return self.f(self.inner.index(q), self.inner.value(q))

    def _gen(self, em, ref):
        g = self.inner._gen(em, ref.child("inner"))
        key = Val(g.index)
        g.value = em.apply(_field(ref, "f"), [key, g.value])
        return g

    def __repr__(self):
        return f"map_({self.f!r}, {self.inner!r})"


def _field(ref, attr):
    return ref.data(attr)


class Filtered(IndexedStream):
    """``ready = inner.ready and p(inner.value)``.

    A rejected emission is stepped over strictly: a non-strict seek to the
    current key from a rejected state would otherwise leave the state
    unchanged and the traversal would never advance.
    """

    __slots__ = ("p", "inner")

    def __init__(self, p, inner):
        self.p = p
        self.inner = inner

    def start(self):
        return self.inner.start()

    def valid(self, q):
        return self.inner.valid(q)

    def ready(self, q):
        return self.inner.ready(q) and bool(self.p(self.inner.value(q)))

    def index(self, q):
        return self.inner.index(q)

    def seek(self, q, key, strict):
        inner = self.inner
        if not strict and inner.ready(q) and inner.index(q) == key \
                and not self.p(inner.value(q)):
            strict = True
        return inner.seek(q, key, strict)

    def value(self, q):
        return self.inner.value(q)

    def _gen(self, em, ref):
        g = self.inner._gen(em, ref.child("inner"))
        test = em.apply(_field(ref, "p"), [g.value])
        return _guarded(em, g, test, g.value)

    def __repr__(self):
        return f"filter_({self.p!r}, {self.inner!r})"


def _guarded(em, g, test: Val, value: Val) -> Gen:
    """``g`` with readiness further restricted by ``test`` (and the strict
    step over rejected emissions)."""
    r = em.fresh("r")
    check = test.stmts + [f"{r} = {test.expr}"]
    prep = list(g.prep)
    if g.ready == "True":
        prep += check
    else:
        prep += [f"{r} = False", f"if {g.ready}:"] + indent(check)
    inner_ready, index, inner_seek = g.ready, g.index, g.seek

    def seek(k, s):
        if s == "True":
            return inner_seek(k, s)
        s2 = em.fresh("s")
        cond = and_(inner_ready, f"not {r}", f"{index} == {k}")
        line = f"{s2} = {cond}" if s == "False" else f"{s2} = {s} or {cond}"
        return [line] + inner_seek(k, s2)

    return Gen(g.init, g.valid, index, r, value, seek, prep)


class ZipWith(IndexedStream):
    """Intersection of two streams, combining values with ``f``.

    The state is the pair of states; the index is the larger child index,
    and both children are sent the same seek target, so each side skips
    ahead to wherever the other one is (leapfrogging).
    """

    __slots__ = ("f", "a", "b")

    def __init__(self, f, a, b):
        self.f = f
        self.a = a
        self.b = b

    def start(self):
        return (self.a.start(), self.b.start())

    def valid(self, q):
        return self.a.valid(q[0]) and self.b.valid(q[1])

    def index(self, q):
        ia = self.a.index(q[0])
        ib = self.b.index(q[1])
        return ia if ib < ia else ib

    def ready(self, q):
        qa, qb = q
        return (self.a.ready(qa) and self.b.ready(qb)
                and self.a.index(qa) == self.b.index(qb))

    def seek(self, q, key, strict):
        return (self.a.seek(q[0], key, strict), self.b.seek(q[1], key, strict))

    def value(self, q):
        return self.f(self.a.value(q[0]), self.b.value(q[1]))

    def _gen(self, em, ref):
        ga = self.a._gen(em, ref.child("a"))
        gb = self.b._gen(em, ref.child("b"))
        prep = ga.prep + gb.prep
        ia, ib = ga.index, gb.index
        if ia is None or ib is None:
            index = ib if ia is None else ia
            ready = and_(ga.ready, gb.ready)
        else:
            index = em.fresh("m")
            prep.append(f"{index} = {ib} if {ia} < {ib} else {ia}")
            ready = and_(f"{ia} == {ib}", ga.ready, gb.ready)
        value = em.apply(_field(ref, "f"), [ga.value, gb.value])

        def seek(k, s):
            return ga.seek(k, s) + gb.seek(k, s)

        return Gen(ga.init + gb.init, and_(ga.valid, gb.valid), index, ready, value,
                   seek, prep)

    def __repr__(self):
        return f"zip_with({self.f!r}, {self.a!r}, {self.b!r})"


class MaskJoin(IndexedStream):
    """A stream restricted to keys satisfying a mask predicate.

    The partner drives the traversal; the predicate is evaluated only at
    the partner's ready states.
    """

    __slots__ = ("f", "mask", "inner", "mask_left")

    def __init__(self, f, mask: MaskFn, inner, mask_left=True):
        self.f = f
        self.mask = mask
        self.inner = inner
        self.mask_left = mask_left

    def start(self):
        return self.inner.start()

    def valid(self, q):
        return self.inner.valid(q)

    def index(self, q):
        return self.inner.index(q)

    def ready(self, q):
        return self.inner.ready(q) and bool(self.mask.p(self.inner.index(q)))

    def seek(self, q, key, strict):
        inner = self.inner
        if not strict and inner.ready(q) and inner.index(q) == key \
                and not self.mask.p(key):
            strict = True
        return inner.seek(q, key, strict)

    def value(self, q):
        k = self.inner.index(q)
        m = self.mask.value(k)
        v = self.inner.value(q)
        return self.f(m, v) if self.mask_left else self.f(v, m)

    def _gen(self, em, ref):
        g = self.inner._gen(em, ref.child("inner"))
        key = Val(g.index)
        mref = ref.child("mask")
        test = em.apply(mref.data("p"), [key])
        m = em.apply(mref.data("value"), [key])
        args = [m, g.value] if self.mask_left else [g.value, m]
        value = em.apply(_field(ref, "f"), args)
        return _guarded(em, g, test, value)

    def __repr__(self):
        return f"zip_with({self.f!r}, {self.mask!r}, {self.inner!r})"


class Repeat(IndexedStream):
    """The constant ``v`` at every key. Its state is a notional key that
    seeks move forward; joined with a bounded partner it acts as a
    broadcast, alone it never terminates."""

    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def extent(self):
        return 0

    def start(self):
        return BOTTOM

    def valid(self, q):
        return True

    def ready(self, q):
        return True

    def index(self, q):
        return q

    def seek(self, q, key, strict):
        return key if q < key else q

    def value(self, q):
        return self.v

    def _shape(self):
        v = self.v
        if isinstance(v, IndexedStream):
            return ("repeat", v._shape()) if v._shape() is not None else None
        return None if isinstance(v, MaskFn) else ("repeat",)

    def _gen(self, em, ref):
        init: list[str] = []
        v = data_val(em, ref, init, "v")
        return Gen(init, "True", None, "True", v, lambda k, s: [])

    def __repr__(self):
        return f"repeat({self.v!r})"


# ---------------------------------------------------------------------------
# public constructors


def _stream(x, what):
    if not isinstance(x, IndexedStream):
        raise TypeError(f"{what} needs an indexed stream, got {type(x).__name__}")
    return x


def map_(f: Callable[[Any, Any], Any], s: IndexedStream) -> Mapped:
    """Apply ``f(key, value)`` to every emission."""
    return Mapped(f, _stream(s, "map_"))


def filter_(p: Callable[[Any], bool], s: IndexedStream) -> Filtered:
    """Keep the emissions whose value satisfies ``p``."""
    return Filtered(p, _stream(s, "filter_"))


def zip_with(f: Callable[[Any, Any], Any], a, b) -> IndexedStream:
    """Pointwise ``f`` over the keys present in both ``a`` and ``b``.

    Either side may be a ``mask``; then the other side drives the
    traversal. Inputs should be strictly monotone and lawful.
    """
    if isinstance(a, MaskFn):
        if isinstance(b, MaskFn):
            raise TypeError("zip_with of two masks has nothing to drive it")
        return MaskJoin(f, a, _stream(b, "zip_with"), True)
    if isinstance(b, MaskFn):
        return MaskJoin(f, b, _stream(a, "zip_with"), False)
    return ZipWith(f, _stream(a, "zip_with"), _stream(b, "zip_with"))


def mul(a, b):
    """``zip_with`` of ``*``: intersect and multiply. Plain numbers just
    multiply, so ``mul`` also serves as a value combiner."""
    if type(a) in _NUMBERS and type(b) in _NUMBERS:
        return a * b
    return zip_with(operator.mul, a, b)


_NUMBERS = (int, float, bool, complex)


def repeat(v) -> Repeat:
    return Repeat(v)


def sum_(s: IndexedStream, zero=0, *, backend: str = "python"):
    """The sum of all emitted values."""
    return run_sum(s, zero, backend=backend)


def slice_(arr: IndexedStream, i, j) -> IndexedStream:
    """Entries of ``arr`` with ``i <= key < j``."""
    return zip_with(take_right, range_(i, j), arr)


def _mask_mul(self, other):
    return mul(self, other)


MaskFn.__mul__ = _mask_mul
MaskFn.__rmul__ = lambda self, other: mul(other, self)
