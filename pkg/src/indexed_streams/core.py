"""The indexed stream contract, the derived ``next``, and ``fold``.

A stream is a state machine over an opaque, immutable state ``q``::

    valid(q)              may more output exist
    ready(q)              (valid only) does q carry an emission
    index(q)              (valid only) lower bound on the next emitted key
    seek(q, key, strict)  (valid only) advance toward key, past it if strict
    value(q)              (valid and ready only) the emission at index(q)

States are plain values (ints, tuples, tree nodes) so that a traversal can
be resumed from any saved state; the law checkers rely on this.
"""

from __future__ import annotations

import contextlib
import functools
from typing import Any, Callable, NamedTuple


class FuelExhausted(RuntimeError):
    """A traversal did not terminate within its step budget."""


class SeekTarget(NamedTuple):
    """Where ``seek`` is asked to go; tuples order lexicographically, so
    ``(k, False) < (k, True)``."""

    key: Any
    strict: bool = False


@functools.total_ordering
class _Bottom:
    """A key below every other key; the initial position of ``repeat``."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return other is not self

    def __hash__(self):
        return 0x0B07

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __repr__(self):
        return "BOTTOM"


BOTTOM = _Bottom()


@functools.total_ordering
class ExtendedIndex:
    """``Finite(key)`` for valid states, ``TOP`` for exhausted ones."""

    __slots__ = ("key", "top")

    def __init__(self, key=None, top=False):
        self.key = key
        self.top = top

    def __eq__(self, other):
        if not isinstance(other, ExtendedIndex):
            return NotImplemented
        if self.top or other.top:
            return self.top and other.top
        return self.key == other.key

    def __lt__(self, other):
        if self.top:
            return False
        if other.top:
            return True
        return self.key < other.key

    def __hash__(self):
        return hash(("top",)) if self.top else hash(self.key)

    def __repr__(self):
        return "Top" if self.top else f"Finite({self.key!r})"


TOP = ExtendedIndex(top=True)


def Finite(key):
    return ExtendedIndex(key)


def extended_index(s: IndexedStream, q) -> ExtendedIndex:
    return Finite(s.index(q)) if s.valid(q) else TOP


class StepCounter:
    """Instrumentation for complexity tests.

    ``seeks`` counts seek calls that reach a concrete source, ``comparisons``
    counts key comparisons made by searching seeks, ``emissions`` counts
    ready states consumed by a fold.
    """

    __slots__ = ("seeks", "comparisons", "emissions")

    def __init__(self):
        self.reset()

    def reset(self):
        self.seeks = 0
        self.comparisons = 0
        self.emissions = 0

    def as_dict(self):
        return {"seeks": self.seeks, "comparisons": self.comparisons,
                "emissions": self.emissions}

    def __repr__(self):
        return (f"StepCounter(seeks={self.seeks}, comparisons={self.comparisons}, "
                f"emissions={self.emissions})")


class _Instrumentation:
    counter: StepCounter | None = None


instrumentation = _Instrumentation()


@contextlib.contextmanager
def count_steps(counter: StepCounter | None = None):
    """Count seeks/comparisons/emissions for everything run in the block.

    Outside this block no counting code runs at all: compiled folds are
    generated without counter updates.
    """
    counter = counter if counter is not None else StepCounter()
    prev = instrumentation.counter
    instrumentation.counter = counter
    try:
        yield counter
    finally:
        instrumentation.counter = prev


class IndexedStream:
    """Base class of all streams.

    Subclasses implement the five protocol methods plus ``start``. They may
    also implement ``_gen`` to take part in loop fusion (see ``fusion``).
    """

    __slots__ = ()

    # child streams and plain data fields, used when generating fused code
    _children: tuple[str, ...] = ()

    def start(self):
        raise NotImplementedError

    def valid(self, q) -> bool:
        raise NotImplementedError

    def ready(self, q) -> bool:
        raise NotImplementedError

    def index(self, q):
        raise NotImplementedError

    def seek(self, q, key, strict: bool):
        raise NotImplementedError

    def value(self, q):
        raise NotImplementedError

    def next(self, q):
        return self.seek(q, self.index(q), self.ready(q))

    def extent(self) -> int:
        """Backing entries a traversal may visit (nested values excluded);
        the yardstick for the bounded-law fuel."""
        total = 0
        for cls in type(self).__mro__:
            for name in getattr(cls, "__slots__", ()):
                v = getattr(self, name, None)
                if isinstance(v, IndexedStream):
                    total += v.extent()
        return total

    def _gen(self, em, ref):
        raise NotImplementedError(f"{type(self).__name__} cannot be fused")

    def _shape(self):
        """Structural key when instances can share generated code, else None."""
        return None

    # fluent helpers

    def map(self, f):
        from .combinators import map_
        return map_(f, self)

    def filter(self, p):
        from .combinators import filter_
        return filter_(p, self)

    def zip_with(self, combine, other):
        from .combinators import zip_with
        return zip_with(combine, self, other)

    def __mul__(self, other):
        from .combinators import mul
        return mul(self, other)

    def sum(self, zero=0):
        from .combinators import sum_
        return sum_(self, zero)

    def fold(self, f, init):
        return fold(f, self, init)

    def items(self):
        """Emitted (key, value) pairs via the plain protocol; for debugging."""
        out = []
        q = self.start()
        while self.valid(q):
            if self.ready(q):
                out.append((self.index(q), self.value(q)))
            q = self.next(q)
        return out


def next_state(s: IndexedStream, q):
    """``seek(q, index(q), ready(q))``: step past the current key once it has
    been emitted, otherwise toward it."""
    assert s.valid(q), "next on an invalid state"
    return s.seek(q, s.index(q), s.ready(q))


def fold(f: Callable[[Any, Any, Any], Any], s: IndexedStream, init, *,
         fuel: int | None = None, backend: str = "python"):
    """Left fold of ``f(acc, key, value)`` over the emissions of ``s``.

    The stream expression is compiled into a single loop (cached per
    expression structure). ``fuel`` bounds the number of loop iterations and
    raises ``FuelExhausted`` when exceeded.
    """
    from .fusion import run_fold
    return run_fold(f, s, init, backend=backend, fuel=fuel)


def fold_protocol(f, s: IndexedStream, init, fuel: int | None = None):
    """The same fold, driven through the protocol methods only."""
    acc = init
    q = s.start()
    while s.valid(q):
        if fuel is not None:
            fuel -= 1
            if fuel < 0:
                raise FuelExhausted(f"fold of {type(s).__name__} ran out of fuel")
        i = s.index(q)
        r = s.ready(q)
        if r:
            acc = f(acc, i, s.value(q))
        q = s.seek(q, i, r)
    return acc


class Contraction:
    """A stream whose keys are summed away when it is evaluated.

    ``eval_into(contract(s), acc)`` adds every evaluated value of ``s`` into
    ``acc``; it is how a join attribute is aggregated (e.g. the ``j`` of a
    matrix product).
    """

    __slots__ = ("stream",)

    def __init__(self, stream: IndexedStream):
        self.stream = stream

    def __repr__(self):
        return f"contract({self.stream!r})"


class MaskFn:
    """A key predicate used as a join factor: ``zip_with(f, mask(p), s)``
    keeps the entries of ``s`` whose key satisfies ``p``, combining
    ``value(k)`` with the partner's value. Not a stream: it cannot drive a
    traversal on its own.
    """

    __slots__ = ("p", "value")

    def __init__(self, p: Callable[[Any], bool], value: Callable[[Any], Any] | None = None):
        self.p = p
        self.value = value if value is not None else _true

    def __repr__(self):
        return f"mask({self.p!r})"


def _true(k):
    return True


def take_left(a, b):
    return a


def take_right(a, b):
    return b
