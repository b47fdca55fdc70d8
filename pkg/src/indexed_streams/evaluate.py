"""Evaluating streams into containers.

``eval_into(value, dst)`` picks one of three evaluators from the shapes of
its arguments:

* a plain value is added: ``dst + value``;
* a stream evaluated into a keyed sink updates the sink entry at each
  emitted key with the recursively evaluated value (destination passing:
  inner levels are written straight into the destination's own slots);
* a ``contract(...)`` stream, or any stream evaluated into a non-keyed
  accumulator, adds every evaluated value into that one accumulator.

Sinks follow a small keyed-update contract::

    update(key, modify) -> sink   replace entry at key by modify(entry)
    zero()                        a fresh default entry
    slot(key) / put(key, entry)   optional split form of update

A missing entry reads as ``zero()``.
"""

from __future__ import annotations

import bisect
from typing import Any, Callable

from .core import Contraction, IndexedStream
from .fusion import compile_eval, is_modifiable
from .rbtree import OrderedTreeMap, tree_stream
from .sources import DenseVec, SparseVec


def eval_into(value, dst, *, backend: str = "python", fuel: int | None = None):
    if isinstance(value, (IndexedStream, Contraction)):
        return compile_eval(value, dst, backend=backend, fuel=fuel)(dst)
    if is_modifiable(dst):
        raise TypeError(f"cannot add a plain {type(value).__name__} into {type(dst).__name__}")
    return dst + value


def eval_nested(s: IndexedStream, sink, **kw):
    """Materialize ``s`` into ``sink`` (updated in place when it is mutable)."""
    if not is_modifiable(sink):
        raise TypeError(f"{type(sink).__name__} is not a keyed sink")
    return eval_into(s, sink, **kw)


def eval_aggregate(s: IndexedStream, acc, **kw):
    """``acc`` plus the sum of the evaluated values of ``s``."""
    return eval_into(Contraction(s), acc, **kw)


def contract(s: IndexedStream) -> Contraction:
    """Mark ``s`` so that evaluation sums over its keys."""
    return Contraction(s)


def compiled(s, proto, *, backend: str = "python"):
    """``eval_into`` compiled once, for repeated runs on destinations shaped
    like ``proto``."""
    return compile_eval(s, proto, backend=backend)


# ---------------------------------------------------------------------------
# sinks


def _zero_of(default):
    return default() if callable(default) else default


class _SinkBase:
    __slots__ = ()

    def add(self, key, value):
        self.put(key, self.slot(key) + value)

    def update(self, key, modify: Callable[[Any], Any]):
        self.put(key, modify(self.slot(key)))
        return self


class MapSink(_SinkBase):
    """A dict whose missing entries read as ``default`` (a value, or a
    factory for mutable entries such as nested sinks)."""

    __slots__ = ("data", "default")

    def __init__(self, default: Any = 0, data: dict | None = None):
        self.default = default
        self.data = {} if data is None else data

    def zero(self):
        return _zero_of(self.default)

    def slot(self, key):
        v = self.data.get(key)
        return _zero_of(self.default) if v is None else v

    def put(self, key, value):
        self.data[key] = value

    def add(self, key, value):
        d = self.data
        v = d.get(key)
        d[key] = (_zero_of(self.default) if v is None else v) + value

    def gen_add(self, em, dst, key, value):
        """Inline code for ``dst.add(key, value)`` in a fused loop."""
        if callable(self.default):
            return [f"{dst}.add({key}, {value})"]
        zero = em.lift(self.default, "zero")
        return [f"{dst}.data[{key}] = {dst}.data.get({key}, {zero}) + {value}"]

    def get(self, key):
        return self.data.get(key)

    def __len__(self):
        return len(self.data)

    def items(self):
        return sorted(self.data.items())

    def __repr__(self):
        return f"MapSink({self.data!r})"


class SparseVecBuilder(_SinkBase):
    """Sorted parallel arrays; appends are O(1), out-of-order keys are
    inserted by binary search."""

    __slots__ = ("keys", "values", "default")

    def __init__(self, default: Any = 0):
        self.default = default
        self.keys: list = []
        self.values: list = []

    def zero(self):
        return _zero_of(self.default)

    def _find(self, key):
        ks = self.keys
        if ks and ks[-1] == key:
            return len(ks) - 1
        if not ks or ks[-1] < key:
            return -1
        i = bisect.bisect_left(ks, key)
        return i if ks[i] == key else -1

    def slot(self, key):
        i = self._find(key)
        return _zero_of(self.default) if i < 0 else self.values[i]

    def put(self, key, value):
        ks = self.keys
        if not ks or ks[-1] < key:
            ks.append(key)
            self.values.append(value)
            return
        i = bisect.bisect_left(ks, key)
        if ks[i] == key:
            self.values[i] = value
        else:
            ks.insert(i, key)
            self.values.insert(i, value)

    def items(self):
        return list(zip(self.keys, self.values))

    def finish(self, search: str = "gallop") -> SparseVec:
        vals = [v.finish(search) if isinstance(v, SparseVecBuilder) else
                v.finish() if isinstance(v, DenseVecBuilder) else v for v in self.values]
        return SparseVec(list(self.keys), vals, search)

    def __len__(self):
        return len(self.keys)

    def __repr__(self):
        return f"SparseVecBuilder({self.items()!r})"


class DenseVecBuilder(_SinkBase):
    """A list indexed by non-negative integer keys; grows on demand."""

    __slots__ = ("values", "default")

    def __init__(self, default: Any = 0, size: int = 0):
        self.default = default
        self.values = [_zero_of(default) for _ in range(size)]

    def zero(self):
        return _zero_of(self.default)

    def slot(self, key):
        if key < 0:
            raise IndexError(f"dense keys must be non-negative, got {key!r}")
        vs = self.values
        return vs[key] if key < len(vs) else _zero_of(self.default)

    def put(self, key, value):
        if key < 0:
            raise IndexError(f"dense keys must be non-negative, got {key!r}")
        vs = self.values
        while len(vs) <= key:
            vs.append(_zero_of(self.default))
        vs[key] = value

    def items(self):
        return list(enumerate(self.values))

    def finish(self) -> DenseVec:
        return DenseVec(list(self.values))

    def __len__(self):
        return len(self.values)

    def __repr__(self):
        return f"DenseVecBuilder({self.values!r})"


def map_of_maps(default: Any = 0) -> MapSink:
    """A two-level dict sink."""
    return MapSink(lambda: MapSink(default))


# ---------------------------------------------------------------------------
# back to streams


def to_stream(container, search: str = "gallop") -> IndexedStream:
    """A stream over a materialized container (nested containers become
    nested streams)."""
    if isinstance(container, OrderedTreeMap):
        return tree_stream(container)
    if isinstance(container, SparseVecBuilder):
        return SparseVec(list(container.keys),
                         [_nested_stream(v, search) for v in container.values], search)
    if isinstance(container, DenseVecBuilder):
        return DenseVec([_nested_stream(v, search) for v in container.values])
    if isinstance(container, MapSink):
        items = container.items()
        return SparseVec([k for k, _ in items], [_nested_stream(v, search) for _, v in items],
                         search)
    if isinstance(container, IndexedStream):
        return container
    if isinstance(container, dict):
        items = sorted(container.items())
        return SparseVec([k for k, _ in items], [_nested_stream(v, search) for _, v in items],
                         search)
    raise TypeError(f"no stream for {type(container).__name__}")


def _nested_stream(v, search):
    if isinstance(v, (OrderedTreeMap, SparseVecBuilder, DenseVecBuilder, MapSink, dict)):
        return to_stream(v, search)
    return v


def memo(s: IndexedStream, default: Any = 0) -> IndexedStream:
    """Evaluate ``s`` into an ordered tree (repeated keys add up) and stream
    the tree back: the result is strictly monotone whatever the input
    order."""
    return tree_stream(eval_into(s, OrderedTreeMap(default)))
