"""Reference semantics and executable stream laws.

Everything here walks streams through the plain protocol methods (never
through generated code), so it serves as an independent oracle for the
fused evaluators.
"""

from __future__ import annotations

import bisect
import dataclasses
import random
from collections import deque
from typing import Any, Iterable

from .core import (TOP, Contraction, ExtendedIndex, Finite, FuelExhausted, IndexedStream,
                   MaskFn, SeekTarget, extended_index)

DEFAULT_FUEL = 1_000_000
BOUNDED_SAMPLE = 32  # probe seeks replayed per bounded check
PROBE_CAP = 10_000  # traversal steps scanned for probe keys and sample states


# ---------------------------------------------------------------------------
# finitely supported functions


def is_zero(v) -> bool:
    if isinstance(v, FinMap):
        return not v.data
    try:
        return bool(v == 0) and not isinstance(v, str)
    except Exception:
        return False


def add(a, b):
    """Addition where an absent operand (None) is zero."""
    if a is None:
        return b
    if b is None:
        return a
    return a + b


class FinMap:
    """A function from keys to values that is zero off a finite support.

    Zero entries are dropped, so equality is equality of the non-zero
    entries. Values may themselves be FinMaps.
    """

    __slots__ = ("data",)

    def __init__(self, pairs: Iterable | dict = ()):
        items = pairs.items() if isinstance(pairs, dict) else pairs
        data: dict = {}
        for k, v in items:
            data[k] = add(data.get(k), v)
        self.data = {k: v for k, v in data.items() if not is_zero(v)}

    @classmethod
    def _normalized(cls, data: dict) -> FinMap:
        # data already free of zeros
        out = object.__new__(cls)
        out.data = data
        return out

    @staticmethod
    def single(k, v) -> FinMap:
        return FinMap(((k, v),))

    def __getitem__(self, k):
        return self.data.get(k, 0)

    def __contains__(self, k):
        return k in self.data

    def __len__(self):
        return len(self.data)

    def __iter__(self):
        return iter(sorted(self.data))

    def items(self):
        return sorted(self.data.items())

    def support(self):
        return sorted(self.data)

    def __eq__(self, other):
        if isinstance(other, FinMap):
            return self.data == other.data
        if is_zero(other) and not self.data:
            return True
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.data.items()))

    def __add__(self, other):
        if isinstance(other, (int, float)) and other == 0:
            return self
        if not isinstance(other, FinMap):
            return NotImplemented
        out = dict(self.data)
        for k, v in other.data.items():
            out[k] = add(out.get(k), v)
        return FinMap(out)

    __radd__ = __add__

    def __mul__(self, other):
        if isinstance(other, FinMap):
            return FinMap((k, v * other.data[k]) for k, v in self.data.items()
                          if k in other.data)
        return FinMap((k, v * other) for k, v in self.data.items())

    def __rmul__(self, other):
        return FinMap((k, other * v) for k, v in self.data.items())

    def restrict(self, keep) -> FinMap:
        return FinMap._normalized({k: v for k, v in self.data.items() if keep(k)})

    def to_dict(self):
        return {k: v.to_dict() if isinstance(v, FinMap) else v for k, v in self.items()}

    def __repr__(self):
        inner = ", ".join(f"{k!r}↦{v!r}" for k, v in self.items())
        return "{" + inner + "}"


def finmap_of(container) -> Any:
    """Canonical readout of a container (sinks, trees, dicts, nested) or a
    plain value."""
    if isinstance(container, FinMap):
        return container
    if isinstance(container, IndexedStream):
        return sem_eval(container)
    if isinstance(container, Contraction):
        return sem_eval(container)
    items = None
    if isinstance(container, dict):
        items = container.items()
    elif hasattr(container, "items") and hasattr(container, "zero"):
        items = container.items()
    if items is None:
        return container
    return FinMap((k, finmap_of(v)) for k, v in items)


# ---------------------------------------------------------------------------
# semantic evaluation


def eval_value(v, fuel=DEFAULT_FUEL):
    if isinstance(v, IndexedStream):
        return sem_eval(v, fuel=fuel)
    if isinstance(v, Contraction):
        return sem_eval(v, fuel=fuel)
    if isinstance(v, MaskFn):
        raise TypeError("a mask has no meaning on its own")
    return v


def sem_eval(s, q=None, fuel: int = DEFAULT_FUEL):
    """The meaning of a stream from state ``q`` (default: its start): the sum
    of singleton maps at its ready states along the ``next`` chain, with
    stream-valued entries evaluated recursively. A ``contract(s)`` means
    the sum of the entries of ``s``."""
    if isinstance(s, Contraction):
        total = None
        for _, v in sem_eval(s.stream, q, fuel).items():
            total = add(total, v)
        return 0 if total is None else total
    if q is None:
        q = s.start()
    pairs = []
    steps = 0
    while s.valid(q):
        steps += 1
        if steps > fuel:
            raise FuelExhausted(f"sem_eval of {type(s).__name__} ran out of fuel")
        i = s.index(q)
        r = s.ready(q)
        if r:
            pairs.append((i, eval_value(s.value(q), fuel)))
        q = s.seek(q, i, r)
    return FinMap(pairs)


def eval_pairs(s, q=None, fuel: int = DEFAULT_FUEL):
    """Emitted (key, evaluated value) pairs in traversal order, unsummed."""
    if q is None:
        q = s.start()
    out = []
    steps = 0
    while s.valid(q):
        steps += 1
        if steps > fuel:
            raise FuelExhausted("eval_pairs ran out of fuel")
        i = s.index(q)
        r = s.ready(q)
        if r:
            out.append((i, eval_value(s.value(q), fuel)))
        q = s.seek(q, i, r)
    return out


def mul_spec(a: FinMap, b: FinMap) -> FinMap:
    """Pointwise product of two meanings."""
    return a * b


# ---------------------------------------------------------------------------
# laws


@dataclasses.dataclass
class LawReport:
    """Outcome of one law check. ``trace`` holds the states visited and
    seek targets applied on the way to the first counterexample."""

    law: str
    passed: bool
    checked: int = 0
    exhaustive: bool = False
    counterexample: dict | None = None
    trace: list = dataclasses.field(default_factory=list)

    def __bool__(self):
        return self.passed

    def to_dict(self):
        return {"law": self.law, "passed": self.passed, "checked": self.checked,
                "exhaustive": self.exhaustive,
                "counterexample": None if self.counterexample is None
                else {k: repr(v) for k, v in self.counterexample.items()},
                "trace": [repr(x) for x in self.trace]}

    def describe(self) -> str:
        mode = "exhaustive" if self.exhaustive else "sampled"
        head = f"{self.law}: {'ok' if self.passed else 'FAILED'} ({self.checked} checks, {mode})"
        if self.passed:
            return head
        lines = [head]
        for k, v in (self.counterexample or {}).items():
            lines.append(f"  {k} = {v!r}")
        if self.trace:
            lines.append("  trace:")
            lines += [f"    {step!r}" for step in self.trace]
        return "\n".join(lines)


def _numeric(k):
    return isinstance(k, int) and not isinstance(k, bool)


def probe_keys(s, rng: random.Random | None = None, extra: int = 4, fuel=DEFAULT_FUEL):
    """Seek keys covering the support of ``s``: every support key, integer
    midpoints between neighbours, one key below the minimum and one above
    the maximum, plus ``extra`` random keys in range."""
    keys = _emitted_keys(s, min(fuel, PROBE_CAP))
    support = sorted(set(keys), key=_sort_key)
    out = list(support)
    if support and all(_numeric(k) for k in support):
        for a, b in zip(support, support[1:]):
            m = (a + b) // 2
            if a < m < b:
                out.append(m)
        lo, hi = support[0], support[-1]
        out += [lo - 1, hi + 1]
        if rng is not None:
            out += [rng.randint(lo - 2, hi + 2) for _ in range(extra)]
    elif support and all(isinstance(k, str) for k in support):
        out += ["", support[-1] + "￿"]
    elif not support:
        out += [0, 1]
    return sorted(set(out), key=_sort_key)


def _emitted_keys(s, cap):
    """Keys of the first ``cap`` traversal steps (a runaway stream still
    gets probed)."""
    out = []
    q = s.start()
    for _ in range(cap):
        if not s.valid(q):
            break
        i, r = s.index(q), s.ready(q)
        if r:
            out.append(i)
        q = s.seek(q, i, r)
    return out


def _sort_key(k):
    return (0, k) if _numeric(k) else (1, repr(k)) if not isinstance(k, str) else (2, k)


def probe_targets(keys) -> list[SeekTarget]:
    return [SeekTarget(k, b) for k in keys for b in (False, True)]


def reachable_states(s, targets, limit=64):
    """All states reachable from the start by seeks to ``targets``; None if
    there are more than ``limit``."""
    start = s.start()
    seen = {_state_key(start): start}
    queue = deque([start])
    while queue:
        q = queue.popleft()
        if not s.valid(q):
            continue
        for t in targets:
            q2 = s.seek(q, t.key, t.strict)
            k = _state_key(q2)
            if k not in seen:
                if len(seen) >= limit:
                    return None
                seen[k] = q2
                queue.append(q2)
    return list(seen.values())


def _state_key(q):
    try:
        hash(q)
        return ("h", q)
    except TypeError:
        return ("id", id(q))


def sample_states(s, targets, rng: random.Random, count=12, fuel=DEFAULT_FUEL):
    """States along the traversal plus states reached by random seeks,
    with the path that reached each."""
    out = []
    q = s.start()
    path: list = []
    steps = 0
    cap = min(fuel, PROBE_CAP)
    while s.valid(q) and steps < cap:
        out.append((q, list(path)))
        t = SeekTarget(s.index(q), s.ready(q))
        path.append(("next", t))
        q = s.seek(q, t.key, t.strict)
        steps += 1
    if len(out) > count:
        out = rng.sample(out, count)
    q, path = s.start(), []
    for _ in range(count):
        if not s.valid(q) or not targets:
            q, path = s.start(), []
            if not s.valid(q):
                break
        t = rng.choice(targets)
        path = path + [("seek", t)]
        q = s.seek(q, t.key, t.strict)
        if s.valid(q):
            out.append((q, path))
    return out


class _Probe:
    """Shared setup for the law checks on one stream."""

    def __init__(self, s, probes, seed, exhaustive, limit, fuel):
        self.s = s
        self.fuel = fuel
        self.rng = random.Random(seed)
        if probes is None:
            probes = probe_targets(probe_keys(s, self.rng, fuel=fuel))
        self.targets = list(probes)
        states = None
        if exhaustive in (True, "auto"):
            states = reachable_states(s, self.targets, limit)
            if states is None and exhaustive is True:
                raise ValueError(f"more than {limit} reachable states")
        self.exhaustive = states is not None
        if states is not None:
            self.states = [(q, []) for q in states if s.valid(q)]
        else:
            self.states = sample_states(s, self.targets, self.rng, fuel=fuel)
        if not self.exhaustive and len(self.targets) > 16:
            self.targets_per_state = 16
        else:
            self.targets_per_state = None

    def pairs(self):
        for q, path in self.states:
            ts = self.targets
            if self.targets_per_state is not None:
                ts = self.rng.sample(ts, self.targets_per_state)
            for t in ts:
                yield q, path, t


def _report(law, probe, fail=None, checked=0):
    if fail is None:
        return LawReport(law, True, checked, probe.exhaustive)
    cex, trace = fail
    return LawReport(law, False, checked, probe.exhaustive, cex, trace)


def check_monotone(s, probes=None, *, seed=0, exhaustive="auto", limit=64,
                   fuel=DEFAULT_FUEL, probe=None) -> LawReport:
    """``seek`` never lowers the index (an exhausted state counts as top)."""
    p = probe or _Probe(s, probes, seed, exhaustive, limit, fuel)
    n = 0
    for q, path, t in p.pairs():
        n += 1
        before = Finite(s.index(q))
        q2 = s.seek(q, t.key, t.strict)
        after = extended_index(s, q2)
        if after < before:
            return _report("monotone", p, ({"state": q, "target": t, "index_before": before,
                                            "index_after": after}, path + [("seek", t)]), n)
    return _report("monotone", p, checked=n)


def check_strict_mono(s, probes=None, *, seed=0, exhaustive="auto", limit=64,
                      fuel=DEFAULT_FUEL, probe=None) -> LawReport:
    """From a ready state, ``next`` strictly raises the index."""
    p = probe or _Probe(s, probes, seed, exhaustive, limit, fuel)
    n = 0
    for q, path in p.states:
        if not s.ready(q):
            continue
        n += 1
        before = Finite(s.index(q))
        t = SeekTarget(s.index(q), True)
        after = extended_index(s, s.seek(q, t.key, True))
        if not before < after:
            return _report("strict_mono", p, ({"state": q, "index_before": before,
                                               "index_after": after}, path + [("next", t)]), n)
    return _report("strict_mono", p, checked=n)


def _at_or_after(t: SeekTarget):
    if t.strict:
        return lambda j: j > t.key
    return lambda j: j >= t.key


def check_lawful(s, probes=None, *, seed=0, exhaustive="auto", limit=64,
                 fuel=DEFAULT_FUEL, probe=None) -> LawReport:
    """Seeking to ``(i, b)`` keeps the meaning at every key ``j`` with
    ``(j, False) >= (i, b)``."""
    p = probe or _Probe(s, probes, seed, exhaustive, limit, fuel)
    n = 0
    memo: dict = {}

    def meaning(q):
        # (q, keys, items): holding q keeps an id-based key from being
        # recycled; sorted items make each comparison a slice compare
        key = _state_key(q)
        hit = memo.get(key)
        if hit is None:
            items = sem_eval(s, q, fuel).items()
            hit = memo[key] = (q, [k for k, _ in items], items)
        return hit

    for q, path, t in p.pairs():
        n += 1
        _, kb, before = meaning(q)
        _, ka, after = meaning(s.seek(q, t.key, t.strict))
        cut = bisect.bisect_right if t.strict else bisect.bisect_left
        b, a = before[cut(kb, t.key):], after[cut(ka, t.key):]
        if a != b:
            return _report("lawful", p, ({"state": q, "target": t, "before": FinMap(b),
                                          "after": FinMap(a)}, path + [("seek", t)]), n)
    return _report("lawful", p, checked=n)


def check_bounded(s, fuel: int | None = None, probes=None, *, seed=0) -> LawReport:
    """Fuel surrogate for termination: the traversal from the start, and
    from every probe seek, ends within ``fuel`` steps. The default is
    ``2 * max(extent, emitted) + 2`` where ``extent`` counts the backing
    entries (``2n + 2`` for a source of ``n`` entries)."""
    if fuel is None:
        fuel = 2 * s.extent() + 2
        try:
            fuel = max(fuel, 2 * len(eval_pairs(s, fuel=fuel)) + 2)
        except FuelExhausted:
            return LawReport("bounded", False, 1, False, {"fuel": fuel, "from": "start"}, [])
    rng = random.Random(seed)
    if probes is None:
        probes = probe_targets(probe_keys(s, rng))
    probes = list(probes)
    if len(probes) > BOUNDED_SAMPLE:
        probes = rng.sample(probes, BOUNDED_SAMPLE)
    checked = 0
    for t in [None] + list(probes):
        q = s.start()
        trace = []
        if t is not None and s.valid(q):
            q = s.seek(q, t.key, t.strict)
            trace.append(("seek", t))
        steps = 0
        while s.valid(q):
            steps += 1
            if steps > fuel:
                return LawReport("bounded", False, checked, False,
                                 {"fuel": fuel, "after": t}, trace)
            q = s.seek(q, s.index(q), s.ready(q))
        checked += 1
    return LawReport("bounded", True, checked, False)


def check_all(s, *, seed=0, fuel: int | None = None, exhaustive="auto") -> dict[str, LawReport]:
    """All four laws; the probe states are explored once and shared."""
    p = _Probe(s, None, seed, exhaustive, 64, DEFAULT_FUEL)
    return {
        "monotone": check_monotone(s, probe=p),
        "strict_mono": check_strict_mono(s, probe=p),
        "lawful": check_lawful(s, probe=p),
        "bounded": check_bounded(s, fuel, p.targets, seed=seed),
    }


__all__ = ["FinMap", "LawReport", "sem_eval", "eval_pairs", "mul_spec", "finmap_of",
           "check_monotone", "check_strict_mono", "check_lawful", "check_bounded", "check_all",
           "probe_keys", "probe_targets", "reachable_states", "ExtendedIndex", "TOP"]
