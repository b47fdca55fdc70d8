import json
import random

import pytest

from indexed_streams import (FinMap, FuelExhausted, IndexedStream, check_all, check_bounded,
                             check_lawful, check_monotone, check_strict_mono, mul, mul_spec,
                             range_, repeat, sem_eval, sparse_gallop, sparse_linear)
from indexed_streams.semantics import probe_keys, probe_targets, reachable_states


class ListStream(IndexedStream):
    """A sorted-list stream with a correct seek, for subclassing below."""

    def __init__(self, keys, values=None):
        self.keys = list(keys)
        self.values = list(values) if values is not None else [1] * len(self.keys)

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

    def behind(self, q, key, strict):
        k = self.keys[q]
        return k < key or (strict and k == key)

    def seek(self, q, key, strict):
        return q + 1 if self.behind(q, key, strict) else q


class Retreating(ListStream):
    """Steps back when asked to stay put."""

    def seek(self, q, key, strict):
        if not self.behind(q, key, strict) and q > 0:
            return q - 1
        return super().seek(q, key, strict)


class Overshooting(ListStream):
    """A non-strict seek lands one entry past the target, skipping a live
    key; plain ``next`` steps are correct."""

    def seek(self, q, key, strict):
        if strict or not self.behind(q, key, strict):
            return super().seek(q, key, strict)
        while self.valid(q) and self.keys[q] < key:
            q += 1
        return q + 1


class Stuck(ListStream):
    """Ignores the strict flag, so next never leaves a ready state."""

    def seek(self, q, key, strict):
        return super().seek(q, key, False)


def test_finmap_drops_zeros_and_adds_duplicates():
    assert FinMap([(1, 2), (1, -2), (3, 0)]) == FinMap()
    assert FinMap([(1, 2), (1, 3)]) == FinMap({1: 5})
    assert FinMap({2: 0}) == 0


def test_finmap_arithmetic():
    a, b = FinMap({1: 2, 2: 3}), FinMap({2: 4, 5: 1})
    assert a + b == FinMap({1: 2, 2: 7, 5: 1})
    assert a * b == FinMap({2: 12})
    assert 3 * a == FinMap({1: 6, 2: 9})
    assert a + 0 == a
    assert (a + FinMap({1: -2})).support() == [2]


def test_nested_finmap_readout():
    m = FinMap({1: FinMap({2: 3}), 4: FinMap()})
    assert m.to_dict() == {1: {2: 3}}


def test_sem_eval_examples():
    assert sem_eval(sparse_linear([], [])) == FinMap()
    assert sem_eval(sparse_linear([1, 3], [2, 4])) == FinMap({1: 2, 3: 4})
    with pytest.raises(FuelExhausted):
        sem_eval(repeat(1), fuel=500)


def test_mul_matches_pointwise_product():
    rng = random.Random(0)
    for _ in range(100):
        ka = sorted(rng.sample(range(100), rng.randint(0, 30)))
        kb = sorted(rng.sample(range(100), rng.randint(0, 30)))
        a = sparse_gallop(ka, [rng.randint(-5, 5) for _ in ka])
        b = sparse_linear(kb, [rng.randint(-5, 5) for _ in kb])
        da, db = dict(zip(a.keys, a.values)), dict(zip(b.keys, b.values))
        oracle = {k: da[k] * db[k] for k in da if k in db}
        assert sem_eval(mul(a, b)) == mul_spec(sem_eval(a), sem_eval(b)) == FinMap(oracle)


def test_probe_keys_cover_support_gaps_and_ends():
    keys = probe_keys(sparse_linear([2, 10, 11], [1, 1, 1]))
    assert {2, 10, 11, 6, 1, 12} <= set(keys)
    keys = probe_keys(sparse_linear(["b", "d"], [1, 1]))
    assert keys[0] == "" and keys[-1] > "d"


def test_reachable_states_enumerates_small_machines():
    s = sparse_linear([1, 5, 7], [1, 1, 1])
    states = reachable_states(s, probe_targets([0, 1, 5, 7, 8]))
    assert sorted(states) == [0, 1, 2, 3]
    assert reachable_states(range_(0, 500), probe_targets(range(500)), limit=64) is None


def test_exhaustive_flag():
    assert check_monotone(range_(0, 10)).exhaustive
    assert not check_monotone(range_(0, 500)).exhaustive
    with pytest.raises(ValueError):
        check_monotone(range_(0, 500), exhaustive=True)


@pytest.mark.parametrize("s", [range_(0, 10), sparse_linear([1, 4], [2, 2]),
                               mul(sparse_linear([1, 4, 6], [1, 1, 1]), range_(0, 5)),
                               mul(repeat(3), sparse_gallop([2, 3], [1, 1]))])
def test_shipped_streams_pass(s):
    for report in check_all(s).values():
        assert report.passed, report.describe()


def test_retreating_seek_fails_monotone_with_trace():
    report = check_monotone(Retreating([1, 3, 5, 7]))
    assert not report.passed
    assert report.counterexample["index_after"] < report.counterexample["index_before"]
    assert report.trace and report.trace[-1][0] == "seek"
    assert "FAILED" in report.describe()


def test_overshooting_seek_fails_lawful():
    report = check_lawful(Overshooting([1, 3, 5, 7, 9]))
    assert not report.passed
    assert report.counterexample["before"] != report.counterexample["after"]
    assert check_monotone(Overshooting([1, 3, 5, 7, 9])).passed


def test_stuck_next_fails_strict_mono():
    assert not check_strict_mono(Stuck([1, 2, 3])).passed
    assert check_strict_mono(ListStream([1, 2, 3])).passed


def test_bounded_fuel():
    n = 20
    assert check_bounded(sparse_linear(list(range(n)), [1] * n), fuel=2 * n + 2).passed
    assert check_bounded(range_(0, 10), fuel=22).passed
    assert not check_bounded(range_(0, 10), fuel=9).passed
    assert check_bounded(range_(0, 10)).passed
    assert not check_bounded(repeat(1)).passed


def test_report_serializes():
    report = check_lawful(Overshooting([1, 3, 5]))
    data = json.loads(json.dumps(report.to_dict()))
    assert data["law"] == "lawful" and data["passed"] is False and data["trace"]
    assert check_lawful(range_(0, 3)).to_dict()["counterexample"] is None
