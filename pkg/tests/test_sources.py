import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from indexed_streams import (ConstructionError, FinMap, count_steps, dense, fold, map_, mask,
                             mul, range_, sem_eval, singleton, sparse_gallop, sparse_linear,
                             take_left, take_right, zip_with)
from indexed_streams.sources import gallop


def collect(acc, k, v):
    acc.append((k, v))
    return acc


def test_range_emits_identity():
    assert sem_eval(range_(0, 3)) == FinMap({0: 0, 1: 1, 2: 2})


def test_empty_range():
    assert range_(5, 5).items() == []
    assert range_(7, 2).items() == []


def test_range_strict_seek_lands_one_past_target():
    assert range_(0, 100).seek(0, 42, True) == 43
    assert range_(0, 100).seek(0, 42, False) == 42
    assert range_(0, 100).seek(50, 42, True) == 50


def test_sparse_linear_readout():
    assert sparse_linear([1, 3], [2, 4]).items() == [(1, 2), (3, 4)]


def test_linear_seek_moves_one_step_per_call():
    s = sparse_linear([1, 2, 3, 5], [0, 0, 0, 0])
    q = s.start()
    visited = [s.index(q)]
    while s.index(q) < 3:
        q = s.seek(q, 3, False)
        visited.append(s.index(q))
    assert visited == [1, 2, 3]


@pytest.mark.parametrize("make", [sparse_linear, sparse_gallop])
def test_unsorted_keys_rejected(make):
    with pytest.raises(ConstructionError) as e:
        make([3, 1], [0, 0])
    assert e.value.kind == "UnsortedKeys"
    with pytest.raises(ConstructionError) as e:
        make([1, 1], [0, 0])
    assert e.value.kind == "UnsortedKeys"


def test_length_mismatch_rejected():
    with pytest.raises(ConstructionError) as e:
        sparse_linear([1, 2], [0])
    assert e.value.kind == "LengthMismatch"


key_lists = st.lists(st.integers(-50, 50), max_size=40, unique=True).map(sorted)


@settings(max_examples=200, deadline=None)
@given(key_lists, st.lists(st.tuples(st.integers(-60, 60), st.booleans()), max_size=8))
def test_gallop_and_linear_agree_after_any_seeks(keys, targets):
    vals = list(range(len(keys)))
    lin, gal = sparse_linear(keys, vals), sparse_gallop(keys, vals)
    ql, qg = lin.start(), gal.start()
    for k, strict in targets:
        if not lin.valid(ql):
            break
        # a linear seek only moves one step; drive it to the fixpoint
        while True:
            q2 = lin.seek(ql, k, strict)
            if q2 == ql:
                break
            ql = q2
            if not lin.valid(ql):
                break
        qg = gal.seek(qg, k, strict)
        assert ql == qg
    assert sem_eval(lin, ql) == sem_eval(gal, qg)


@settings(max_examples=300, deadline=None)
@given(key_lists, st.integers(0, 40), st.integers(-60, 60), st.booleans())
def test_gallop_finds_least_position_not_below(keys, c, key, strict):
    if not keys:
        return
    c = min(c, len(keys) - 1)
    expect = c
    while expect < len(keys) and (keys[expect] <= key if strict else keys[expect] < key):
        expect += 1
    assert gallop(keys, c, key, strict) == expect
    with count_steps():
        assert gallop(keys, c, key, strict) == expect


def test_gallop_to_last_key_is_logarithmic():
    keys = list(range(1024))
    with count_steps() as c:
        q = gallop(keys, 0, 1023, False)
    assert q == 1023
    assert c.comparisons <= 2 * math.log2(1024) + 2


def test_gallop_target_below_cursor_keeps_cursor():
    s = sparse_gallop([2, 4, 6, 8], [0] * 4)
    assert s.seek(2, 1, True) == 2


def test_dense_readout():
    assert sem_eval(dense([7])) == FinMap({0: 7})
    assert dense([]).items() == []


def test_dense_seek_is_one_step():
    s = dense(list(range(1000)))
    with count_steps() as c:
        q = s.seek(s.start(), 500, False)
    assert s.index(q) == 500 and c.seeks == 1


def test_singleton():
    assert sem_eval(singleton(3, 2)) == FinMap({3: 2})
    assert sem_eval(mul(singleton(3, 2), singleton(3, 5))) == FinMap({3: 10})
    assert sem_eval(mul(singleton(3, 2), singleton(4, 5))) == FinMap()


def test_mask_restricts_to_even_keys():
    s = sparse_linear([1, 2, 4], ["a", "b", "c"])
    out = zip_with(take_right, mask(lambda k: k % 2 == 0), s)
    assert out.items() == [(2, "b"), (4, "c")]
    assert sem_eval(out) == FinMap({2: "b", 4: "c"})


def test_mask_on_the_right():
    s = sparse_linear([1, 2, 4], [5, 6, 7])
    assert zip_with(take_left, s, mask(lambda k: k > 1)).items() == [(2, 6), (4, 7)]


def test_mask_always_true_is_identity():
    s = sparse_gallop([0, 3, 9], [1, 2, 3])
    assert sem_eval(zip_with(take_right, mask(lambda k: True), s)) == sem_eval(s)


def test_fused_mask_join_calls_predicate_once_per_candidate():
    calls = []

    def p(k):
        calls.append(k)
        return bool(k != 3)  # bool() keeps the tracer from inlining p

    s = sparse_linear([1, 3, 5], [1, 1, 1])
    assert fold(collect, zip_with(take_right, mask(p), s), []) == [(1, 1), (5, 1)]
    assert [k for k in calls if isinstance(k, int)] == [1, 3, 5]


def test_identity_matrix_as_nested_mask_join():
    n = 4
    eye = map_(lambda i, _: zip_with(take_left, mask(lambda j, i=i: j == i, lambda j: 1),
                                     range_(0, n)), range_(0, n))
    assert sem_eval(eye) == FinMap({i: FinMap({i: 1}) for i in range(n)})


def test_two_masks_cannot_be_joined():
    with pytest.raises(TypeError):
        zip_with(take_left, mask(bool), mask(bool))
