import random

import pytest

from indexed_streams import (DenseVecBuilder, FinMap, MapSink, OrderedTreeMap, SparseVecBuilder,
                             check_all, compiled, contract, dense, eval_aggregate, eval_into, eval_nested,
                             map_, map_of_maps, memo, mul, range_, sem_eval, sparse_gallop,
                             sparse_linear, to_stream, tree_stream, unordered)
from indexed_streams.recipes import dense_matrix, identity, matmul, sparse_matrix, to_rows
from indexed_streams.semantics import finmap_of


def test_eval_nested_into_empty_map():
    out = eval_nested(sparse_linear([1, 3], [2, 4]), MapSink())
    assert out.data == {1: 2, 3: 4}


def test_eval_nested_adds_to_existing_entries():
    sink = MapSink(0, {1: 5, 8: 1})
    eval_nested(sparse_linear([1, 3], [2, 4]), sink)
    assert sink.data == {1: 7, 3: 4, 8: 1}


def test_matmul_by_identity():
    a = [[1, 2], [3, 4]]
    out = eval_into(matmul(dense_matrix(a), identity(2)), map_of_maps())
    assert to_rows(out, 2, 2) == a


def test_matmul_two_by_two():
    out = eval_into(matmul(dense_matrix([[1, 2], [3, 4]]), dense_matrix([[5, 6], [7, 8]])),
                    map_of_maps())
    assert to_rows(out, 2, 2) == [[19, 22], [43, 50]]


def test_matmul_sparse_into_dense_rows():
    a = [[0, 2, 0], [0, 0, 0], [1, 0, 3]]
    b = [[1, 0], [0, 4], [5, 0]]
    out = eval_into(matmul(sparse_matrix(a), sparse_matrix(b)),
                    DenseVecBuilder(lambda: DenseVecBuilder(0)))
    assert to_rows(out, 3, 2) == [[0, 8], [0, 0], [16, 0]]


def test_eval_aggregate():
    assert eval_aggregate(sparse_linear([], []), 7) == 7
    assert eval_aggregate(sparse_linear([2, 9], [3, 4]), 0) == 7


def test_contraction_of_inner_level_is_a_row_of_the_product():
    a, b = [[1, 2], [3, 4]], [[5, 6], [7, 8]]
    row0 = contract(mul(map_(lambda j, x: x, dense(a[0])), dense([1, 1])))
    assert eval_into(row0, 0) == 3
    c = eval_into(matmul(dense_matrix(a), dense_matrix(b)), map_of_maps())
    assert sem_eval(contract(to_stream(c.get(1)))) == 43 + 50


def test_plain_value_into_keyed_sink_is_rejected():
    with pytest.raises(TypeError):
        eval_into(3, MapSink())


def test_memo_of_ordered_stream_is_identity():
    s = sparse_gallop([1, 4, 9], [2, 3, 4])
    assert sem_eval(memo(s)) == sem_eval(s)


def test_memo_adds_repeated_keys():
    assert sem_eval(memo(unordered([3, 3], [1, 2]))) == FinMap({3: 3})


def test_memo_restores_lawfulness():
    u = unordered([9, 2, 5, 2, 7], [1, 1, 1, 1, 1])
    t = sparse_linear([2, 5, 6, 9], [10, 10, 10, 10])
    out = mul(memo(u), t)
    for report in check_all(out).values():
        assert report.passed, report.describe()
    assert sem_eval(out) == FinMap({2: 20, 5: 10, 9: 10})


def test_round_trips():
    assert sem_eval(to_stream(SparseVecBuilder())) == FinMap()
    sv = SparseVecBuilder()
    sv.put(1, 2)
    assert sem_eval(to_stream(sv)) == FinMap({1: 2})
    rng = random.Random(5)
    t = OrderedTreeMap()
    for k in rng.sample(range(10_000), 256):
        t.insert(k, rng.randint(1, 9))
    assert sem_eval(to_stream(t)) == FinMap(t.items())
    assert [k for k, _ in to_stream(t).items()] == sorted(k for k, _ in t.items())


def nested_example():
    outer = sparse_linear([0, 2, 5], [1, 2, 3])
    return map_(lambda i, v: sparse_linear([1, 3, 4], [v, 2 * v, 3 * v]), outer)


@pytest.mark.parametrize("make_sink", [
    map_of_maps,
    lambda: SparseVecBuilder(lambda: SparseVecBuilder(0)),
    lambda: DenseVecBuilder(lambda: DenseVecBuilder(0)),
    lambda: OrderedTreeMap(lambda: DenseVecBuilder(0)),
    lambda: OrderedTreeMap(lambda: OrderedTreeMap(0)),
])
def test_same_expression_into_any_sink(make_sink):
    out = eval_into(nested_example(), make_sink())
    assert finmap_of(out) == sem_eval(nested_example())


def test_update_touches_one_key():
    for sink in (MapSink(0), SparseVecBuilder(0), DenseVecBuilder(0), OrderedTreeMap(0)):
        sink.update(2, lambda v: v + 5)
        sink.update(0, lambda v: v + 1)
        sink.update(2, lambda v: v * 3)
        assert dict(sink.items()).get(2) == 15
        assert dict(sink.items()).get(0) == 1
        assert sink.zero() == 0


def test_destination_passing_allocates_one_inner_sink_per_outer_key():
    made = []

    def inner():
        made.append(1)
        return MapSink(0)

    run = compiled(nested_example(), MapSink(inner))  # probes the inner shape once
    made.clear()
    run(MapSink(inner))
    assert len(made) == 3


def test_tree_stream_of_evaluated_tree():
    t = eval_into(range_(0, 4), OrderedTreeMap(0))
    assert tree_stream(t).items() == [(0, 0), (1, 1), (2, 2), (3, 3)]


def test_dense_builder_rejects_negative_keys():
    b = DenseVecBuilder(0, size=3)
    with pytest.raises(IndexError):
        eval_into(sparse_linear([-1, 2], [5, 5]), b)
    assert b.values == [0, 0, 0]
