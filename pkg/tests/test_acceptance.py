"""Acceptance criteria, one test each. Every test prints a single
``criterion N: PASS|FAIL ...`` line. Run directly to print all nine lines
without pytest."""

import math
import random
import sys
import time

import pytest

from indexed_streams import (DenseVecBuilder, FinMap, OrderedTreeMap, SparseVecBuilder,
                             check_all, count_steps, dense, eval_into, eval_nested, finmap_of,
                             fold, map_of_maps, mul, mul_spec, sem_eval, slice_, sparse_gallop,
                             sparse_linear, successor, tree_seek)
from indexed_streams.bench import data, suite
from indexed_streams.bench import kernels as K
from indexed_streams.recipes import dense_matrix, matmul, sparse_matrix, to_rows
from indexed_streams.rbtree import seek_node
from streamgen import CONSTRUCTS, construct

LAW_CASES = 200
TRIANGLE_REPS = 15
RB_REPS = 10
OVERHEAD_REPS = 100


def verdict(n, ok, detail):
    return f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"


@pytest.fixture
def say(capsys):
    def emit(line):
        with capsys.disabled():
            print("\n" + line)
        assert line.split()[2] == "PASS", line
    return emit


# 1 ---------------------------------------------------------------------------


def criterion_1():
    t0 = time.perf_counter()
    failures, exhaustive, total = [], 0, 0
    for name in CONSTRUCTS:
        for case in range(LAW_CASES):
            s = construct(name, random.Random(f"{name}:{case}"), n=12 if case % 2 == 0 else 64)
            reports = check_all(s, seed=case)
            total += 1
            exhaustive += reports["lawful"].exhaustive
            failures += [(name, case, law) for law, r in reports.items() if not r.passed]
    secs = time.perf_counter() - t0
    ok = not failures and secs < 60
    return ok, verdict(1, ok, f"{total} streams over {len(CONSTRUCTS)} constructs, "
                              f"{exhaustive} exhaustive, {len(failures)} failures "
                              f"{failures[:3]}, {secs:.1f}s")


def test_criterion_1_law_suite(say):
    say(criterion_1()[1])


# 2 ---------------------------------------------------------------------------


def criterion_2():
    rng = random.Random(2)
    bad = 0
    for _ in range(500):
        vecs = []
        for make in (sparse_gallop, sparse_linear):
            keys = sorted(rng.sample(range(256), rng.randint(0, 64)))
            vecs.append(make(keys, [rng.randint(-9, 9) for _ in keys]))
        a, b = vecs
        da, db = dict(zip(a.keys, a.values)), dict(zip(b.keys, b.values))
        oracle = FinMap({k: da[k] * db[k] for k in da.keys() & db.keys()})
        got = sem_eval(mul(a, b))
        bad += not (got == oracle == mul_spec(sem_eval(a), sem_eval(b)))
    return bad == 0, verdict(2, bad == 0, f"500 pairs, {bad} mismatches")


def test_criterion_2_mul_spec(say):
    say(criterion_2()[1])


# 3 ---------------------------------------------------------------------------

SINKS = {
    "sparse-vec": lambda: SparseVecBuilder(0),
    "dense-vec": lambda: DenseVecBuilder(0),
    "tree-map": lambda: OrderedTreeMap(0),
    "map-of-maps": map_of_maps,
}


def draw(rng, names, naturals):
    """A random stream; dense sinks only take non-negative keys."""
    while True:
        s = construct(rng.choice(names), rng, n=rng.randint(0, 20))
        if not naturals or all(k >= 0 for k in sem_eval(s).support()):
            return s


def criterion_3():
    bad = {}
    for sink_name, make in SINKS.items():
        nested = sink_name == "map-of-maps"
        names = ["nested"] if nested else [c for c in CONSTRUCTS if c != "nested"]
        bad[sink_name] = 0
        for case in range(200):
            rng = random.Random(f"commute:{sink_name}:{case}")
            pick = lambda: draw(rng, names, sink_name == "dense-vec")
            sink = make()
            eval_nested(pick(), sink)  # arbitrary prior contents
            before = finmap_of(sink)
            s = pick()
            after = finmap_of(eval_nested(s, sink))
            bad[sink_name] += after != before + sem_eval(s)
    ok = not any(bad.values())
    return ok, verdict(3, ok, f"200 streams per sink, mismatches {bad}")


def test_criterion_3_commutation(say):
    say(criterion_3()[1])


# 4 ---------------------------------------------------------------------------


def triple_loop(a, b):
    n, k, m = len(a), len(b), len(b[0])
    out = [[0] * m for _ in range(n)]
    for i in range(n):
        for j in range(m):
            for t in range(k):
                out[i][j] += a[i][t] * b[t][j]
    return out


def random_matrix(rng, rows, cols, density):
    return [[rng.randint(-9, 9) if rng.random() < density else 0 for _ in range(cols)]
            for _ in range(rows)]


def criterion_4():
    rng = random.Random(4)
    shapes = {"map-of-maps": map_of_maps,
              "dense-rows": lambda: DenseVecBuilder(lambda: DenseVecBuilder(0))}
    cases = bad = 0
    for trial in range(40):
        n, k, m = (32, 32, 32) if trial < 2 else (rng.randint(1, 32) for _ in range(3))
        for density, build in ((1.0, dense_matrix), (0.1, sparse_matrix)):
            a, b = random_matrix(rng, n, k, density), random_matrix(rng, k, m, density)
            expect = triple_loop(a, b)
            for make in shapes.values():
                cases += 1
                out = eval_into(matmul(build(a), build(b)), make())
                bad += to_rows(out, n, m) != expect
    return bad == 0, verdict(4, bad == 0, f"{cases} products up to 32x32, dense and 10% sparse, "
                                          f"2 destination shapes, {bad} mismatches")


def test_criterion_4_matmul(say):
    say(criterion_4()[1])


# 5 ---------------------------------------------------------------------------


def criterion_5():
    t0 = time.perf_counter()
    small_bad = 0
    for rows in (20, 100, 200):
        for seed in (1, 2, 3):
            pairs = data.triangle_relations(rows, seed)
            R, S, T = (data.csr(pairs[x]) for x in "RST")
            got = {K.triangle_naive(R, S, T), K.triangle_unfused(R, S, T),
                   K.compile_triangle_fused(R, S, T)()}
            small_bad += got != {K.triangle_oracle(pairs)}
    res = {r.variant: r for r in suite.bench_triangle(2000, reps=TRIANGLE_REPS)}
    agree = len({r.checksum for r in res.values()}) == 1
    naive, unfused, fused = (res[v].min_ns for v in ("tri.naive", "tri.unfused", "tri.fused"))
    r1, r2 = naive / unfused, unfused / fused
    secs = time.perf_counter() - t0
    ok = small_bad == 0 and agree and r1 >= 1.3 and r2 >= 1.3 and secs < 120
    return ok, verdict(5, ok, f"count {res['tri.fused'].checksum} agree={agree}, "
                              f"oracle mismatches {small_bad}, naive/unfused {r1:.2f}x, "
                              f"unfused/fused {r2:.2f}x, {secs:.1f}s")


def test_criterion_5_triangle(say):
    say(criterion_5()[1])


# 6 ---------------------------------------------------------------------------


def criterion_6():
    trees = suite.rb_trees(100_000, 2, 1)
    oracle = sorted(set(k for k, _ in trees[0].items()) & set(k for k, _ in trees[1].items()))
    same = K.compile_intersect(trees)() == oracle == K.intersect_lookup(trees)
    res = {r.variant: r for r in suite.bench_rb(100_000, ways=2, reps=RB_REPS)}
    ratio = res["rb.2"].min_ns / res["rb.2_b"].min_ns
    ok = same and ratio <= 1.0
    return ok, verdict(6, ok, f"{len(oracle)} common keys, sets match={same}, "
                              f"stream/lookup {ratio:.2f}")


def test_criterion_6_rb_intersection(say):
    say(criterion_6()[1])


# 7 ---------------------------------------------------------------------------

OVERHEAD = [("range", suite.bench_range, 10_000_000, "range"),
            ("nest", suite.bench_nest, 3000, "nest"),
            ("v3", suite.bench_v3, 100_000, "v3")]


def criterion_7():
    parts, ok, all_same = [], True, True
    for name, bench, n, stream in OVERHEAD:
        res = {r.variant: r for r in bench(n, reps=OVERHEAD_REPS)}
        best = min(r.min_ns for v, r in res.items() if v.startswith(name + "_b"))
        ratio = res[stream].min_ns / best
        same = len({r.checksum for r in res.values()}) == 1
        ok &= ratio <= 1.5 and same
        all_same &= same
        parts.append(f"{name} {ratio:.2f}x")
        if name == "v3":
            parts.append(f"(gallop variant {res['v3_gallop'].min_ns / best:.2f}x, informational)")
    return ok, verdict(7, ok, ", ".join(parts) + f", checksums equal={all_same}")


def test_criterion_7_fusion_overhead(say):
    say(criterion_7()[1])


# 8 ---------------------------------------------------------------------------


def count(acc, k, v):
    return acc + 1


def criterion_8():
    rng = random.Random(8)
    m, n = 100, 100_000
    a = sorted(rng.sample(range(4 * n), m))
    b = sorted(rng.sample(range(4 * n), n))
    with count_steps() as c:
        fold(count, mul(sparse_gallop(a, [1] * m), sparse_gallop(b, [1] * n)), 0)
    bound = m * (math.log2(n) + 2)
    steps = {}
    for length in (1000, 1_000_000):
        arr = dense([1] * length)
        with count_steps() as d:
            fold(count, slice_(arr, 400, 464), 0)
        steps[length] = d.seeks + d.comparisons + d.emissions
    ok = c.seeks <= bound and steps[1000] == steps[1_000_000]
    return ok, verdict(8, ok, f"gallop seeks {c.seeks} <= {bound:.0f} "
                              f"(comparisons {c.comparisons}); slice steps {steps}")


def test_criterion_8_counters(say):
    say(criterion_8()[1])


# 9 ---------------------------------------------------------------------------


def chain(node):
    out = []
    while node is not None:
        out.append(node)
        node = successor(node)
    return out


def seek_cases(t, start, targets):
    """Compare both seek entry points with walking successors from ``start``."""
    bad = 0
    walk = chain(start)
    for target in targets:
        for strict in (False, True):
            def below(k):
                return k <= target if strict else k < target
            expect = next((x for x in walk if not below(x.key)), None)
            bad += tree_seek(start, below) is not expect
            bad += seek_node(start, target, strict) is not expect
    return bad


def criterion_9():
    rng = random.Random(9)
    bad = probes = 0
    for case in range(1000):
        keys = rng.sample(range(200), 1 + case % 64)
        t = OrderedTreeMap()
        for k in keys:
            t.insert(k, 1)
        ordered = sorted(keys)
        # every start node, every distinct target class (each key, the gaps, both ends)
        targets = sorted({ordered[0] - 1, ordered[-1] + 1} | set(ordered)
                         | {k + 1 for k in ordered})
        for start in chain(t.first()):
            bad += seek_cases(t, start, [x for x in targets if x >= start.key - 1])
            probes += 1
    big_probes = 0
    for case in range(20):
        keys = rng.sample(range(20_000), rng.randint(1, 4096))
        t = OrderedTreeMap()
        for k in keys:
            t.insert(k, 1)
        nodes = chain(t.first())
        for _ in range(100):
            bad += seek_cases(t, rng.choice(nodes), [rng.randint(-5, 20_005)])
            big_probes += 1
    ok = bad == 0
    return ok, verdict(9, ok, f"1000 trees <= 64 keys from {probes} start nodes, "
                              f"{big_probes} probes on trees <= 4096, {bad} mismatches")


def test_criterion_9_tree_seek(say):
    say(criterion_9()[1])


if __name__ == "__main__":
    results = [globals()[f"criterion_{i}"]() for i in range(1, 10)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
