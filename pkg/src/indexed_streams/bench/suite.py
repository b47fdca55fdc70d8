"""Benchmark runners: build inputs, time every variant, cross-check."""

from __future__ import annotations

import dataclasses
import time
import zlib
from typing import Any, Callable

import numpy as np

from ..core import count_steps
from . import data
from . import kernels as K


@dataclasses.dataclass
class BenchResult:
    id: str
    variant: str
    mean_ns: float
    min_ns: int
    steps: dict | None
    checksum: int
    config: dict

    def to_dict(self):
        return dataclasses.asdict(self)


def checksum(value) -> int:
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (list, tuple)):
        return zlib.crc32(",".join(map(str, value)).encode())
    raise TypeError(f"no checksum for {type(value).__name__}")


def measure(variants: dict[str, Callable[[], Any]], reps: int, warmup: int):
    """Time each variant ``reps`` times. Runs are interleaved round-robin so
    that drift in machine speed affects every variant alike."""
    for _ in range(warmup):
        for fn in variants.values():
            fn()
    times: dict[str, list[int]] = {name: [] for name in variants}
    results: dict[str, Any] = {}
    clock = time.perf_counter_ns
    for _ in range(max(1, reps)):
        for name, fn in variants.items():
            t0 = clock()
            out = fn()
            times[name].append(clock() - t0)
            results[name] = out
    return {name: (sum(ts) / len(ts), min(ts), results[name]) for name, ts in times.items()}


def _steps(make: Callable[[], Callable[[], Any]]) -> dict:
    """Step counts of one run. ``make`` builds the runner inside the
    counting context, since compiled loops only count if built there."""
    with count_steps() as c:
        make()()
    return c.as_dict()


def _results(bench_id, timed, steps, config) -> list[BenchResult]:
    return [BenchResult(bench_id, name, mean, mn, steps.get(name), checksum(out), config)
            for name, (mean, mn, out) in timed.items()]


def bench_range(n: int, reps: int = 100, warmup: int = 2, **_) -> list[BenchResult]:
    stream = K.compile_range(n)
    variants = {"range": stream, "range_b": lambda: K.range_baseline(n)}
    timed = measure(variants, reps, warmup)
    steps = {"range": _steps(lambda: K.compile_range(n))}
    return _results("range", timed, steps, {"n": n, "reps": reps, "warmup": warmup})


def bench_nest(n: int, reps: int = 100, warmup: int = 2, **_) -> list[BenchResult]:
    stream = K.compile_nest(n)
    variants = {"nest": stream, "nest_b": lambda: K.nest_baseline(n),
                "nest_b2": lambda: K.nest_baseline_2(n)}
    timed = measure(variants, reps, warmup)
    steps = {"nest": _steps(lambda: K.compile_nest(n))}
    return _results("nest", timed, steps, {"n": n, "reps": reps, "warmup": warmup})


def bench_v3(n: int, seed: int = 1, reps: int = 100, warmup: int = 2, **_) -> list[BenchResult]:
    vecs = data.v3_vectors(n, seed)
    args = [x for kv in vecs for x in kv]
    variants = {"v3": K.compile_v3(vecs, "linear"),
                "v3_gallop": K.compile_v3(vecs, "gallop"),
                "v3_b": lambda: K.v3_baseline(*args)}
    timed = measure(variants, reps, warmup)
    steps = {"v3": _steps(lambda: K.compile_v3(vecs, "linear")),
             "v3_gallop": _steps(lambda: K.compile_v3(vecs, "gallop"))}
    return _results("v3", timed, steps, {"n": n, "seed": seed, "reps": reps, "warmup": warmup})


def bench_triangle(rows: int, seed: int = 1, reps: int = 100, warmup: int = 1,
                   skew: float = 0.5, **_) -> list[BenchResult]:
    pairs = data.triangle_relations(rows, seed, skew=skew)
    R, S, T = (data.csr(pairs[x]) for x in "RST")
    fused = K.compile_triangle_fused(R, S, T)
    variants = {"tri.naive": lambda: K.triangle_naive(R, S, T),
                "tri.unfused": lambda: K.triangle_unfused(R, S, T),
                "tri.fused": fused}
    timed = measure(variants, reps, warmup)
    steps = {"tri.unfused": _steps(lambda: lambda: K.triangle_unfused(R, S, T)),
             "tri.fused": _steps(lambda: K.compile_triangle_fused(R, S, T))}
    config = {"rows": rows, "seed": seed, "skew": skew, "reps": reps, "warmup": warmup}
    return _results("triangle", timed, steps, config)


def rb_trees(keys: int, ways: int, seed: int):
    rng = data.SplitMix64(seed)
    universe = 2 * keys
    return [K.build_tree(rng.sample(universe, keys)) for _ in range(ways)]


def bench_rb(keys: int, ways: int = 2, seed: int = 1, reps: int = 100, warmup: int = 1,
             **_) -> list[BenchResult]:
    trees = rb_trees(keys, ways, seed)
    variants = {f"rb.{ways}": K.compile_intersect(trees),
                f"rb.{ways}_b": lambda: K.intersect_lookup(trees)}
    timed = measure(variants, reps, warmup)
    steps = {f"rb.{ways}": _steps(lambda: K.compile_intersect(trees))}
    config = {"keys": keys, "ways": ways, "seed": seed, "reps": reps, "warmup": warmup}
    return _results("rb", timed, steps, config)


BENCHMARKS = {"range": bench_range, "nest": bench_nest, "v3": bench_v3,
              "triangle": bench_triangle, "rb": bench_rb}
