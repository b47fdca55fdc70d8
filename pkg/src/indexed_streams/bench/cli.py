"""``bench <id> [options]``: run one benchmark and print its results.

Exit status is 1 when the variants disagree on the checksum.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from .suite import BENCHMARKS

FIELDS = ["id", "variant", "mean_ns", "min_ns", "steps", "checksum", "config"]


def parse_args(argv=None):
    p = argparse.ArgumentParser(prog="bench", description="indexed stream benchmarks")
    p.add_argument("id", choices=sorted(BENCHMARKS))
    p.add_argument("--n", type=int, default=None, help="size for range/nest/v3")
    p.add_argument("--rows", type=int, default=2000, help="rows per relation (triangle)")
    p.add_argument("--keys", type=int, default=100_000, help="keys per tree (rb)")
    p.add_argument("--ways", type=int, default=2, choices=(2, 3), help="trees to intersect (rb)")
    p.add_argument("--skew", type=float, default=0.5, help="hot-key fraction (triangle)")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--warmup", type=int, default=1)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None, help="write to FILE instead of stdout")
    return p.parse_args(argv)


DEFAULT_N = {"range": 10_000_000, "nest": 3000, "v3": 100_000}


def run(args) -> list:
    kw = {"seed": args.seed, "warmup": args.warmup, "rows": args.rows, "keys": args.keys,
          "ways": args.ways, "skew": args.skew}
    if args.reps is not None:
        kw["reps"] = args.reps
    fn = BENCHMARKS[args.id]
    if args.id in DEFAULT_N:
        return fn(args.n if args.n is not None else DEFAULT_N[args.id], **kw)
    if args.id == "triangle":
        kw.pop("rows")
        return fn(args.rows, **kw)
    kw.pop("keys")
    return fn(args.keys, **kw)


def render(results, fmt: str) -> str:
    rows = [r.to_dict() for r in results]
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=FIELDS)
    w.writeheader()
    for r in rows:
        w.writerow({k: json.dumps(v) if isinstance(v, (dict, type(None))) else v
                    for k, v in r.items()})
    return buf.getvalue()


def main(argv=None) -> int:
    args = parse_args(argv)
    results = run(args)
    text = render(results, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    sums = {r.checksum for r in results}
    if len(sums) > 1:
        print(f"checksum mismatch: {sorted(sums)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
