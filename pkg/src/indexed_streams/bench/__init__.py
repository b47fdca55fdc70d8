"""Benchmarks: seeded data, stream variants and handwritten baselines."""
