#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

The two backends are bit-for-bit identical (tests/test_kernels.py); this
script measures the speed gap on the hot paths:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from chaosforge._kernels import fallback

try:
    from chaosforge._kernels import _fastcore as compiled
except ImportError:
    compiled = None


def timeit(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_row(label, fallback_fn, compiled_fn, work_items):
    t_py = timeit(fallback_fn)
    if compiled_fn is None:
        print(f"{label:<34} {t_py:>10.4f}s {'-':>10} {'-':>9} "
              f"({work_items / t_py:,.0f} items/s python)")
        return
    t_c = timeit(compiled_fn)
    print(f"{label:<34} {t_py:>10.4f}s {t_c:>9.4f}s {t_py / t_c:>8.1f}x "
          f"({work_items / t_c:,.0f} items/s compiled)")


def main():
    rng = np.random.default_rng(0)
    # sigmoid hidden layer keeps the random feedback loop bounded, so the
    # benchmark measures full runs rather than early guard exits
    w1 = rng.normal(scale=0.6, size=(8, 3)).astype(np.float32)
    b1 = rng.normal(scale=0.1, size=8).astype(np.float32)
    w2 = rng.normal(scale=0.3, size=(3, 8)).astype(np.float32)
    b2 = rng.normal(scale=0.1, size=3).astype(np.float32)
    seed = rng.uniform(0.2, 0.8, 3).astype(np.float32)
    x0 = np.array([1.0, 1.0, 1.0])
    lo, hi = np.float32(-10.0), np.float32(11.0)

    print(f"{'kernel':<34} {'python':>11} {'compiled':>10} {'speedup':>9}")

    osc_iters = 20_000
    _, fail = fallback.oscillator_run(w1, b1, w2, b2, seed, 100, 2, lo, hi)
    assert fail == -1, "benchmark loop diverged; adjust weights"
    bench_row(
        f"oscillator_run 3-8-3 x{osc_iters}",
        lambda: fallback.oscillator_run(w1, b1, w2, b2, seed, osc_iters, 2, lo, hi),
        (lambda: compiled.oscillator_run(w1, b1, w2, b2, seed, osc_iters, 2, lo, hi))
        if compiled else None,
        osc_iters,
    )

    rk_steps = 100_000
    bench_row(
        f"rk4_chen x{rk_steps}",
        lambda: fallback.rk4_chen(x0, 35.0, 3.0, 28.0, 0.02, 1, rk_steps),
        (lambda: compiled.rk4_chen(x0, 35.0, 3.0, 28.0, 0.02, 1, rk_steps))
        if compiled else None,
        rk_steps,
    )

    fwd_calls = 5_000
    xs = rng.uniform(0, 1, size=(fwd_calls, 3)).astype(np.float32)

    def fwd_loop(impl):
        for k in range(fwd_calls):
            impl.ann_forward(w1, b1, w2, b2, xs[k], 1)

    bench_row(
        f"ann_forward tanh x{fwd_calls}",
        lambda: fwd_loop(fallback),
        (lambda: fwd_loop(compiled)) if compiled else None,
        fwd_calls,
    )

    if compiled is None:
        print("\ncompiled extension not available; showing fallback only")


if __name__ == "__main__":
    main()
