"""Timing comparison of the compiled kernels against the pure-Python
fallback.

Run as: python3 benchmarks/bench_kernels.py [--samples N]

Both lanes produce identical values (the test suite checks that); this
script only measures throughput, so a missing compiled extension is
reported rather than treated as an error.
"""

import argparse
import time

from taskcurve._kernels import _fallback

try:
    from taskcurve._kernels import _core
except ImportError:
    _core = None


def _best_of(repeats, func, *args):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        func(*args)
        best = min(best, time.perf_counter() - start)
    return best


def _bench(name, units, func_name, *args, repeats=3):
    fallback_s = _best_of(repeats, getattr(_fallback, func_name), *args)
    row = f"{name:<28} fallback {units / fallback_s:>12.3e}/s"
    if _core is not None:
        core_s = _best_of(repeats, getattr(_core, func_name), *args)
        row += f"   compiled {units / core_s:>12.3e}/s   speedup {fallback_s / core_s:>6.1f}x"
    print(row)


def _bench_scalar(name, func_name, values, repeats=3):
    def loop_fallback():
        func = getattr(_fallback, func_name)
        for v in values:
            func(v)

    def loop_core():
        func = getattr(_core, func_name)
        for v in values:
            func(v)

    fallback_s = _best_of(repeats, loop_fallback)
    row = f"{name:<28} fallback {len(values) / fallback_s:>12.3e}/s"
    if _core is not None:
        core_s = _best_of(repeats, loop_core)
        row += f"   compiled {len(values) / core_s:>12.3e}/s   speedup {fallback_s / core_s:>6.1f}x"
    print(row)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=2_000_000)
    args = parser.parse_args()
    n = args.samples

    if _core is None:
        print("compiled extension not built; timing the fallback only")
    print()

    _bench("uniform draws", n, "uniforms", 12345, 0, n)
    _bench("gaussian draws", n, "gaussians", 12345, 0, n)
    _bench(
        "threshold counts (q=8)",
        n // 4,
        "count_below_threshold",
        12345,
        n // 4,
        8,
        0.25,
        1.0,
    )
    _bench("binomial counting", n // 50, "binomial_count", 12345, 0, n // 50, 0.3)

    xs = [0.5 + 0.37 * i for i in range(20_000)]
    _bench_scalar("ln_gamma evaluations", "ln_gamma", xs)

    pairs = [((i % 40) * 0.25 + 0.25, (i % 60) * 0.2 + 0.1) for i in range(20_000)]

    def run_fallback():
        for s, x in pairs:
            _fallback.reg_lower_gamma(s, x, 1e-12, 500)

    start = time.perf_counter()
    run_fallback()
    fallback_s = time.perf_counter() - start
    row = f"{'reg_lower_gamma evaluations':<28} fallback {len(pairs) / fallback_s:>12.3e}/s"
    if _core is not None:

        def run_core():
            for s, x in pairs:
                _core.reg_lower_gamma(s, x, 1e-12, 500)

        start = time.perf_counter()
        run_core()
        core_s = time.perf_counter() - start
        row += f"   compiled {len(pairs) / core_s:>12.3e}/s   speedup {fallback_s / core_s:>6.1f}x"
    print(row)


if __name__ == "__main__":
    main()
