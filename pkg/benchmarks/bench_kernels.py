"""Benchmark the compiled decision kernels against the pure-Python fallback.

Two views:
  * micro: per-call timings of each kernel on realistic candidate-set
    shapes (both backends loaded side by side in one process);
  * end-to-end: wall time of a Monte Carlo run over the bundled fixture,
    one subprocess per backend (selection happens at import).

Run: python benchmarks/bench_kernels.py [--episodes N]
"""

import argparse
import os
import subprocess
import sys
import time
from array import array
from random import Random

from attacksim._kernels import _py

try:
    from attacksim._kernels import _c
except ImportError:
    _c = None


def _workload(m, n, seed=7):
    rng = Random(seed)
    theta = array("d", (rng.random() for _ in range(n)))
    gammas = array("d", (rng.random() for _ in range(m * n)))
    rows = array("l", range(m))
    inv_beta_sq = array("d", (1.0 for _ in range(n)))
    unordered = array("B", (i % 3 == 0 for i in range(n)))
    return theta, gammas, rows, inv_beta_sq, unordered


def _time_per_call(fn, repeat):
    start = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - start) / repeat


def bench_micro():
    shapes = [(4, 6), (16, 6), (64, 6), (256, 12)]
    print(f"{'kernel':<28} {'shape':>9} {'python':>12} {'compiled':>12} {'speedup':>8}")
    for m, n in shapes:
        theta, gammas, rows, ibs, unordered = _workload(m, n)
        d = array("d", bytes(8 * m))
        s = array("d", bytes(8 * m))
        p = array("d", bytes(8 * m))
        repeat = max(200, 20_000 // m)
        cases = [
            ("profile_distances",
             lambda impl: impl.profile_distances(theta, gammas, rows, ibs,
                                                 unordered, d)),
            ("scores_from_distances",
             lambda impl: impl.scores_from_distances(d, s)),
            ("probabilities_from_scores",
             lambda impl: impl.probabilities_from_scores(s, p)),
            ("weighted_index",
             lambda impl: impl.weighted_index(p, 0.6180339887)),
        ]
        for name, call in cases:
            t_py = _time_per_call(lambda: call(_py), repeat)
            if _c is None:
                print(f"{name:<28} {f'{m}x{n}':>9} {t_py * 1e6:>10.2f}us "
                      f"{'n/a':>12} {'n/a':>8}")
                continue
            t_c = _time_per_call(lambda: call(_c), repeat)
            print(f"{name:<28} {f'{m}x{n}':>9} {t_py * 1e6:>10.2f}us "
                  f"{t_c * 1e6:>10.2f}us {t_py / t_c:>7.1f}x")


def _verify_parity():
    if _c is None:
        return
    theta, gammas, rows, ibs, unordered = _workload(32, 8, seed=123)
    out_py = array("d", bytes(8 * 32))
    out_c = array("d", bytes(8 * 32))
    _py.profile_distances(theta, gammas, rows, ibs, unordered, out_py)
    _c.profile_distances(theta, gammas, rows, ibs, unordered, out_c)
    assert list(out_py) == list(out_c), "backend outputs diverge"
    print("parity: compiled and python kernels agree bit-for-bit")


def bench_end_to_end(episodes):
    snippet = (
        "import time\n"
        "from random import Random\n"
        "from attacksim import KERNEL_BACKEND\n"
        "from attacksim.data import fixture_path\n"
        "from attacksim.model import load_system\n"
        "from attacksim.profiles import load_profiles\n"
        "from attacksim.actions import load_action_db\n"
        "from attacksim.harness import SimConfig, run_monte_carlo\n"
        "profiles = load_profiles(fixture_path('cstr_profiles.json'))\n"
        "system = load_system(fixture_path('cstr_system.json'))\n"
        "db = load_action_db(fixture_path('cstr_actions.json'), profiles.schema)\n"
        f"config = SimConfig(episode_count={episodes}, seed=42)\n"
        "start = time.perf_counter()\n"
        "report, _ = run_monte_carlo(system, db, profiles, config)\n"
        "elapsed = time.perf_counter() - start\n"
        "print(f'{KERNEL_BACKEND} {elapsed:.3f} {report.success_rate:.6f}')\n"
    )
    results = {}
    for backend, env_val in (("compiled", "0"), ("python", "1")):
        if backend == "compiled" and _c is None:
            continue
        env = dict(os.environ, ATTACKSIM_PURE=env_val)
        out = subprocess.run([sys.executable, "-c", snippet], env=env,
                             capture_output=True, text=True, check=True)
        name, elapsed, rate = out.stdout.split()
        assert name == backend, f"expected {backend}, selected {name}"
        results[backend] = (float(elapsed), rate)
    print(f"\nend-to-end: {episodes} episodes of the bundled fixture")
    for backend, (elapsed, rate) in results.items():
        print(f"  {backend:<9} {elapsed:>8.3f}s  success_rate={rate}")
    if len(results) == 2:
        ratio = results["python"][0] / results["compiled"][0]
        print(f"  speedup   {ratio:>7.2f}x")
        assert results["python"][1] == results["compiled"][1], \
            "backends must produce identical results"
        print("  results identical across backends")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--episodes", type=int, default=20_000)
    args = parser.parse_args()
    if _c is None:
        print("compiled kernels unavailable; timing the fallback only\n")
    _verify_parity()
    print()
    bench_micro()
    bench_end_to_end(args.episodes)


if __name__ == "__main__":
    main()
