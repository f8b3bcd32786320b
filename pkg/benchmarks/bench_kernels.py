"""Compiled vs pure-numpy classical kernels, plus the quantum step cost.

    python benchmarks/bench_kernels.py [--points N] [--steps K] [--repeat R]

Prints best-of-R wall times. The classical section also checks that both
backends return identical arrays.
"""
import argparse
import time

import numpy as np

from kicktops import kernels
from kicktops.classical import ClassicalDensityParams, SpinMagnitudes, sample_ensemble
from kicktops.floquet import FloquetParams, apply_step, build_plan
from kicktops.states import coherent_state, product_state

FP = FloquetParams(5.0, 2.835)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_classical(n_points, n_steps, repeat):
    mags = SpinMagnitudes.from_spins(140, 154)
    p = ClassicalDensityParams.for_magnitude(mags.S, 0.35, 0.7)
    e = sample_ensemble(p, p, n_points, 1, mags)
    ks, kl = mags.kick_factors(FP)
    print(f"classical map: {n_points} points x {n_steps} steps, threads={kernels.num_threads()}")
    print(f"{'backend':>8} {'seconds':>10} {'ns/point-step':>14}")
    results = {}
    for name, mod in sorted(kernels.BACKENDS.items()):
        def run():
            s, l = e.s.copy(), e.l.copy()
            mod.map_points(s, l, ks, kl, FP.a, n_steps, kernels.num_threads())
            results[name] = (s, l)
        t = best_of(run, repeat)
        print(f"{name:>8} {t:10.4f} {1e9 * t / (n_points * n_steps):14.2f}")
    if len(results) == 2:
        (s1, l1), (s2, l2) = results.values()
        diff = max(np.max(np.abs(s1 - s2)), np.max(np.abs(l1 - l2)))
        print(f"max |cython - python| = {diff:.2e}")


def bench_lyapunov(n_points, repeat):
    mags = SpinMagnitudes.from_ratio(1.1)
    rng = np.random.default_rng(0)
    s = rng.normal(size=(n_points, 3))
    l = rng.normal(size=(n_points, 3))
    s /= np.linalg.norm(s, axis=1, keepdims=True)
    l /= np.linalg.norm(l, axis=1, keepdims=True)
    ks, kl = mags.kick_factors(FP)
    seed_d = np.tile(np.eye(3)[:1], (n_points, 1))
    print(f"\nlyapunov: {n_points} points x 10000 steps")
    for name, mod in sorted(kernels.BACKENDS.items()):
        t = best_of(lambda: mod.lyapunov_points(s.copy(), l.copy(), seed_d.copy(), seed_d.copy(),
                                                ks, kl, FP.a, 10_000, 100, kernels.num_threads()), repeat)
        print(f"{name:>8} {t:10.4f} s")


def bench_quantum(repeat):
    print("\nquantum step (s = l - 1):")
    print(f"{'l':>5} {'dim':>8} {'ms/step':>9}")
    rows = []
    for l in (22, 44, 88, 154, 300):
        s = l - 1
        plan = build_plan(s, l, FP)
        psi = product_state(coherent_state(s, 0.35, 0.7), coherent_state(l, 2.8, 2.3))
        t = best_of(lambda: apply_step(psi, plan), repeat)
        rows.append((l, t))
        print(f"{l:5d} {(2 * s + 1) * (2 * l + 1):8d} {1e3 * t:9.3f}")
    x = np.log([r[0] for r in rows[2:]])
    y = np.log([r[1] for r in rows[2:]])
    print(f"cost exponent in l (l >= 88): {np.polyfit(x, y, 1)[0]:.2f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=200_000)
    ap.add_argument("--steps", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"available backends: {sorted(kernels.BACKENDS)}, default: {kernels.BACKEND}\n")
    bench_classical(args.points, args.steps, args.repeat)
    bench_lyapunov(200, args.repeat)
    bench_quantum(args.repeat)


if __name__ == "__main__":
    main()
