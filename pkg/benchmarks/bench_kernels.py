"""Time the compiled and pure-Python coordinate-sweep kernels on the same blocks.

    python benchmarks/bench_kernels.py --d 2000 --m 200 --repeat 5
"""
import argparse
import timeit

import numpy as np

from duhl import DuhlConfig, ProblemSpec, SelectionPolicy, SyntheticSpec, gen_synthetic, run_block_cd
from duhl.kernels import available_backends, get_backend


def sweep_inputs(d, m, seed):
    rng = np.random.default_rng(seed)
    A = np.asfortranarray(rng.standard_normal((d, m)))
    norms = np.einsum("ij,ij->j", A, A)
    y = np.where(rng.uniform(size=m) < 0.5, -1.0, 1.0)
    order = rng.permutation(m).astype(np.intp)
    return A, norms, y, order, rng.standard_normal(d)


def bench_sweeps(backend, d, m, repeat, seed):
    be = get_backend(backend)
    A, norms, y, order, vt = sweep_inputs(d, m, seed)

    def en():
        be.en_sweep(A, norms, np.zeros(m), vt.copy(), order, 0.1, 0.5, float(d))

    def svm():
        be.svm_sweep(A, norms, y, np.zeros(m), np.zeros(d), order, 0.1, float(m))

    return {name: min(timeit.repeat(fn, number=1, repeat=repeat)) for name, fn in
            [("en_sweep", en), ("svm_sweep", svm)]}


def bench_training(backend, d, n, m, rounds, seed):
    data = gen_synthetic(SyntheticSpec(d, n, density=0.1, noise_std=0.01, seed=seed))
    p = ProblemSpec.for_data("elastic-net", data, 0.05, 0.0)
    cfg = DuhlConfig(SelectionPolicy("gap-oracle", m), max_rounds=rounds, seed=seed)
    start = timeit.default_timer()
    traces = run_block_cd(p, data, cfg, backend=backend)
    return timeit.default_timer() - start, traces[-1].total_gap


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--d", type=int, default=2000, help="rows per column (default: 2000)")
    ap.add_argument("--m", type=int, default=200, help="block columns (default: 200)")
    ap.add_argument("--n", type=int, default=800, help="columns for the training run (default: 800)")
    ap.add_argument("--rounds", type=int, default=20, help="training rounds (default: 20)")
    ap.add_argument("--repeat", type=int, default=5, help="timing repeats, best is kept (default: 5)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = available_backends()
    results = {}
    print(f"{'backend':<8} {'en_sweep':>12} {'svm_sweep':>12} {'training':>12}  final gap")
    for name in backends:
        sweeps = bench_sweeps(name, args.d, args.m, args.repeat, args.seed)
        train, gap = bench_training(name, args.d, args.n, args.m, args.rounds, args.seed)
        results[name] = (sweeps["en_sweep"], sweeps["svm_sweep"], train)
        print(f"{name:<8} {sweeps['en_sweep'] * 1e3:>10.2f}ms {sweeps['svm_sweep'] * 1e3:>10.2f}ms "
              f"{train:>11.3f}s  {gap:.6e}")
    if {"cython", "python"} <= set(results):
        ratio = np.array(results["python"]) / np.array(results["cython"])
        print("speedup (python / cython): " + " ".join(f"{r:.1f}x" for r in ratio))
        print("note: the kernels sum dot products in different orders, so a long run can pick a\n"
              "different block at a near-tie and end at a different gap")


if __name__ == "__main__":
    main()
