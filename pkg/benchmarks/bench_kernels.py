"""Compare the numba and numpy backends of the hot kernels.

    python benchmarks/bench_kernels.py [--reps 20] [--seed 1]

Times brute-force coverage optimisation on simulation-sized instances and the
exhaustive augmentation scan on 10-element laminar systems. The first numba
call (compilation or cache load) is reported separately.
"""

import argparse
import statistics
import time

import numpy as np

from macrofacet import _accel, kernels
from macrofacet.matroid import _member_masks
from macrofacet.selection import _tree_arrays
from macrofacet.simulation import ExperimentConfig, generate_instance, trial_seed


def timed(fn, reps):
    samples = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def coverage_case(seed):
    config = ExperimentConfig()
    u, tree = generate_instance(config, trial_seed(seed, 0))
    ids = list(u.ground)
    chains, quotas = _tree_arrays(ids, tree)
    cover = np.array([u.matrix[u._row[m]] for m in ids], dtype=bool)
    return cover, np.asarray(u.weights, dtype=np.float64), chains, quotas


def augmentation_case(seed, n=10):
    config = ExperimentConfig(num_macro=n, num_groups=3)
    _, tree = generate_instance(config, trial_seed(seed, 1))
    masks, quotas = _member_masks(tree)
    return kernels.independent_masks(masks, quotas, n, backend="numpy"), n


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", type=int, default=20)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args(argv)

    backends = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA and not _accel.DISABLED else [])
    cover, weights, chains, quotas = coverage_case(args.seed)
    table, n = augmentation_case(args.seed)
    cases = {
        "coverage_optimum (M=14, U=120)":
            lambda b: kernels.coverage_optimum(cover, weights, chains, quotas, backend=b),
        "augmentation_violation (n=10)":
            lambda b: kernels.augmentation_violation(table, n, backend=b),
    }

    print(f"default backend: {_accel.BACKEND}")
    for name, run in cases.items():
        results = {}
        for b in backends:
            t0 = time.perf_counter()
            first = run(b)
            warm = time.perf_counter() - t0
            results[b] = (timed(lambda: run(b), args.reps), warm, first)
        line = "  ".join(f"{b}: {med * 1e3:8.3f} ms (first {warm * 1e3:.1f} ms)"
                         for b, (med, warm, _) in results.items())
        print(f"{name:34s} {line}")
        if len(results) == 2:
            a, b = results["numpy"], results["numba"]
            same = np.allclose(np.asarray(a[2][:2], dtype=float), np.asarray(b[2][:2], dtype=float))
            print(f"{'':34s} speedup x{a[0] / b[0]:.1f}, results agree: {same}")
    if len(backends) == 1:
        print("numba unavailable or disabled; only the numpy backend was timed")


if __name__ == "__main__":
    main()
