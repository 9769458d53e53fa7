"""Time the numba and pure-numpy paths of each kernel.

    python benchmarks/bench_kernels.py [--n 100000] [--repeat 20]

The numba path is compiled (and cached) before timing. Outputs of both paths
are checked for agreement first.
"""
import argparse
import timeit

import numpy as np

from jobrisk import _kernels as K


def cases(n, rng):
    k = 50
    X = np.column_stack([np.ones(n), rng.standard_normal((n, k - 1))])
    y = (rng.random(n) < 0.4).astype(np.float64)
    beta = rng.standard_normal(k) * 0.1
    scores = np.round(rng.random(n), 3)
    labels = (rng.random(n) < 0.3).astype(np.int64)
    p = rng.random(n)
    return {
        "bernoulli_terms": ((X, y, beta), K.bernoulli_terms_numpy, "bernoulli_terms_numba"),
        "concordance_counts": ((scores, labels), K.concordance_counts_numpy, "concordance_counts_numba"),
        "central_moments": ((p,), K.central_moments_numpy, "central_moments_numba"),
        "histogram_counts": ((p, 20), K.histogram_counts_numpy, "histogram_counts_numba"),
    }


def _close(a, b):
    if isinstance(a, tuple):
        return all(_close(x, y) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=1e-9, atol=1e-9)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"n = {args.n}, numba available: {K.HAVE_NUMBA}")
    print(f"{'kernel':<22}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, (a, f_np, nb_name) in cases(args.n, rng).items():
        t_np = min(timeit.repeat(lambda: f_np(*a), number=1, repeat=args.repeat)) * 1e3
        f_nb = getattr(K, nb_name, None)
        if f_nb is None:
            print(f"{name:<22}{t_np:>12.3f}{'-':>12}{'-':>10}")
            continue
        if not _close(f_np(*a), f_nb(*a)):
            raise SystemExit(f"{name}: numba and numpy paths disagree")
        t_nb = min(timeit.repeat(lambda: f_nb(*a), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<22}{t_np:>12.3f}{t_nb:>12.3f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
