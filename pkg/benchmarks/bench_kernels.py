#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Times the two hot fitting kernels over a grid of workload sizes and, with
--end-to-end, a full mixture fit under each backend (run in subprocesses
so the import-time backend selection applies).

    python benchmarks/bench_kernels.py [--end-to-end]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from dirlap import _kernels_py

try:
    from dirlap import _kernels_cy
except ImportError:
    _kernels_cy = None

WORKLOADS = [
    # (points, components, dimension) ~ small fit, Table-IV-scale fit,
    # stereo separation, many-channel separation
    (2_000, 1, 3),
    (3_000, 5, 3),
    (80_000, 4, 2),
    (200_000, 8, 4),
]


def make_inputs(n, k, p, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    x = np.ascontiguousarray(x / np.linalg.norm(x, axis=1, keepdims=True))
    means = rng.standard_normal((k, p))
    means = np.ascontiguousarray(means / np.linalg.norm(means, axis=1, keepdims=True))
    ks = rng.uniform(1.0, 25.0, k)
    log_wc = rng.uniform(-2.0, 2.0, k)
    return x, means, ks, log_wc


def best_of(fn, repeats=5):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels():
    header = f"{'workload (N,K,p)':>20} {'kernel':>18} {'numpy':>10} {'compiled':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for n, k, p in WORKLOADS:
        x, means, ks, log_wc = make_inputs(n, k, p)
        resp, _, _ = _kernels_py.responsibilities(x, means, ks, log_wc)
        rows = [
            (
                "responsibilities",
                lambda: _kernels_py.responsibilities(x, means, ks, log_wc),
                None
                if _kernels_cy is None
                else (lambda: _kernels_cy.responsibilities(x, means, ks, log_wc)),
            ),
            (
                "weighted_moments",
                lambda: _kernels_py.weighted_moments(x, means, resp),
                None
                if _kernels_cy is None
                else (lambda: _kernels_cy.weighted_moments(x, means, resp)),
            ),
        ]
        for name, py_fn, cy_fn in rows:
            t_py = best_of(py_fn)
            if cy_fn is None:
                print(f"{f'({n},{k},{p})':>20} {name:>18} {t_py*1e3:9.2f}ms {'n/a':>10} {'':>8}")
                continue
            t_cy = best_of(cy_fn)
            print(
                f"{f'({n},{k},{p})':>20} {name:>18} {t_py*1e3:9.2f}ms "
                f"{t_cy*1e3:9.2f}ms {t_py/t_cy:7.2f}x"
            )


END_TO_END_SNIPPET = """
import time
import numpy as np
from dirlap import AngularDataset, DldParams, FitConfig, fit_mixture, sample_dld
from dirlap.backends import backend_name

means = np.array([[0.9, 0.3, 0.316], [-0.2, 0.8, 0.566], [0.1, -0.6, 0.794]])
means /= np.linalg.norm(means, axis=1, keepdims=True)
parts = [sample_dld(DldParams(mean=m, k=12.0, p=3), 20000, seed=i).points
         for i, m in enumerate(means)]
data = AngularDataset(np.vstack(parts))
fit_mixture(data, 3, FitConfig(seed=0, max_iter=60, tol=0.0))  # warm cache
t0 = time.perf_counter()
fit_mixture(data, 3, FitConfig(seed=0, max_iter=60, tol=0.0))
print(f"{backend_name():>10}: 60 EM iterations on 60k x 3 points in "
      f"{time.perf_counter() - t0:.2f}s")
"""


def bench_end_to_end():
    print("\nend-to-end mixture fit (subprocess per backend):")
    for backend in ("python", "compiled"):
        env = dict(os.environ, DIRLAP_KERNELS=backend)
        proc = subprocess.run(
            [sys.executable, "-c", END_TO_END_SNIPPET],
            env=env,
            capture_output=True,
            text=True,
        )
        if proc.returncode != 0:
            print(f"{backend:>10}: unavailable ({proc.stderr.strip().splitlines()[-1]})")
        else:
            print(proc.stdout.strip())


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--end-to-end", action="store_true")
    args = parser.parse_args()
    if _kernels_cy is None:
        print("note: compiled kernels not built; showing NumPy timings only\n")
    bench_kernels()
    if args.end_to_end:
        bench_end_to_end()


if __name__ == "__main__":
    main()
