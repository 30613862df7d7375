"""Compare the compiled convolution kernel with the numpy fallback.

Runs two measurements:

* the raw ``conv_pairs`` kernel on random batches of series products;
* an end-to-end pipeline run (scaffold + valuation rows) in subprocesses,
  once with the compiled kernel and once with ``GALSCAFFOLD_PURE=1``.

Usage::

    python benchmarks/bench_kernels.py [--repeat N] [--skip-pipeline]
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from galscaffold import _kernels_py
from galscaffold.fq import GF

try:
    from galscaffold import _ckernels
except ImportError:
    _ckernels = None

PIPELINE = """
import random, time
from galscaffold import kernels
from galscaffold.examples import random_spec
from galscaffold.pipeline import full_check
start = time.perf_counter()
rng = random.Random(5)
for p, n in [(2, 1), (2, 2), (3, 1)]:
    for _ in range(3):
        full_check(random_spec(p, n, rng), trials=4, seed=rng.random())
print(kernels.BACKEND, time.perf_counter() - start)
"""


def kernel_case(p, f, rows, width, pairs, seed=0):
    rng = np.random.default_rng(seed)
    A = rng.integers(0, p, size=(rows, f, width), dtype=np.int64)
    B = rng.integers(0, p, size=(rows, f, width), dtype=np.int64)
    ia = rng.integers(0, rows, size=pairs, dtype=np.int64)
    ib = rng.integers(0, rows, size=pairs, dtype=np.int64)
    io = rng.integers(0, rows, size=pairs, dtype=np.int64)
    return A, B, ia, ib, io, rows, width, p, GF(p, f).modulus


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-pipeline", action="store_true")
    args = ap.parse_args()

    impls = {"python": _kernels_py.conv_pairs}
    if _ckernels is not None:
        impls["cython"] = _ckernels.conv_pairs
    else:
        print("compiled extension not built; timing the numpy fallback only")

    print(f"{'case':<28}" + "".join(f"{name:>12}" for name in impls) + f"{'speedup':>10}")
    for p, f, rows, width, pairs in [(2, 1, 8, 64, 64), (3, 1, 27, 128, 243), (2, 2, 16, 256, 128),
                                     (3, 2, 9, 512, 81)]:
        case = kernel_case(p, f, rows, width, pairs)
        times = {}
        for name, fn in impls.items():
            times[name] = min(timeit.repeat(lambda: fn(*case), number=3, repeat=args.repeat)) / 3
        label = f"p={p} f={f} rows={rows} N={width}"
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{label:<28}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times.values()) + f"{speed:>9.1f}x")

    if args.skip_pipeline:
        return
    print("\nend-to-end pipeline (9 random towers, 4 trials each):")
    for pure in ("0", "1"):
        env = dict(os.environ, GALSCAFFOLD_PURE=pure)
        out = subprocess.run([sys.executable, "-c", PIPELINE], env=env, capture_output=True, text=True,
                             check=True).stdout.split()
        print(f"  backend {out[0]:<8} {float(out[1]):8.2f}s")


if __name__ == "__main__":
    main()
