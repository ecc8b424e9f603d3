"""Time each kernel under the compiled and NumPy backends.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--json out.json]

Prints one row per (kernel, size) with the best wall time of each backend
and the speed-up.  Inputs are seeded so rows are comparable across runs.
"""
from __future__ import annotations

import argparse
import json
import time

import numpy as np

from mfpotts import _backend


def _cases(rng):
    def sym(n):
        a = rng.normal(size=(n, n))
        return (a + a.T) / 2

    for n, q in ((16, 2), (20, 2), (12, 3)):
        A = sym(n)
        np.fill_diagonal(A, 0)
        J = np.eye(q)
        h = np.zeros(q)
        yield "energies", f"n={n} q={q}", lambda k, A=A, J=J, h=h, t=q ** n: k.energies(A, J, h, 0, t)
    for n in (50, 150, 300):
        A = sym(n)
        yield "jacobi_eigh", f"n={n}", lambda k, A=A: k.jacobi_eigh(A, 1e-12, 100)
    for k_ in (12, 16, 20):
        M = sym(k_)
        yield "subset_scan", f"k={k_}", lambda k, M=M: k.subset_scan(M)
    for n, q in ((200, 3), (1000, 2)):
        K = sym(n) / np.sqrt(n)
        np.fill_diagonal(K, 0)
        J, h = np.eye(q), np.zeros(q)
        th = np.full((n, q), 1.0 / q)

        def run(k, K=K, J=J, h=h, th=th):
            t = th.copy()
            for _ in range(10):
                k.mf_sweep(K, J, h, t, 0.0)
        yield "mf_sweep", f"n={n} q={q} x10", run


def best_time(fn, repeat):
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return min(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", metavar="PATH", help="also write the table as JSON")
    args = ap.parse_args()
    names = _backend.available()
    rows = []
    print(f"{'kernel':<12} {'size':<16}" + "".join(f"{n:>12}" for n in names) + ("   speed-up" if len(names) > 1 else ""))
    for kernel, size, fn in _cases(np.random.default_rng(0)):
        times = {n: best_time(lambda: fn(_backend.get(n)), args.repeat) for n in names}
        row = {"kernel": kernel, "size": size, **{f"{n}_s": t for n, t in times.items()}}
        line = f"{kernel:<12} {size:<16}" + "".join(f"{times[n]:>11.4f}s" for n in names)
        if len(names) > 1:
            row["speedup"] = times["python"] / times["cython"]
            line += f"   {row['speedup']:8.1f}x"
        rows.append(row)
        print(line, flush=True)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
