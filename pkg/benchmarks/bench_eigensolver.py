"""Timing of the symmetric eigensolver: numba kernels vs the numpy fallback vs LAPACK.

Run:  python3 benchmarks/bench_eigensolver.py [--sizes 256 512 1024] [--repeat 3]

The fallback path is timed in a child process started with SYMSPEC_NUMBA=0,
since the flag is read once at import time.
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np
import scipy.linalg

CHILD = """
import json, sys, time
import numpy as np
from symspec import _accel, eigensolver
sizes, repeat = json.loads(sys.argv[1]), int(sys.argv[2])
out = {"numba": _accel.USE_NUMBA}
for n in sizes:
    r = np.random.default_rng(n)
    A = r.standard_normal((n, n)); A = A + A.T
    eigensolver.eigvalsh(A[:8, :8], method="householder")          # compile / warm up
    best_tri = best_ql = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        d, e = eigensolver.tridiagonalize(A, method="householder")
        t1 = time.perf_counter()
        ev = eigensolver.eigvalsh_tridiagonal(d, e)
        t2 = time.perf_counter()
        best_tri, best_ql = min(best_tri, t1 - t0), min(best_ql, t2 - t1)
    err = float(np.abs(ev - np.linalg.eigvalsh(A)).max())
    out[str(n)] = {"householder": best_tri, "ql": best_ql, "max_err": err}
print(json.dumps(out))
"""


def run_child(sizes, repeat, numba):
    env = dict(os.environ, SYMSPEC_NUMBA="1" if numba else "0")
    res = subprocess.run([sys.executable, "-c", CHILD, json.dumps(sizes), str(repeat)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def lapack_times(sizes, repeat):
    out = {}
    for n in sizes:
        r = np.random.default_rng(n)
        A = r.standard_normal((n, n))
        A = A + A.T
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            scipy.linalg.eigvalsh(A)
            best = min(best, time.perf_counter() - t0)
        out[str(n)] = best
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[256, 512, 1024])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    fast = run_child(args.sizes, args.repeat, numba=True)
    slow = run_child(args.sizes, args.repeat, numba=False)
    lap = lapack_times(args.sizes, args.repeat)
    if not fast["numba"]:
        print("note: numba is unavailable, both columns use the numpy fallback")

    print(f"{'n':>6} {'numba tri+QL':>14} {'numpy tri+QL':>14} {'speedup':>8} {'LAPACK':>9} {'max err':>9}")
    for n in args.sizes:
        f, s = fast[str(n)], slow[str(n)]
        tf, ts = f["householder"] + f["ql"], s["householder"] + s["ql"]
        print(f"{n:>6} {tf:>13.4f}s {ts:>13.4f}s {ts / tf:>7.1f}x {lap[str(n)]:>8.4f}s {max(f['max_err'], s['max_err']):>9.1e}")


if __name__ == "__main__":
    main()
