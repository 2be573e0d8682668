"""Compare the compiled and pure-Python roof kernels.

    python3 benchmarks/bench_jacobi.py [--repeat 3]

Both kernels run the same search from the same starting isometries; the
script reports wall time, evaluations per second and the final objective.
"""
from __future__ import annotations

import argparse
import time

import numpy as np
from scipy.stats import unitary_group

from nonclassical import _backend
from nonclassical.fock import annihilation
from nonclassical.roof import EPS_SCHEDULE, two_fock


def problem(name: str):
    if name == "two-fock":
        p = two_fock(2, 0.3).p
        lam = p[p > 0]
        idx = np.nonzero(p > 0)[0]
        D = p.size + 2
        V = np.eye(D)[:, idx]
    else:
        rng = np.random.default_rng(5)
        D = 10
        X = rng.normal(size=(D, 6)) + 1j * rng.normal(size=(D, 6))
        X[-2:] = 0
        rho = X @ X.conj().T
        rho /= np.trace(rho).real
        lam, V = np.linalg.eigh(rho)
        keep = lam > 1e-14
        lam, V = lam[keep][::-1], V[:, keep][:, ::-1]
    a = annihilation(V.shape[0])
    A = V.conj().T @ a @ V
    s = np.sqrt(lam)
    B = np.ascontiguousarray(s[:, None] * A * s[None, :])
    full = V @ np.diag(lam) @ V.conj().T
    c_n = float(np.trace(full @ a.conj().T @ a).real)
    c_xi = complex(np.trace(full @ a @ a))
    return lam, B, c_n, c_xi


def bench(kernel, lam, B, c_n, c_xi, starts):
    t0 = time.perf_counter()
    best, evals = np.inf, 0
    for U0 in starts:
        U = U0.copy()
        val, ev = kernel.jacobi_minimize(U, lam, B, c_n, c_xi, np.array(EPS_SCHEDULE), 0.5, 1e-7, 1e-12, 20)
        best, evals = min(best, val), evals + ev
    return time.perf_counter() - t0, evals, best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3, help="random starts per problem")
    args = ap.parse_args()
    kernels = [("python", _backend.PURE)]
    if _backend.COMPILED is not None:
        kernels.insert(0, ("cython", _backend.COMPILED))
    else:
        print("compiled kernel not built; timing the fallback only")
    print(f"{'problem':<10} {'kernel':<8} {'seconds':>9} {'evals/s':>12} {'objective':>16}")
    for name in ("two-fock", "rank-6"):
        lam, B, c_n, c_xi = problem(name)
        m = lam.size
        rng = np.random.default_rng(0)
        starts = [unitary_group.rvs(2 * m, random_state=rng)[:m] for _ in range(args.repeat)]
        times = {}
        for kname, kernel in kernels:
            t, ev, val = bench(kernel, lam, B, c_n, c_xi, starts)
            times[kname] = t
            print(f"{name:<10} {kname:<8} {t:9.3f} {ev / t:12.0f} {val:16.10f}")
        if len(times) == 2:
            print(f"{name:<10} speedup  {times['python'] / times['cython']:9.1f}x")


if __name__ == "__main__":
    main()
