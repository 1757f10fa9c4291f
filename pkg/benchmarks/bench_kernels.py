"""Time the numba kernels against the pure-numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--qubits 12 16 20] [--gates 64] [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from stbench.kernels import HAVE_NUMBA, apply_circuit2, apply_matrix
from stbench.pauli import random_unitary


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_circuit(n: int, gates: int, repeat: int, rng) -> dict:
    mats = np.stack([random_unitary(4, rng) for _ in range(gates)])
    pairs = np.array([[q, q + 1] for q in rng.integers(0, n - 1, size=gates)], dtype=np.int64)
    psi0 = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    psi0 /= np.linalg.norm(psi0)
    out = {}
    results = {}
    for backend in ("numpy", "numba"):
        if backend == "numba" and not HAVE_NUMBA:
            continue
        psi = psi0.copy()
        apply_circuit2(psi, mats[:1], pairs[:1], n, backend)  # compile outside the timing

        def run(b=backend):
            p = psi0.copy()
            apply_circuit2(p, mats, pairs, n, b)
            results[b] = p

        out[backend] = _time(run, repeat)
    if len(results) == 2:
        out["max_diff"] = float(np.abs(results["numpy"] - results["numba"]).max())
    return out


def bench_superop(n: int, repeat: int, rng) -> dict:
    """16x16 superoperator on 4 of 2n qubits, the density-matrix path."""
    m = np.kron(random_unitary(4, rng), random_unitary(4, rng).conj())
    qs = [0, 1, n, n + 1]
    v0 = rng.normal(size=4**n) + 0j
    out = {}
    for backend in ("numpy", "numba"):
        if backend == "numba" and not HAVE_NUMBA:
            continue
        v = v0.copy()
        apply_matrix(v, m, qs, 2 * n, backend)
        out[backend] = _time(lambda b=backend: apply_matrix(v0.copy(), m, qs, 2 * n, b), repeat)
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", type=int, nargs="+", default=[12, 16, 20])
    ap.add_argument("--gates", type=int, default=64)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'path':10s} {'n':>3s} {'numpy [s]':>11s} {'numba [s]':>11s} {'speedup':>8s}")
    for n in args.qubits:
        r = bench_circuit(n, args.gates, args.repeat, rng)
        nb = r.get("numba", float("nan"))
        print(f"{'state':10s} {n:3d} {r['numpy']:11.4f} {nb:11.4f} {r['numpy'] / nb:8.2f}"
              f"   (max |diff| {r.get('max_diff', float('nan')):.1e})")
    for n in [k for k in args.qubits if k <= 10] or [6, 8, 10]:
        r = bench_superop(n, args.repeat, rng)
        nb = r.get("numba", float("nan"))
        print(f"{'density':10s} {n:3d} {r['numpy']:11.4f} {nb:11.4f} {r['numpy'] / nb:8.2f}")


if __name__ == "__main__":
    main()
