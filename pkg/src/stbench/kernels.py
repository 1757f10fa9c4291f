"""Hot loops: apply a k-qubit matrix to a state vector in place.

The same kernel serves the statevector path (k = 2 gates on L qubits) and the
density-matrix path (k = 4 superoperators on the 2L-qubit vectorized state).
Qubit 0 is the most significant bit of the flat index.

Backend selection: numba is used when importable unless the environment
variable ``STBENCH_BACKEND`` is set to ``numpy``.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


def backend_name() -> str:
    flag = os.environ.get("STBENCH_BACKEND", "").strip().lower()
    if flag == "numpy" or not HAVE_NUMBA:
        return "numpy"
    return "numba"


def offsets_for(qubits, n: int) -> np.ndarray:
    """Flat-index offsets of the 2^k local basis states of the given qubits."""
    k = len(qubits)
    out = np.zeros(2**k, dtype=np.int64)
    for j in range(2**k):
        off = 0
        for t, q in enumerate(qubits):
            if (j >> (k - 1 - t)) & 1:
                off |= 1 << (n - 1 - q)
        out[j] = off
    return out


def _apply_numpy(psi, mat, qubits, n):
    k = len(qubits)
    t = psi.reshape((2,) * n)
    m = mat.reshape((2,) * (2 * k))
    t = np.tensordot(m, t, axes=(list(range(k, 2 * k)), list(qubits)))
    t = np.moveaxis(t, list(range(k)), list(qubits))
    psi[:] = t.reshape(-1)


if HAVE_NUMBA:

    @njit(cache=True, parallel=True)
    def _apply_numba(psi, mat, offs, bits_sorted, n):
        k = bits_sorted.size
        dim = offs.size
        nbase = 1 << (n - k)
        chunk = 256
        nchunk = (nbase + chunk - 1) // chunk
        for ch in prange(nchunk):
            amp = np.empty(dim, dtype=np.complex128)  # one scratch buffer per chunk
            stop = min(nbase, (ch + 1) * chunk)
            for b in range(ch * chunk, stop):
                base = np.int64(b)
                for t in range(k):
                    lo = bits_sorted[t]
                    base = ((base >> lo) << (lo + 1)) | (base & ((1 << lo) - 1))
                for j in range(dim):
                    amp[j] = psi[base + offs[j]]
                for r in range(dim):
                    acc = 0j
                    for c in range(dim):
                        acc += mat[r, c] * amp[c]
                    psi[base + offs[r]] = acc

    @njit(cache=True, nogil=True)
    def _apply2_serial(psi, mat, i1, i2, bit_lo, bit_hi, n):
        nbase = 1 << (n - 2)
        for b in range(nbase):
            base = ((b >> bit_lo) << (bit_lo + 1)) | (b & ((1 << bit_lo) - 1))
            base = ((base >> bit_hi) << (bit_hi + 1)) | (base & ((1 << bit_hi) - 1))
            j0 = base
            j1 = base + i2
            j2 = base + i1
            j3 = base + i1 + i2
            a0 = psi[j0]
            a1 = psi[j1]
            a2 = psi[j2]
            a3 = psi[j3]
            psi[j0] = mat[0, 0] * a0 + mat[0, 1] * a1 + mat[0, 2] * a2 + mat[0, 3] * a3
            psi[j1] = mat[1, 0] * a0 + mat[1, 1] * a1 + mat[1, 2] * a2 + mat[1, 3] * a3
            psi[j2] = mat[2, 0] * a0 + mat[2, 1] * a1 + mat[2, 2] * a2 + mat[2, 3] * a3
            psi[j3] = mat[3, 0] * a0 + mat[3, 1] * a1 + mat[3, 2] * a2 + mat[3, 3] * a3

    @njit(cache=True, nogil=True)
    def _circuit2_serial(psi, mats, pairs, n):
        for g in range(pairs.shape[0]):
            qa = pairs[g, 0]
            qb = pairs[g, 1]
            ba = n - 1 - qa
            bb = n - 1 - qb
            lo = min(ba, bb)
            hi = max(ba, bb)
            _apply2_serial(psi, mats[g], 1 << ba, 1 << bb, lo, hi, n)


def apply_matrix(psi: np.ndarray, mat: np.ndarray, qubits, n: int, backend: str | None = None) -> None:
    """psi <- (mat on qubits) psi, in place."""
    backend = backend or backend_name()
    mat = np.ascontiguousarray(mat, dtype=np.complex128)
    if backend == "numba":
        offs = offsets_for(qubits, n)
        bits = np.sort(np.array([n - 1 - q for q in qubits], dtype=np.int64))
        _apply_numba(psi, mat, offs, bits, n)
    else:
        _apply_numpy(psi, mat, list(qubits), n)


def apply_circuit2(psi: np.ndarray, mats: np.ndarray, pairs: np.ndarray, n: int, backend: str | None = None) -> None:
    """Apply a sequence of two-qubit gates mats[g] on pairs[g] in place."""
    backend = backend or backend_name()
    if backend == "numba":
        _circuit2_serial(psi, np.ascontiguousarray(mats, dtype=np.complex128),
                         np.ascontiguousarray(pairs, dtype=np.int64), n)
    else:
        for g in range(len(pairs)):
            _apply_numpy(psi, mats[g], [int(pairs[g][0]), int(pairs[g][1])], n)


def set_threads(n: int | None) -> None:
    if n is None or not HAVE_NUMBA:
        return
    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
