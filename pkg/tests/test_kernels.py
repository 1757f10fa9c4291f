from __future__ import annotations

import numpy as np
import pytest

from stbench import kernels
from stbench.pauli import random_unitary

needs_numba = pytest.mark.skipif(not kernels.HAVE_NUMBA, reason="numba not installed")


def dense_apply(psi, mat, qubits, n):
    """Reference: build the full operator with kron and a permutation."""
    k = len(qubits)
    rest = [q for q in range(n) if q not in qubits]
    t = psi.reshape((2,) * n)
    t = np.moveaxis(t, list(qubits) + rest, list(range(n))).reshape(2**k, -1)
    t = (mat @ t).reshape((2,) * n)
    return np.moveaxis(t, list(range(n)), list(qubits) + rest).reshape(-1)


def random_state(n, rng):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


@pytest.mark.parametrize("backend", ["numpy", pytest.param("numba", marks=needs_numba)])
@pytest.mark.parametrize("qubits", [(0,), (3,), (1, 4), (4, 1), (0, 2, 5), (5, 3, 1, 0)])
def test_apply_matches_dense(backend, qubits, rng):
    n = 6
    psi = random_state(n, rng)
    m = rng.normal(size=(2 ** len(qubits),) * 2) + 1j * rng.normal(size=(2 ** len(qubits),) * 2)
    want = dense_apply(psi, m, qubits, n)
    got = psi.copy()
    kernels.apply_matrix(got, m, qubits, n, backend)
    assert np.allclose(got, want, atol=1e-12)


@pytest.mark.parametrize("backend", ["numpy", pytest.param("numba", marks=needs_numba)])
def test_circuit2_matches_sequence(backend, rng):
    n = 7
    psi = random_state(n, rng)
    pairs = np.array([[0, 1], [2, 3], [4, 5], [1, 2], [3, 4], [6, 5]])
    mats = np.stack([random_unitary(4, rng) for _ in pairs])
    want = psi.copy()
    for m, p in zip(mats, pairs):
        want = dense_apply(want, m, tuple(p), n)
    got = psi.copy()
    kernels.apply_circuit2(got, mats, pairs, n, backend)
    assert np.allclose(got, want, atol=1e-12)


@needs_numba
def test_backends_agree_on_wide_operator(rng):
    n = 12
    psi = random_state(n, rng)
    m = rng.normal(size=(16, 16)) + 0j
    a, b = psi.copy(), psi.copy()
    kernels.apply_matrix(a, m, [2, 7, 8, 11], n, "numpy")
    kernels.apply_matrix(b, m, [2, 7, 8, 11], n, "numba")
    assert np.allclose(a, b, atol=1e-12)


def test_backend_env_flag(monkeypatch):
    monkeypatch.setenv("STBENCH_BACKEND", "numpy")
    assert kernels.backend_name() == "numpy"
    monkeypatch.delenv("STBENCH_BACKEND")
    assert kernels.backend_name() == ("numba" if kernels.HAVE_NUMBA else "numpy")


def test_offsets_msb_convention():
    assert list(kernels.offsets_for([0], 3)) == [0, 4]
    assert list(kernels.offsets_for([2, 0], 3)) == [0, 4, 1, 5]
