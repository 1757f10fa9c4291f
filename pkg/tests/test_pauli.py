from __future__ import annotations

import itertools

import numpy as np
import pytest

from stbench.errors import InputError
from stbench.pauli import (
    BELL,
    PAULIS,
    X,
    Y,
    Z,
    check_cptp,
    choi_of,
    comm_sign,
    commutes,
    depolarizing_superop,
    fold2,
    kraus_superop,
    local_superop,
    pauli_channel,
    pauli_string,
    ptm_to_superop,
    random_unitary,
    superop_to_ptm,
    unfold2,
    unitary_superop,
    unvectorize,
    vectorize,
)


def test_pauli_products():
    assert np.allclose(X @ Y, 1j * Z)
    assert np.allclose(Y @ Z, 1j * X)
    for k in range(4):
        assert np.allclose(PAULIS[k] @ PAULIS[k], np.eye(2))


def test_commutation_table_matches_matrices():
    for a, b in itertools.product(range(4), repeat=2):
        pa, pb = PAULIS[a], PAULIS[b]
        expect = np.allclose(pa @ pb, pb @ pa)
        assert commutes(a, b) == expect
        assert np.allclose(pa @ pb @ pa, comm_sign(a, b) * pb)


def test_vectorization_identity(rng):
    a, b = random_unitary(4, rng), random_unitary(4, rng)
    rho = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    lhs = vectorize(a @ rho @ b.conj().T)
    assert np.allclose(lhs, np.kron(a, b.conj()) @ vectorize(rho))
    assert np.allclose(unvectorize(vectorize(rho)), rho)


def test_ptm_roundtrip_and_normalization(rng):
    s = unitary_superop(random_unitary(4, rng))
    p = superop_to_ptm(s)
    assert np.allclose(p.imag, 0, atol=1e-12)
    assert abs(p[0, 0] - 1) < 1e-12
    assert np.allclose(ptm_to_superop(p), s)
    # unitary PTM is orthogonal
    assert np.allclose(p.real @ p.real.T, np.eye(16), atol=1e-12)


def test_ptm_of_pauli_conjugation_is_sign_diagonal():
    for g in range(4):
        p = superop_to_ptm(unitary_superop(PAULIS[g])).real
        assert np.allclose(p, np.diag([comm_sign(g, a) for a in range(4)]))


def test_choi_of_unitary_is_rank_one_trace_four(rng):
    c = choi_of(unitary_superop(random_unitary(4, rng)))
    ev = np.linalg.eigvalsh(0.5 * (c + c.conj().T))
    assert abs(ev[-1] - 4) < 1e-10
    assert np.all(np.abs(ev[:-1]) < 1e-10)


def test_check_cptp_on_kraus_and_non_cp():
    p = 0.3
    ks = [np.sqrt(1 - p) * np.eye(2), np.sqrt(p) * Z]
    rep = check_cptp(kraus_superop(ks))
    assert rep["cp"] and rep["tp"] and rep["unital"]
    # transpose map is positive but not completely positive
    t = np.zeros((4, 4), dtype=complex)
    for i, j in itertools.product(range(2), repeat=2):
        t[j * 2 + i, i * 2 + j] = 1
    rep = check_cptp(t)
    assert not rep["cp"] and rep["tp"]
    amp = kraus_superop([np.array([[1, 0], [0, np.sqrt(0.5)]]), np.array([[0, np.sqrt(0.5)], [0, 0]])])
    rep = check_cptp(amp)
    assert rep["tp"] and not rep["unital"]


def test_fold_roundtrip_and_product(rng):
    s = unitary_superop(random_unitary(4, rng))
    assert np.allclose(unfold2(fold2(s)), s)
    a, b = random_unitary(2, rng), random_unitary(2, rng)
    assert np.allclose(local_superop(unitary_superop(a), unitary_superop(b)), unitary_superop(np.kron(a, b)))


def test_bell_cap_is_trace():
    rho = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
    assert abs(np.sqrt(2) * BELL @ vectorize(rho) - 1) < 1e-15


def test_pauli_channel_and_depolarizer():
    ch = pauli_channel(0.1, 0.2, 0.3)
    assert np.allclose(np.diag(superop_to_ptm(ch)).real, [1, 1 - 2 * (0.2 + 0.3), 1 - 2 * (0.1 + 0.3), 1 - 2 * (0.1 + 0.2)])
    d = depolarizing_superop(1)
    assert np.allclose(d @ vectorize(np.array([[1, 0], [0, 0]])), vectorize(np.eye(2) / 2))
    with pytest.raises(InputError):
        pauli_channel(0.6, 0.6, 0.0)


def test_rejects_bad_inputs():
    with pytest.raises(InputError):
        unitary_superop(np.ones((4, 4)))
    with pytest.raises(InputError):
        kraus_superop([])
    with pytest.raises(InputError):
        fold2(np.eye(4))


def test_pauli_string_order():
    assert np.allclose(pauli_string((1, 3)), np.kron(X, Z))
