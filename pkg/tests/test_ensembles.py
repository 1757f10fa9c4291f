from __future__ import annotations

import numpy as np
import pytest

from stbench.ensembles import (
    DressedGate,
    GateEnsemble,
    average_channel,
    dressing_ensemble,
    reflection_ensemble,
    twirl_3way,
    twirl_4way,
)
from stbench.errors import InputError
from stbench.pauli import random_unitary, unitary_superop
from stbench.spacetime import classify, transfer


def test_reflection_includes_original_gate(rng):
    u = random_unitary(4, rng)
    e = reflection_ensemble(u)
    assert len(e.members) == 4 and np.allclose(e.probs, 0.25)
    assert any(np.abs(m - u).max() < 1e-10 for m in e.members)
    assert classify(average_channel(e)).label == "4-way"


def test_twirl_classes(rng):
    u = random_unitary(4, rng)
    assert classify(average_channel(twirl_4way(u, 0.0))).label == "4-way"
    assert classify(average_channel(twirl_4way(u, 0.3))).label == "4-way"
    assert classify(average_channel(twirl_3way(u, "first"))).label == "3-way-right"
    assert classify(average_channel(twirl_3way(u, "second"))).label == "3-way-left"


def test_twirl4_lambda_one_keeps_right_mover(rng):
    u = random_unitary(4, rng)
    e0 = unitary_superop(u)
    e1 = average_channel(twirl_4way(u, 1.0))
    assert np.allclose(transfer(e1, "plus"), transfer(e0, "plus"))
    # M- loses its traceless part to a factor 1/3
    m0, m1 = transfer(e0, "minus"), transfer(e1, "minus")
    one = np.array([1, 0, 0, 1]) / np.sqrt(2)
    proj = np.outer(one, one)
    assert np.allclose(m1 - proj, (m0 - proj) / 3)


def test_twirl3_keeps_right_mover(rng):
    u = random_unitary(4, rng)
    assert np.allclose(transfer(average_channel(twirl_3way(u)), "plus"), transfer(unitary_superop(u), "plus"))


def test_dressed_gate_matrix():
    u = np.eye(4, dtype=complex)
    dg = DressedGate((1, 0), u, (0, 3))
    x = np.array([[0, 1], [1, 0]])
    z = np.diag([1, -1])
    assert np.allclose(dg.matrix(), np.kron(np.eye(2), z) @ np.kron(x, np.eye(2)))


def test_dressing_ensemble_normalizes_and_labels(rng):
    u = random_unitary(4, rng)
    e = dressing_ensemble(u, {(0, 0, 0, 0): 0.5, (1, 0, 0, 0): 0.5, (2, 0, 0, 0): 0.0})
    assert e.labels == ["IIII", "XIII"]


def test_sampling_respects_probabilities(rng):
    u = random_unitary(4, rng)
    e = twirl_4way(u, 1.0)
    draws = np.array([e.sample(rng) for _ in range(4000)])
    assert abs(np.mean(draws == 0) - 0.25) < 0.03


def test_invalid_ensembles():
    with pytest.raises(InputError):
        GateEnsemble(np.array([0.5, 0.4]), [np.eye(4), np.eye(4)])
    with pytest.raises(InputError):
        GateEnsemble(np.array([1.0]), [np.ones((4, 4))])
    with pytest.raises(InputError):
        twirl_4way(np.eye(4), 1.5)
    with pytest.raises(InputError):
        twirl_3way(np.eye(4), "middle")
