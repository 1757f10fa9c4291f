from __future__ import annotations

import numpy as np
import pytest

from stbench.ensembles import average_channel, twirl_3way, twirl_4way
from stbench.errors import InputError
from stbench.kak import interaction
from stbench.pauli import BELL, check_cptp, depolarizing_superop, local_superop, random_unitary, unitary_superop
from stbench.spacetime import (
    boundary_maps,
    classify,
    second_eigenvalue,
    split_right_input,
    trace_left_output,
    transfer,
    two_site_transfer,
)

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def test_swap_is_four_way_and_transfers_are_identity():
    e = unitary_superop(SWAP)
    assert classify(e).label == "4-way"
    assert np.allclose(transfer(e, "plus"), np.eye(4))
    assert np.allclose(transfer(e, "minus"), np.eye(4))


def test_dual_unitary_gate_is_four_way(rng):
    u = np.kron(random_unitary(2, rng), random_unitary(2, rng)) @ interaction((np.pi / 4, np.pi / 4, 0.37))
    assert classify(unitary_superop(u)).label == "4-way"


def test_generic_unitary_is_only_tp_unital(rng):
    c = classify(unitary_superop(random_unitary(4, rng)))
    assert c.tp and c.unital and not c.left_space_unital and not c.right_space_unital
    assert c.label == "general"
    assert c.describe() == "tp+unital only"


def test_product_depolarizer_left_is_right_unital():
    # depolarizing the left output only: E = D (x) id after a generic gate
    e = local_superop(depolarizing_superop(1), np.eye(4)) @ unitary_superop(SWAP)
    c = classify(e)
    assert c.right_space_unital


def test_transfer_of_four_way_average_is_unital_cptp(rng):
    e = average_channel(twirl_4way(random_unitary(4, rng), 1.0))
    for side in ("plus", "minus"):
        m = transfer(e, side)
        rep = check_cptp(m)
        assert rep["cp"] and rep["tp"] and rep["unital"]
        ev = np.abs(np.linalg.eigvals(m))
        assert ev.max() <= 1 + 1e-12 and np.isclose(ev.max(), 1.0)
        assert 0 <= second_eigenvalue(m) <= 1 + 1e-12


def test_split_and_trace_normalization(rng):
    e = average_channel(twirl_3way(random_unitary(4, rng)))
    s = split_right_input(e)
    half = np.array([0.5, 0, 0, 0.5])
    one = np.array([1, 0, 0, 1])
    # a normalized single-site state maps to a normalized two-site state
    out = s @ half
    assert abs(np.kron(one, one) @ out - 1) < 1e-12
    t = trace_left_output(e)
    assert t.shape == (4, 16)
    assert np.allclose(one @ t, np.kron(one, one))


def test_two_site_transfer_shapes(rng):
    e1 = average_channel(twirl_3way(random_unitary(4, rng)))
    e2 = average_channel(twirl_3way(random_unitary(4, rng)))
    m2 = two_site_transfer(e1, e2)
    assert m2.shape == (16, 16)
    one = np.array([1, 0, 0, 1])
    assert np.allclose(np.kron(one, one) @ m2, np.kron(one, one))
    b = boundary_maps(e1, e2)
    assert b.m_r.shape == (4, 4) and b.e_l.shape == (16, 4)


def test_bad_shape():
    with pytest.raises(InputError):
        classify(np.eye(4))
    with pytest.raises(InputError):
        transfer(np.eye(16), "up")
