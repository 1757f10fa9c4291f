from __future__ import annotations

import itertools

import numpy as np
import pytest

from stbench import supermap as sm
from stbench.ensembles import average_channel, dressing_ensemble, twirl_3way, twirl_4way
from stbench.errors import InputError, SolverError
from stbench.pauli import PAULIS, random_unitary, superop_to_ptm, unitary_superop


def ptm(u):
    return superop_to_ptm(unitary_superop(u))


# --- sign matrix --------------------------------------------------------------


def test_sign_matrix_is_symmetric_hadamard():
    assert np.array_equal(sm.H, sm.H.T)
    assert set(np.unique(sm.H)) == {-1.0, 1.0}
    assert np.allclose(sm.H @ sm.H, 256 * np.eye(256))


def test_single_qubit_signs_against_real_ptms(rng):
    u = random_unitary(2, rng)
    p = ptm(u)
    for pre, post in itertools.product(range(4), repeat=2):
        q = ptm(PAULIS[post] @ u @ PAULIS[pre])
        for a, b in itertools.product(range(4), repeat=2):
            assert q[b, a] == pytest.approx(sm.single_qubit_dressing_sign(pre, post, a, b) * p[b, a], abs=1e-12)


def test_two_qubit_dressing_signs_against_real_ptms(rng):
    u = random_unitary(4, rng)
    p = ptm(u)
    for key in [(0, 0, 0, 0), (1, 0, 0, 3), (2, 3, 1, 1), (3, 1, 2, 0), (0, 2, 3, 2)]:
        g1, g2, d1, d2 = key
        dressed = np.kron(PAULIS[d1], PAULIS[d2]) @ u @ np.kron(PAULIS[g1], PAULIS[g2])
        x = sm.dressing_signs(*key)
        assert np.allclose(ptm(dressed), p * x.reshape(16, 16).T, atol=1e-12)


def test_weights_roundtrip(rng):
    p = rng.dirichlet(np.ones(256))
    assert np.allclose(sm.weights_from_x(sm.x_from_weights(p)), p)


# --- the positivity operator ---------------------------------------------------


def test_factors_commute():
    assert sm.commutation_check(32) < 1e-12


def test_min_eigenvalue_matches_weights(rng):
    p = rng.dirichlet(np.ones(256))
    x = sm.x_from_weights(p)
    # S is diagonal in the product Bell basis with eigenvalues 256 p(g, d)
    assert sm.min_eigenvalue(x) == pytest.approx(256 * p.min(), rel=1e-8)
    q = p.copy()
    q[7] = -0.01
    q /= q.sum()
    assert sm.min_eigenvalue(sm.x_from_weights(q)) < 0


def test_apply_supermap_equals_dressing_average(rng):
    x = sm.twirl4_x(0.3)
    u = random_unitary(4, rng)
    dist = sm.lp_decompose(x).distribution()
    assert np.allclose(average_channel(dressing_ensemble(u, dist)), sm.apply_supermap(x, u), atol=1e-12)


def test_validate_x():
    with pytest.raises(InputError):
        sm.validate_x(np.zeros(255))
    with pytest.raises(InputError):
        sm.validate_x(np.zeros(256))


# --- optima ----------------------------------------------------------------------


def test_three_way_optimum_is_one():
    sol = sm.solve_supermap("three_way")
    assert sol.value == pytest.approx(1.0, abs=1e-9)
    assert sol.min_eig > -1e-9
    assert np.allclose(sol.table(), sm.twirl3_table(), atol=1e-9)
    assert sm.verify_supermap(sol.x, n_samples=10)["ok"]


def test_three_way_literal_block_has_same_optimum():
    assert sm.solve_supermap("three_way_literal").value == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("prefer,lam", [("left", 0.0), ("right", 1.0)])
def test_four_way_optimum_and_extremes(prefer, lam):
    sol = sm.solve_supermap("four_way", prefer=prefer)
    assert sol.value == pytest.approx(4 / 3, abs=1e-9)
    assert sol.x_rtm + sol.x_ltm == pytest.approx(4 / 3, abs=1e-9)
    assert np.allclose(sol.table(), sm.twirl4_table(lam), atol=1e-9)
    assert np.allclose(sol.x, sm.twirl4_x(lam), atol=1e-9)
    res = sm.verify_supermap(sol.x, n_samples=10)
    assert res["ok"] and res["labels"] == ["4-way"]


def test_twirl4_x_matches_ensemble(rng):
    u = random_unitary(4, rng)
    for lam in (0.0, 0.4, 1.0):
        assert np.allclose(average_channel(twirl_4way(u, lam)), sm.apply_supermap(sm.twirl4_x(lam), u), atol=1e-12)


def test_twirl3_matches_ensemble(rng):
    u = random_unitary(4, rng)
    x = sm.expand_table(sm.twirl3_table())
    assert np.allclose(average_channel(twirl_3way(u, "first")), sm.apply_supermap(x, u), atol=1e-12)


def test_force_both_unit_is_infeasible_with_certificate():
    with pytest.raises(SolverError) as info:
        sm.solve_supermap("four_way", force_both_unit=True)
    y = info.value.certificate
    rows, rhs, _ = sm.constraint_system("four_way", force_both_unit=True)
    assert np.all((rows @ sm.H).T @ y <= 1e-9)
    assert rhs @ y > 1e-9


# --- decomposition -------------------------------------------------------------------


def test_lp_decompose_feasible_and_certificate():
    dec = sm.lp_decompose(sm.twirl4_x(0.5))
    assert dec.feasible and dec.residual < 1e-12
    assert sum(dec.distribution().values()) == pytest.approx(1.0)
    bad = sm.lp_decompose(sm.expand_table(sm.reference_table_3way()))
    assert not bad.feasible
    y = bad.certificate
    x = sm.expand_table(sm.reference_table_3way()).reshape(256)
    assert np.all(sm.H.T @ y <= 1e-9) and x @ y > 1e-9


def test_reference_tables_are_not_positive():
    assert sm.min_eigenvalue(sm.expand_table(sm.reference_table_3way())) < -1e-3
    for lam in (0.0, 1.0):
        x = sm.expand_table(sm.reference_table_4way(lam))
        assert sm.weights_from_x(x).min() == pytest.approx(-0.046875)
    assert sm.weights_from_x(sm.expand_table(sm.reference_table_4way(0.5))).min() > -1e-12


def test_reference_four_way_family_differs_only_by_lambda_swaps():
    for lam in (0.0, 0.25, 1.0):
        diff = ~np.isclose(sm.reference_table_4way(lam), sm.twirl4_table(lam))
        assert diff.sum() == 4
        swapped = np.isclose(sm.reference_table_4way(lam), sm.twirl4_table(1 - lam))
        assert np.all(~diff | swapped)


def test_perturbed_three_way_optimum_is_infeasible():
    t = sm.twirl3_table()
    t[0, 0] += 0.5
    assert not sm.lp_decompose(sm.expand_table(t)).feasible


@pytest.mark.slow
@pytest.mark.parametrize("mode,want", [("three_way", 1.0), ("four_way", 4 / 3)])
def test_barrier_agrees_with_lp(mode, want):
    value, x = sm.solve_sdp_barrier(mode)
    assert value == pytest.approx(want, abs=1e-6)
    assert sm.min_eigenvalue(x) > -1e-6
