from __future__ import annotations

import numpy as np
import pytest

from conftest import ENSEMBLES, random_spec
from stbench import correlators as co
from stbench.circuit import InitialState, Observable, PauliNoiseModel, product_observable, uniform_spec
from stbench.ensembles import twirl_4way
from stbench.errors import InputError, PreconditionError
from stbench.pauli import X, Y, Z, random_unitary
from stbench.simulator import evolve_exact_average

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def swap_spec(L, T, kind):
    return uniform_spec(L, T, lambda t, b: SWAP, InitialState(kind, L))


def oracle(spec, obs):
    return float(evolve_exact_average(spec, [obs])[0])


# --- analytic oracles: SWAP circuits move operators ballistically -------------


@pytest.mark.parametrize("T", [1, 2, 3])
def test_single_site_swap_light_ray(T):
    spec = swap_spec(2 * T + 2, T, "plus_bell")
    assert co.avg_single_site(spec, Observable((T,), X)) == pytest.approx(1.0, abs=1e-12)
    assert co.avg_single_site(spec, Observable((T,), Z)) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("T", [1, 2])
def test_two_body_swap_bell_pair_spreads(T):
    L = 4 * T + 2
    spec = swap_spec(L, T, "bell_product")
    i, j = T, 3 * T + 1
    for a, b, want in ((Z, Z, 1.0), (X, X, 1.0), (Y, Y, -1.0), (X, Z, 0.0)):
        got = co.avg_two_body(spec, Observable((i,), a), Observable((j,), b))
        assert got == pytest.approx(want, abs=1e-12)


# --- dense oracle -------------------------------------------------------------


@pytest.mark.parametrize("ens", ["reflection", "twirl4way", "twirl3way"])
def test_single_site_matches_oracle(ens, rng):
    spec = random_spec(8, 3, "plus_bell", ENSEMBLES[ens], rng)
    o = Observable((3,), Y)
    assert abs(co.avg_single_site(spec, o) - oracle(spec, o)) < 1e-10


@pytest.mark.parametrize("ens", ["reflection", "twirl4way_half"])
def test_two_body_matches_oracle(ens, rng):
    spec = random_spec(10, 2, "bell_product", ENSEMBLES[ens], rng)
    a, b = Observable((2,), X), Observable((7,), Z)
    got = co.avg_two_body(spec, a, b)
    assert abs(got - oracle(spec, product_observable((2, 7), (X, Z)))) < 1e-10
    assert abs(got) > 1e-6


def test_three_site_matches_oracle_and_plain_form(rng):
    spec = random_spec(8, 2, "bell_product", ENSEMBLES["twirl3way"], rng)
    o = product_observable((1, 2, 3), (X, Y, Z))
    got = co.avg_three_site(spec, o)
    assert abs(got - oracle(spec, o)) < 1e-10
    assert abs(got - co.avg_three_site_plain(spec, o)) < 1e-12


@pytest.mark.parametrize("kind", ["bell_product", "plus_bell"])
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_k_body_matches_oracle(kind, k, rng):
    L, T = 8, 1
    spec = random_spec(L, T, kind, ENSEMBLES["twirl3way"], rng)
    ops = [X, Y, Z, X][:k]
    o = product_observable(tuple(range(1, 1 + k)), ops)
    assert abs(co.avg_k_body(spec, o) - oracle(spec, o)) < 1e-10


def test_k_body_single_site_agrees_with_single_site_scheme(rng):
    spec = random_spec(8, 3, "plus_bell", ENSEMBLES["reflection"], rng)
    o = Observable((3,), Z)
    assert abs(co.avg_k_body(spec, o) - co.avg_single_site(spec, o)) < 1e-12


# --- vanishing values -----------------------------------------------------------


def test_two_body_vanishes_off_light_cone(rng):
    spec = random_spec(10, 2, "bell_product", ENSEMBLES["reflection"], rng)
    for i, j in ((2, 5), (2, 6), (3, 7)):
        got = co.avg_two_body(spec, Observable((i,), Z), Observable((j,), Z))
        assert got == 0.0
        assert abs(oracle(spec, product_observable((i, j), (Z, Z)))) < 1e-12


def test_single_site_vanishes_off_ray(rng):
    spec = random_spec(8, 2, "plus_bell", ENSEMBLES["twirl4way"], rng)
    for x in (0, 1, 3, 5):
        o = Observable((x,), X)
        assert co.avg_single_site(spec, o) == 0.0
        assert abs(oracle(spec, o)) < 1e-12


# --- noise ------------------------------------------------------------------------


def test_noisy_two_body_matches_noisy_oracle(rng):
    noise = PauliNoiseModel.uniform(10, 0.01, 0.02, 0.005)
    spec = random_spec(10, 2, "bell_product", ENSEMBLES["twirl4way"], rng, noise)
    a, b = Observable((2,), Y), Observable((7,), Y)
    got = co.noisy_avg(spec, "two_body", [a, b])
    assert abs(got - oracle(spec, product_observable((2, 7), (Y, Y)))) < 1e-10


def test_noisy_single_and_three_site(rng):
    noise = PauliNoiseModel.uniform(8, 0.01, 0.0, 0.03)
    spec = random_spec(8, 2, "plus_bell", ENSEMBLES["twirl3way"], rng, noise)
    o = Observable((2,), X)
    assert abs(co.avg_single_site(spec, o) - oracle(spec, o)) < 1e-10
    spec = random_spec(8, 2, "bell_product", ENSEMBLES["twirl3way"], rng, noise)
    o = product_observable((1, 2, 3), (Z, X, Z))
    assert abs(co.avg_three_site(spec, o) - oracle(spec, o)) < 1e-10


def test_zero_noise_reduces_to_noiseless(rng):
    spec = random_spec(10, 2, "bell_product", ENSEMBLES["twirl4way"], rng)
    quiet = uniform_spec(10, 2, lambda t, b: spec.slots[(t, b)], spec.init, PauliNoiseModel.uniform(10, 0, 0, 0))
    a, b = Observable((2,), X), Observable((7,), X)
    assert co.avg_two_body(quiet, a, b) == co.avg_two_body(spec, a, b)


# --- preconditions ------------------------------------------------------------------


def test_two_body_rejects_three_way_channel_naming_slot(rng):
    spec = random_spec(10, 2, "bell_product", ENSEMBLES["twirl3way"], rng)
    with pytest.raises(PreconditionError, match="layer 1, bond"):
        co.avg_two_body(spec, Observable((2,), Z), Observable((7,), Z))


def test_raw_unitary_rejected(rng):
    spec = uniform_spec(8, 2, lambda t, b: random_unitary(4, rng), InitialState("plus_bell", 8))
    with pytest.raises(PreconditionError, match="right"):
        co.avg_single_site(spec, Observable((2,), X))


def test_boundary_preconditions(rng):
    spec = random_spec(8, 2, "bell_product", ENSEMBLES["reflection"], rng)
    with pytest.raises(PreconditionError, match="boundary"):
        co.avg_two_body(spec, Observable((2,), Z), Observable((7,), Z))
    spec = random_spec(6, 3, "bell_product", ENSEMBLES["twirl3way"], rng)
    with pytest.raises(PreconditionError):
        co.avg_three_site(spec, product_observable((2, 3, 4), (X, X, X)))
    spec = random_spec(6, 4, "plus_bell", ENSEMBLES["twirl3way"], rng)
    with pytest.raises(PreconditionError):
        co.avg_single_site(spec, Observable((4,), X))


@pytest.mark.parametrize("lam,i,j", [(1.0, 2, 7), (0.0, 0, 5)])
def test_edge_decoupled_twirls_allow_edge_pairs(lam, i, j, rng):
    noise = PauliNoiseModel.uniform(8, 0.005, 0.005, 0.005)
    spec = random_spec(8, 2, "bell_product", lambda u: twirl_4way(u, lam), rng, noise)
    assert co.edge_decoupled(spec, "right" if lam == 1.0 else "left")
    a, b = Observable((i,), X), Observable((j,), Y)
    got = co.avg_two_body(spec, a, b)
    assert abs(got - oracle(spec, product_observable((i, j), (X, Y)))) < 1e-10
    # the mirror edge stays closed
    with pytest.raises(PreconditionError, match="boundary"):
        co.avg_two_body(spec, Observable((7 - j,), X), Observable((7 - i,), Y))


def test_generic_four_way_does_not_decouple_edges(rng):
    spec = random_spec(8, 2, "bell_product", ENSEMBLES["twirl4way_half"], rng)
    assert not co.edge_decoupled(spec, "left") and not co.edge_decoupled(spec, "right")


def test_input_checks(rng):
    spec = random_spec(8, 1, "plus_bell", ENSEMBLES["twirl3way"], rng)
    with pytest.raises(PreconditionError, match="traceless"):
        co.avg_single_site(spec, Observable((1,), np.eye(2)))
    with pytest.raises(PreconditionError, match="bell_product"):
        co.avg_two_body(spec, Observable((1,), X), Observable((4,), X))
    with pytest.raises(InputError, match="consecutive"):
        co.avg_k_body(spec, product_observable((1, 3), (X, X)))
    with pytest.raises(InputError):
        co.evaluate(spec, "five_site", [Observable((1,), X)])


def test_depth_zero_uses_initial_state():
    spec = uniform_spec(6, 0, lambda t, b: np.eye(4), InitialState("bell_product", 6))
    got = co.avg_two_body(spec, Observable((0,), Z), Observable((1,), Z))
    assert got == pytest.approx(1.0)
