from __future__ import annotations

import numpy as np
import pytest

from stbench import correlators as co
from stbench import experiments as ex
from stbench.ensembles import average_channel
from stbench.simulator import evolve_exact_average
from stbench.spacetime import classify


def test_tgate_at_quarter_pi_is_ideal_t():
    assert np.allclose(ex.TGateModel(np.pi / 4).t(), np.diag([1, np.exp(1j * np.pi / 4)]))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_family_gates_are_unitary(n):
    g = ex.TGateModel(0.37).gate(n)
    assert np.allclose(g.conj().T @ g, np.eye(4), atol=1e-12)


def test_unknown_family_rejected():
    with pytest.raises(ValueError):
        ex.TGateModel(0.1).u(4)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_fig1_curve_is_nonconstant_and_matches_oracle(n):
    vals = []
    for phi in np.linspace(0, np.pi / 2, 7):
        spec, obs = ex.build_fig1_circuit(n, phi, T=3)
        v = co.avg_single_site(spec, obs)
        assert abs(v - evolve_exact_average(spec, [obs])[0]) < 1e-10
        vals.append(v)
    assert np.ptp(vals) > 1e-3


def test_o1_is_normalized_traceless():
    o = ex.o1_matrix()
    assert abs(np.trace(o)) < 1e-14
    assert np.trace(o @ o).real == pytest.approx(1.0)


@pytest.mark.parametrize("parity", ["even", "odd"])
def test_fig2_ensembles_average_to_four_way(parity):
    el = ex.fig2_ensembles()[parity]
    assert len(el.members) == 4
    assert classify(average_channel(el)).label == "4-way"


def test_fig2_circuit_alternates_parities():
    spec = ex.build_fig2_circuit(3)
    ens = ex.fig2_ensembles()
    assert spec.L == 8
    assert np.allclose(spec.element(1, 0).members[0], ens["even"].members[0])
    assert np.allclose(spec.element(2, 1).members[0], ens["odd"].members[0])


def test_fig2_depths_respect_cap():
    assert ex.fig2_depths(2, 14, 20) == list(range(2, 10))


def test_noisy_twobody_matches_oracle():
    spec = ex.noisy_twobody_circuit(10, 2, 0.005, seed=3)
    a, b = ex.two_body_observables(10, 2)
    got = co.noisy_avg(spec, "two_body", [a, b])
    assert abs(got - evolve_exact_average(spec, [ex.joint(a, b)])[0]) < 1e-10
