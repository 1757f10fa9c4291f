from __future__ import annotations

import numpy as np
import pytest

from stbench.simplex import linprog_bland

scipy_optimize = pytest.importorskip("scipy.optimize")


@pytest.mark.parametrize("seed", range(6))
def test_matches_scipy_on_random_feasible_lps(seed):
    rng = np.random.default_rng(seed)
    m, n = 5, 12
    A = rng.normal(size=(m, n))
    x0 = rng.uniform(0.1, 1.0, size=n)
    b = A @ x0
    c = rng.uniform(0.0, 1.0, size=n)
    ours = linprog_bland(c, A, b)
    ref = scipy_optimize.linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    assert ours.status == "optimal"
    assert ours.objective == pytest.approx(ref.fun, abs=1e-8)
    assert np.allclose(A @ ours.x, b, atol=1e-8) and ours.x.min() > -1e-10


def test_redundant_rows():
    A = np.array([[1.0, 1.0, 0.0], [2.0, 2.0, 0.0], [0.0, 1.0, 1.0]])
    b = np.array([1.0, 2.0, 1.0])
    res = linprog_bland([1.0, 0.0, 1.0], A, b)
    assert res.status == "optimal" and res.objective == pytest.approx(0.0, abs=1e-12)


def test_infeasible_with_farkas_certificate():
    A = np.array([[1.0, 1.0], [1.0, 1.0]])
    b = np.array([1.0, 2.0])
    res = linprog_bland([0.0, 0.0], A, b)
    assert res.status == "infeasible"
    y = res.certificate
    assert np.all(A.T @ y <= 1e-9) and b @ y > 1e-9


def test_certificate_with_negative_rhs():
    A = np.array([[1.0, 1.0], [1.0, 1.0]])
    b = np.array([-1.0, 2.0])
    y = linprog_bland([0.0, 0.0], A, b).certificate
    assert np.all(A.T @ y <= 1e-9) and b @ y > 1e-9


def test_unbounded():
    res = linprog_bland([-1.0, 0.0], np.array([[1.0, -1.0]]), np.array([0.0]))
    assert res.status == "unbounded"
