from __future__ import annotations

import numpy as np
import pytest

from stbench.circuit import InitialState, uniform_spec
from stbench.ensembles import reflection_ensemble, twirl_3way, twirl_4way
from stbench.pauli import random_unitary

ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ENSEMBLES = {
    "reflection": lambda u: reflection_ensemble(u),
    "twirl4way": lambda u: twirl_4way(u, 1.0),
    "twirl4way_half": lambda u: twirl_4way(u, 0.5),
    "twirl3way": lambda u: twirl_3way(u, "first"),
}


def random_spec(L, T, kind, make_ens, rng, noise=None):
    """Brickwork of independent Haar seed gates, each wrapped by make_ens."""
    return uniform_spec(L, T, lambda t, b: make_ens(random_unitary(4, rng)), InitialState(kind, L), noise)
