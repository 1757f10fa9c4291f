"""Circuit families for the coherent T-gate study and the sample-complexity study."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import BrickworkSpec, InitialState, Observable, PauliNoiseModel, product_observable, uniform_spec
from .ensembles import reflection_from_kak, twirl_3way, twirl_4way
from .errors import InputError
from .kak import KakForm, local_w
from .pauli import I2, X, Y, Z

H_GATE = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT12 = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CNOT21 = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex)

# single-qubit words, read left to right as matrix products
_WORDS = {1: "HTTHTH", 2: "HTTHTHTH", 3: "HTTHTHT"}


@dataclass(frozen=True)
class TGateModel:
    """T(phi) = diag(1, e^{i phi}); phi = pi/4 is the ideal T gate."""

    phi: float

    def t(self) -> np.ndarray:
        return np.diag([1.0, np.exp(1j * self.phi)])

    def u(self, n: int) -> np.ndarray:
        if n not in _WORDS:
            raise InputError(f"gate family must be 1, 2 or 3, got {n!r}")
        mats = {"H": H_GATE, "T": self.t()}
        out = I2.astype(complex)
        for ch in _WORDS[n]:
            out = out @ mats[ch]
        return out

    def gate(self, n: int) -> np.ndarray:
        uu = np.kron(self.u(n), self.u(n))
        return CNOT12 @ uu @ CNOT21 @ uu @ CNOT12 @ uu


def build_fig1_circuit(n: int, phi: float, T: int = 5, L: int | None = None,
                       noise: PauliNoiseModel | None = None) -> tuple[BrickworkSpec, Observable]:
    """Uniform brickwork of U_(n), 3-way twirled, plus/Bell start, sigma_X at site T."""
    L = 2 * T + 2 if L is None else L
    ens = twirl_3way(TGateModel(phi).gate(n), "first")
    spec = uniform_spec(L, T, lambda t, b: ens, InitialState("plus_bell", L), noise,
                        {"family": n, "phi": phi})
    return spec, Observable((T,), X)


# (alpha, beta, gamma) of W(a, b, c) = exp(i (a X + b Y + c Z)) for even and odd layers
LAYER_LOCALS = {
    "even": {"w_a": (1.54383, 1.80539, 0.17212), "w_b": (1.64979, 0.48791, 0.20562)},
    "odd": {"w_a": (1.53416, 0.20499, 1.04460), "w_b": (0.45310, 1.11250, 1.60546)},
}

FIG2_THETA = (np.pi / 4 + 0.05, np.pi / 4 + 0.05, 0.6)
O1_COEFFS = (0.57, 0.12, 0.84)


def o1_matrix() -> np.ndarray:
    a = O1_COEFFS[0] * X + O1_COEFFS[1] * Y + O1_COEFFS[2] * Z
    return a / np.sqrt(np.real(np.trace(a.conj().T @ a)))


def fig2_form(parity: str, theta=FIG2_THETA) -> KakForm:
    loc = LAYER_LOCALS[parity]
    return KakForm(local_w(*loc["w_a"]), local_w(*loc["w_b"]), I2.astype(complex), I2.astype(complex),
                   tuple(float(v) for v in theta))


def fig2_ensembles(theta=FIG2_THETA) -> dict:
    return {p: reflection_from_kak(fig2_form(p, theta)) for p in ("even", "odd")}


def build_fig2_circuit(T: int, L: int | None = None, noise: PauliNoiseModel | None = None) -> BrickworkSpec:
    """Reflection ensemble with the tabulated locals; the first applied layer counts as even."""
    L = min(2 * T + 2, 20) if L is None else L
    ens = fig2_ensembles()
    return uniform_spec(L, T, lambda t, b: ens["even" if (t - 1) % 2 == 0 else "odd"],
                        InitialState("plus_bell", L), noise, {"T": T})


def fig2_depths(t_min: int = 2, t_max: int = 14, l_cap: int = 20) -> list:
    """Depths whose L = 2T + 2 fits under the statevector cap."""
    return [t for t in range(t_min, t_max + 1) if 2 * t + 2 <= l_cap]


def noisy_twobody_circuit(L: int, T: int, p: float, seed: int, lam: float = 1.0) -> BrickworkSpec:
    """Haar seed gates, 4-way twirled, uniform Pauli noise after every layer."""
    from .pauli import random_unitary

    rng = np.random.default_rng(seed)
    noise = PauliNoiseModel.uniform(L, p, p, p)
    return uniform_spec(L, T, lambda t, b: twirl_4way(random_unitary(4, rng), lam),
                        InitialState("bell_product", L), noise, {"p": p})


def two_body_observables(L: int, T: int, a=Z, b=Z) -> tuple[Observable, Observable]:
    """Observables on (T, 3T+1), the leftmost placement at distance 2T+1."""
    return Observable((T,), a), Observable((3 * T + 1,), b)


def joint(a: Observable, b: Observable) -> Observable:
    return product_observable(a.sites + b.sites, [a.matrix, b.matrix])
