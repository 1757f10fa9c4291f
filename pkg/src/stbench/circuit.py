"""Brickwork layout, initial states, observables and Pauli noise models."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ensembles import GateEnsemble, average_channel
from .errors import InputError
from .pauli import PAULIS, check_unitary, pauli_channel, unitary_superop

KINDS = ("bell_product", "plus_bell", "explicit_product")

_BELL_PURE = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class InitialState:
    kind: str
    L: int
    states: tuple = ()  # per-site 2-vectors or 2x2 matrices for explicit_product

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown initial state kind {self.kind!r}")
        if self.L < 2:
            raise InputError("need at least two sites")
        if self.kind == "bell_product" and self.L % 2:
            raise InputError("bell_product needs an even number of sites")
        if self.kind == "explicit_product" and len(self.states) != self.L:
            raise InputError("explicit_product needs one state per site")

    def blocks(self) -> list:
        """List of (sites, pure vector or None, density matrix)."""
        out = []
        if self.kind == "bell_product":
            for s in range(0, self.L, 2):
                out.append(((s, s + 1), _BELL_PURE, np.outer(_BELL_PURE, _BELL_PURE.conj())))
        elif self.kind == "plus_bell":
            out.append(((0,), _PLUS, np.outer(_PLUS, _PLUS.conj())))
            s = 1
            while s + 1 < self.L:
                out.append(((s, s + 1), _BELL_PURE, np.outer(_BELL_PURE, _BELL_PURE.conj())))
                s += 2
            if s < self.L:
                out.append(((s,), None, np.eye(2, dtype=complex) / 2))
        else:
            for s, st in enumerate(self.states):
                st = np.asarray(st, dtype=complex)
                if st.shape == (2,):
                    out.append(((s,), st, np.outer(st, st.conj())))
                elif st.shape == (2, 2):
                    out.append(((s,), None, st))
                else:
                    raise InputError(f"bad single-site state at site {s}")
        return out

    def partner(self, site: int):
        for sites, _, _ in self.blocks():
            if site in sites and len(sites) == 2:
                return sites[1] if sites[0] == site else sites[0]
        return None

    @property
    def first_offset(self) -> int:
        # bond parity of layer 1: Bell pairs sit on the layer-0 bonds
        return 1 if self.kind == "bell_product" else 0


@dataclass(frozen=True)
class Observable:
    sites: tuple
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        k = len(self.sites)
        if m.shape != (2**k, 2**k):
            raise InputError(f"observable on {k} sites needs a {2**k}x{2**k} matrix")
        if np.linalg.norm(m - m.conj().T) > 1e-12:
            raise InputError("observable is not Hermitian")
        if len(set(self.sites)) != k:
            raise InputError("observable sites must be distinct")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "sites", tuple(int(s) for s in self.sites))

    def is_traceless(self, tol: float = 1e-12) -> bool:
        return abs(np.trace(self.matrix)) <= tol


def product_observable(sites, mats) -> Observable:
    m = np.ones((1, 1), dtype=complex)
    for a in mats:
        m = np.kron(m, np.asarray(a, dtype=complex))
    return Observable(tuple(sites), m)


@dataclass(frozen=True)
class PauliNoiseModel:
    """Independent single-site Pauli noise after every brickwork layer."""

    probs: np.ndarray  # shape (L, 3): (p_X, p_Y, p_Z) per site

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.probs, dtype=float))
        if p.shape[1] != 3:
            raise InputError("noise probabilities need three columns (pX, pY, pZ)")
        if np.any(p < 0) or np.any(p.sum(axis=1) > 1.0 + 1e-15):
            raise InputError("noise probabilities must be nonnegative with sum <= 1")
        object.__setattr__(self, "probs", p)

    @classmethod
    def uniform(cls, L: int, px: float, py: float, pz: float) -> "PauliNoiseModel":
        return cls(np.tile([px, py, pz], (L, 1)))

    def site_probs(self, s: int) -> np.ndarray:
        return self.probs[s] if self.probs.shape[0] > 1 else self.probs[0]

    def site_channel(self, s: int) -> np.ndarray:
        return pauli_channel(*self.site_probs(s))

    def is_zero(self) -> bool:
        return not np.any(self.probs)


@dataclass
class BrickworkSpec:
    """A brickwork circuit: layer t (1-based) acts on bonds (b, b+1), b = t-1+offset mod 2.

    ``slots`` maps (t, b) to a 4x4 unitary, a GateEnsemble, or a 16x16
    superoperator.  Missing slots are identity gates.
    """

    L: int
    T: int
    slots: dict
    init: InitialState
    noise: PauliNoiseModel | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.L < 2:
            raise InputError("need L >= 2")
        if self.T < 0:
            raise InputError("need T >= 0")
        if self.init.L != self.L:
            raise InputError("initial state width differs from circuit width")
        valid = {(t, b) for t in range(1, self.T + 1) for b in self.bonds(t)}
        for key, el in self.slots.items():
            if key not in valid:
                raise InputError(f"slot {key} is not a brickwork bond")
            _check_element(el, key)

    def bonds(self, t: int) -> list:
        off = (t - 1 + self.init.first_offset) % 2
        return list(range(off, self.L - 1, 2))

    def element(self, t: int, b: int):
        return self.slots.get((t, b), np.eye(4, dtype=complex))

    def channel(self, t: int, b: int) -> np.ndarray:
        return to_channel(self.element(t, b))


def _check_element(el, key):
    if isinstance(el, GateEnsemble):
        return
    el = np.asarray(el)
    if el.shape == (4, 4):
        check_unitary(el, 1e-12, f"gate at slot {key}")
    elif el.shape != (16, 16):
        raise InputError(f"slot {key} holds an object of shape {el.shape}")


def to_channel(el) -> np.ndarray:
    if isinstance(el, GateEnsemble):
        return average_channel(el)
    el = np.asarray(el, dtype=complex)
    if el.shape == (4, 4):
        return unitary_superop(el)
    return el


def uniform_spec(L, T, make, init, noise=None, meta=None) -> BrickworkSpec:
    """Fill every slot with make(t, b)."""
    probe = BrickworkSpec(L, T, {}, init)
    slots = {(t, b): make(t, b) for t in range(1, T + 1) for b in probe.bonds(t)}
    return BrickworkSpec(L, T, slots, init, noise, meta or {})


def backward_cone(spec: BrickworkSpec, sites) -> tuple[list, list, dict]:
    """Gates in the backward light cone of `sites`.

    Returns (sites at time 0 sorted, list of (t, b) in forward order,
    {t: sorted sites alive right after layer t}).
    """
    cur = set(int(s) for s in sites)
    gates = []
    alive = {}
    for t in range(spec.T, 0, -1):
        alive[t] = sorted(cur)
        for b in spec.bonds(t):
            if b in cur or b + 1 in cur:
                gates.append((t, b))
        for (tt, b) in gates:
            if tt == t:
                cur.update((b, b + 1))
    gates.sort()
    return sorted(cur), gates, alive


PAULI_MATS = PAULIS
