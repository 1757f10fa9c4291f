"""Finite gate ensembles whose averages are space-time channels."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InputError
from .kak import KakForm, kak_compose, kak_decompose, reflect
from .pauli import PAULIS, check_unitary, random_unitary, unitary_superop

PROB_TOL = 1e-12


@dataclass(frozen=True)
class DressedGate:
    """sigma_post . U . sigma_pre, with one Pauli index per qubit on each side."""

    pre: tuple
    gate: np.ndarray
    post: tuple

    def matrix(self) -> np.ndarray:
        pre = np.kron(PAULIS[self.pre[0]], PAULIS[self.pre[1]])
        post = np.kron(PAULIS[self.post[0]], PAULIS[self.post[1]])
        return post @ self.gate @ pre


@dataclass
class GateEnsemble:
    probs: np.ndarray
    members: list
    labels: list = field(default_factory=list)

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        mats = []
        for m in self.members:
            mats.append(m.matrix() if isinstance(m, DressedGate) else np.asarray(m, dtype=complex))
        self.members = mats
        if not self.labels:
            self.labels = [str(k) for k in range(len(mats))]
        validate(self)

    def __len__(self):
        return len(self.members)

    def sample(self, rng: np.random.Generator) -> int:
        return int(rng.choice(len(self.members), p=self.probs))


def validate(e: GateEnsemble) -> None:
    if len(e.members) == 0 or len(e.members) != e.probs.size:
        raise InputError("ensemble needs one probability per member")
    if np.any(e.probs < 0):
        raise InputError("ensemble probabilities must be nonnegative")
    if abs(e.probs.sum() - 1.0) > PROB_TOL:
        raise InputError(f"ensemble probabilities sum to {e.probs.sum()!r}")
    for k, m in enumerate(e.members):
        check_unitary(m, 1e-12, f"ensemble member {k}")


def single(u: np.ndarray) -> GateEnsemble:
    return GateEnsemble(np.ones(1), [check_unitary(u)], ["gate"])


def average_channel(e: GateEnsemble) -> np.ndarray:
    return sum(p * unitary_superop(m) for p, m in zip(e.probs, e.members))


def reflection_from_kak(form: KakForm) -> GateEnsemble:
    """Four reflected copies (pi/4 +- dx, pi/4 +- dy, tz) sharing the locals of form."""
    members, labels = [], []
    for sx, sy, lab in ((1, 1, "++"), (1, -1, "+-"), (-1, 1, "-+"), (-1, -1, "--")):
        members.append(kak_compose(replace(form, theta=reflect(form.theta, sx, sy))))
        labels.append(lab)
    return GateEnsemble(np.full(4, 0.25), members, labels)


def reflection_ensemble(u: np.ndarray) -> GateEnsemble:
    return reflection_from_kak(kak_decompose(u))


_NONTRIV = (1, 2, 3)


def _s4_members(u):
    # pre = (g1, 1), post = (1, d2): keeps the left transfer matrix
    return [DressedGate((g, 0), u, (0, d)) for g in _NONTRIV for d in _NONTRIV]


def _s5_members(u):
    # pre = (1, g2), post = (d1, 1): keeps the right transfer matrix
    return [DressedGate((0, g), u, (d, 0)) for g in _NONTRIV for d in _NONTRIV]


def twirl_4way(u: np.ndarray, lam: float = 1.0) -> GateEnsemble:
    if not (0.0 <= lam <= 1.0):
        raise InputError(f"lambda must lie in [0, 1], got {lam!r}")
    u = check_unitary(u)
    members = [u]
    probs = [0.25]
    labels = ["id"]
    for weight, group, tag in ((1.0 - lam, _s4_members(u), "L"), (lam, _s5_members(u), "R")):
        if weight == 0.0:
            continue
        for dg in group:
            members.append(dg)
            probs.append(weight / 12.0)
            labels.append(f"{tag}:{dg.pre}{dg.post}")
    return GateEnsemble(np.array(probs), members, labels)


def twirl_3way(u: np.ndarray, leg: str = "first") -> GateEnsemble:
    """Depolarize one output qubit by a uniform Pauli after the gate.

    leg='first' depolarizes the left output and yields a right space-unital
    average, the orientation needed by the right-moving schemes.
    """
    u = check_unitary(u)
    if leg not in ("first", "second"):
        raise InputError(f"leg must be 'first' or 'second', got {leg!r}")
    members = []
    for a in range(4):
        post = (a, 0) if leg == "first" else (0, a)
        members.append(DressedGate((0, 0), u, post))
    return GateEnsemble(np.full(4, 0.25), members, ["I", "X", "Y", "Z"])


def dressing_ensemble(u: np.ndarray, dist: dict, tol: float = 1e-12) -> GateEnsemble:
    """Ensemble from a distribution over Pauli dressings {(g1, g2, d1, d2): p}."""
    u = check_unitary(u)
    members, probs, labels = [], [], []
    for key in sorted(dist):
        p = float(dist[key])
        if p <= tol:
            continue
        g1, g2, d1, d2 = key
        members.append(DressedGate((g1, g2), u, (d1, d2)))
        probs.append(p)
        labels.append("".join("IXYZ"[k] for k in key))
    probs = np.array(probs)
    probs = probs / probs.sum()
    return GateEnsemble(probs, members, labels)


def haar_ensemble(n: int, rng: np.random.Generator) -> GateEnsemble:
    return GateEnsemble(np.full(n, 1.0 / n), [random_unitary(4, rng) for _ in range(n)])
