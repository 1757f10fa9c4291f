"""Space-time unitality of two-qubit channels and the derived transfer objects.

All contractions act on the folded tensor ``F[oA, oB, iA, iB]`` from
``stbench.pauli.fold2``; site A is the left qubit of the gate and site B the
right one.  Capping a leg with the Bell vector ``|o>`` either feeds the
maximally mixed state (input legs) or takes the normalized partial trace
(output legs).

Right space unitality means capping both B legs leaves the trivial map on A;
left space unitality is the mirror statement.  The right-moving transfer
matrix ``M+`` maps the A input to the B output (``rho -> Tr_A E(rho (x) 1/2)``),
the left-moving ``M-`` maps the B input to the A output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .pauli import BELL, fold2

_TRIVIAL = np.outer(BELL, BELL)
_VEC_HALF = np.array([0.5, 0.0, 0.0, 0.5], dtype=complex)  # vec(1/2)
_VEC_ONE = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex)  # vec(1), i.e. the trace


@dataclass(frozen=True)
class SpaceTimeClass:
    tp: bool
    unital: bool
    left_space_unital: bool
    right_space_unital: bool
    residuals: dict

    @property
    def label(self) -> str:
        if not (self.tp and self.unital):
            return "general"
        if self.left_space_unital and self.right_space_unital:
            return "4-way"
        if self.right_space_unital:
            return "3-way-right"
        if self.left_space_unital:
            return "3-way-left"
        return "general"

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())

    def describe(self) -> str:
        flags = [k for k in ("tp", "unital") if getattr(self, k)]
        if self.left_space_unital:
            flags.append("left-unital")
        if self.right_space_unital:
            flags.append("right-unital")
        head = self.label if self.label != "general" else "+".join(flags) + " only"
        if not flags:
            head = "no space-time property"
        return head


def _folded(e: np.ndarray) -> np.ndarray:
    e = np.asarray(e, dtype=complex)
    if e.shape == (16, 16):
        return fold2(e)
    if e.shape == (4, 4, 4, 4):
        return e
    raise InputError(f"expected a two-qubit superoperator, got shape {e.shape}")


def contractions(e: np.ndarray) -> dict:
    """The four Bell-leg contractions (tp, unital, right, left) in folded form."""
    f = _folded(e)
    b = BELL
    return {
        "tp": np.einsum("abcd,a,b->cd", f, b, b),
        "unital": np.einsum("abcd,c,d->ab", f, b, b),
        "right": np.einsum("abcd,b,d->ac", f, b, b),
        "left": np.einsum("abcd,a,c->bd", f, b, b),
    }


def classify(e: np.ndarray, tol: float = 1e-10) -> SpaceTimeClass:
    c = contractions(e)
    res = {
        "tp": float(np.linalg.norm(c["tp"] - _TRIVIAL)),
        "unital": float(np.linalg.norm(c["unital"] - _TRIVIAL)),
        "left": float(np.linalg.norm(c["left"] - _TRIVIAL)),
        "right": float(np.linalg.norm(c["right"] - _TRIVIAL)),
    }
    return SpaceTimeClass(
        tp=res["tp"] <= tol,
        unital=res["unital"] <= tol,
        left_space_unital=res["left"] <= tol,
        right_space_unital=res["right"] <= tol,
        residuals=res,
    )


def transfer(e: np.ndarray, side: str) -> np.ndarray:
    """Single-qubit transfer matrix (4x4 superoperator) of a two-qubit channel."""
    f = _folded(e)
    b = BELL
    if side == "plus":
        return np.einsum("abcd,a,d->bc", f, b, b)
    if side == "minus":
        return np.einsum("abcd,b,c->ad", f, b, b)
    raise InputError(f"side must be 'plus' or 'minus', got {side!r}")


def split_right_input(e: np.ndarray) -> np.ndarray:
    """E with its B input fed by 1/2: a map from one site (A) to two sites.

    Returned as a (16, 4) matrix, output index oA*4 + oB.
    """
    f = _folded(e)
    return np.einsum("abcd,d->abc", f, _VEC_HALF).reshape(16, 4)


def trace_left_output(e: np.ndarray) -> np.ndarray:
    """E with its A output traced: a map from two sites to one (B), shape (4, 16)."""
    f = _folded(e)
    return np.einsum("abcd,a->bcd", f, _VEC_ONE).reshape(4, 16)


def two_site_transfer(e_left: np.ndarray, e_right: np.ndarray) -> np.ndarray:
    """Two-site right-moving map M+^2 (16x16) on the window (s, s+1) -> (s+1, s+2).

    ``e_right`` acts on (s+1, s+2) with its right input fed by 1/2;
    afterwards ``e_left`` (one layer later) acts on (s, s+1) and its left
    output is traced.  Input index is s*4 + (s+1), output (s+1)*4 + (s+2).
    """
    split = split_right_input(e_right).reshape(4, 4, 4)  # [o_b', o_c, i_b]
    merge = trace_left_output(e_left).reshape(4, 4, 4)  # [o_b'', i_a, i_b']
    m2 = np.einsum("xay,ycb->xcab", merge, split)
    return m2.reshape(16, 16)


@dataclass(frozen=True)
class BoundaryMaps:
    m_r: np.ndarray  # 4x4, acts on the right site of the first-layer gate
    e_l: np.ndarray  # 16x4, last-layer gate fed with 1/2 on its right input


def boundary_maps(e_first: np.ndarray, e_last: np.ndarray) -> BoundaryMaps:
    f = _folded(e_first)
    b = BELL
    m_r = np.einsum("abcd,a,c->bd", f, b, b)
    return BoundaryMaps(m_r=m_r, e_l=split_right_input(e_last))


def second_eigenvalue(m: np.ndarray) -> float:
    """Second-largest eigenvalue modulus of a transfer matrix."""
    ev = np.sort(np.abs(np.linalg.eigvals(np.asarray(m))))[::-1]
    return float(ev[1]) if ev.size > 1 else 0.0
