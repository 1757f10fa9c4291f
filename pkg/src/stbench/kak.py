"""Cartan (KAK) decomposition of two-qubit unitaries.

A gate is written as

    U = e^{i phi} (w_a (x) w_b) exp(i sum_a theta_a sigma_a (x) sigma_a) (v_a (x) v_b)

The decomposition goes through the magic basis, where local gates become real
orthogonal matrices and the interaction term is diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InputError
from .pauli import I2, X, Y, Z, check_unitary

# columns: |Phi+>, i|Phi->, i|Psi+>, |Psi->
MAGIC = np.array(
    [
        [1, 1j, 0, 0],
        [0, 0, 1j, 1],
        [0, 0, 1j, -1],
        [1, -1j, 0, 0],
    ],
    dtype=complex,
) / np.sqrt(2)

# eigenvalues of (XX, YY, ZZ) on the magic-basis columns
_LAMBDA = np.array(
    [
        [1, -1, 1],
        [-1, 1, 1],
        [1, 1, -1],
        [-1, -1, -1],
    ],
    dtype=float,
)
# phases = _LAMBDA @ theta + psi  ->  invert the 4x4 system
_PHASE_MAP = np.linalg.inv(np.hstack([_LAMBDA, np.ones((4, 1))]))

_XX = np.kron(X, X)
_YY = np.kron(Y, Y)
_ZZ = np.kron(Z, Z)

_S = np.array([[1, 0], [0, 1j]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_SEED = 0x5A17


@dataclass(frozen=True)
class KakForm:
    w_a: np.ndarray
    w_b: np.ndarray
    v_a: np.ndarray
    v_b: np.ndarray
    theta: tuple
    global_phase: float = 0.0


def interaction(theta) -> np.ndarray:
    """exp(i sum_a theta_a sigma_a (x) sigma_a), evaluated in the magic basis."""
    th = np.asarray(theta, dtype=float)
    phases = _LAMBDA @ th
    return MAGIC @ np.diag(np.exp(1j * phases)) @ MAGIC.conj().T


def kak_compose(k: KakForm) -> np.ndarray:
    left = np.kron(k.w_a, k.w_b)
    right = np.kron(k.v_a, k.v_b)
    return np.exp(1j * k.global_phase) * (left @ interaction(k.theta) @ right)


def local_w(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """W(a, b, c) = exp(i (a X + b Y + c Z)), evaluated in closed form."""
    v = np.array([alpha, beta, gamma], dtype=float)
    r = float(np.linalg.norm(v))
    if r == 0.0:
        return I2.copy()
    n = v / r
    gen = n[0] * X + n[1] * Y + n[2] * Z
    return np.cos(r) * I2 + 1j * np.sin(r) * gen


def split_product(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Factor a 4x4 matrix that is (up to noise) a Kronecker product a (x) b."""
    t = m.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    u, s, vh = np.linalg.svd(t)
    a = (u[:, 0] * np.sqrt(s[0])).reshape(2, 2)
    b = (vh[0, :] * np.sqrt(s[0])).reshape(2, 2)
    # make both factors special unitary, pushing the scalar into b
    da = np.linalg.det(a)
    fa = np.sqrt(da)
    return a / fa, b * fa


def _real_orthogonal_eig(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Diagonalize a complex symmetric unitary m = O diag(d) O^T with real O."""
    re, im = m.real, m.imag
    rng = np.random.default_rng(_SEED)
    for attempt in range(16):
        c = 1.0 if attempt == 0 else rng.uniform(0.5, 2.0)
        _, o = np.linalg.eigh(re + c * im)
        d = np.diag(o.T @ m @ o)
        if np.linalg.norm(o.T @ m @ o - np.diag(d)) < 1e-11:
            return o, d
    # last resort: a random real rotation of the problem
    q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    mm = q.T @ m @ q
    _, o = np.linalg.eigh(mm.real + 0.7 * mm.imag)
    o = q @ o
    return o, np.diag(o.T @ m @ o)


def kak_decompose(u: np.ndarray, canonical: bool = True) -> KakForm:
    u = check_unitary(u, 1e-10, "two-qubit gate")
    if u.shape != (4, 4):
        raise InputError(f"expected a 4x4 unitary, got {u.shape}")
    det = np.linalg.det(u)
    phase0 = np.angle(det) / 4.0
    us = u * np.exp(-1j * phase0)
    up = MAGIC.conj().T @ us @ MAGIC
    o, d2 = _real_orthogonal_eig(up.T @ up)
    if np.linalg.det(o) < 0:
        o[:, 0] *= -1
    phi = np.angle(d2) / 2.0
    k1 = up @ o @ np.diag(np.exp(-1j * phi))
    k1 = k1.real
    if np.linalg.det(k1) < 0:
        k1[:, 0] *= -1
        phi[0] += np.pi
    sol = _PHASE_MAP @ phi
    theta, psi = sol[:3], sol[3]
    left = MAGIC @ k1 @ MAGIC.conj().T
    right = MAGIC @ o.T @ MAGIC.conj().T
    w_a, w_b = split_product(left)
    v_a, v_b = split_product(right)
    form = KakForm(w_a, w_b, v_a, v_b, tuple(float(t) for t in theta), 0.0)
    form = _fix_phase(form, u)
    if canonical:
        form = canonicalize(form.theta, form)
    _ = psi
    return form


def _fix_phase(form: KakForm, target: np.ndarray) -> KakForm:
    rec = kak_compose(replace(form, global_phase=0.0))
    ph = float(np.angle(np.trace(rec.conj().T @ target)))
    return replace(form, global_phase=ph)


def _wrap(t: float) -> tuple[float, int]:
    """Shift t by multiples of pi/2 into (-pi/4, pi/4]; returns (t', shifts)."""
    k = int(np.ceil((t - np.pi / 4) / (np.pi / 2) - 1e-13))
    tw = t - k * np.pi / 2
    if tw <= -np.pi / 4 + 1e-13:
        tw += np.pi / 2
        k -= 1
    return tw, k


def canonicalize(theta, locals_: KakForm | None = None) -> KakForm:
    """Map theta into pi/4 >= tx >= ty >= |tz| while keeping the gate fixed.

    Every move is compensated in the local unitaries or the global phase:
    shifts by pi/2 peel off i sigma (x) sigma, conjugation by local Cliffords
    permutes coordinates and flips pairs of signs.
    """
    if locals_ is None:
        locals_ = KakForm(I2, I2, I2, I2, (0.0, 0.0, 0.0), 0.0)
    th = [float(t) for t in theta]
    w_a, w_b = locals_.w_a.copy(), locals_.w_b.copy()
    v_a, v_b = locals_.v_a.copy(), locals_.v_b.copy()
    phase = locals_.global_phase
    paulis = [X, Y, Z]

    # shifts: N(t) = N(t - k pi/2 e_a) (i sigma_a sigma_a)^k
    for a in range(3):
        th[a], k = _wrap(th[a])
        k4 = k % 4
        if k4 % 2 == 1:
            v_a = paulis[a] @ v_a
            v_b = paulis[a] @ v_b
        phase += k4 * np.pi / 2

    def conj(g):
        # N(t) = (g (x) g)^dag N(t') (g (x) g): absorb into the locals
        nonlocal w_a, w_b, v_a, v_b
        gd = g.conj().T
        w_a, w_b = w_a @ gd, w_b @ gd
        v_a, v_b = g @ v_a, g @ v_b

    # coordinate swaps to sort by |theta| descending
    # S maps (XX, YY, ZZ) -> (YY, XX, ZZ); H maps -> (ZZ, YY, XX); SH-like for (y,z)
    swap_gate = {(0, 1): _S, (0, 2): _H, (1, 2): _H @ _S @ _H}
    for _ in range(3):
        for i, j in ((0, 1), (1, 2), (0, 1)):
            if abs(th[i]) < abs(th[j]) - 1e-15:
                g = swap_gate[(i, j)]
                conj(g)
                th[i], th[j] = th[j], th[i]

    # sign flips of pairs: (Z (x) 1) flips x,y; (Y (x) 1) flips x,z; (X (x) 1) flips y,z
    def flip(g):
        nonlocal w_a, v_a
        w_a = w_a @ g
        v_a = g @ v_a

    if th[0] < 0:
        flip(Y)
        th[0], th[2] = -th[0], -th[2]
    if th[1] < 0:
        flip(X)
        th[1], th[2] = -th[1], -th[2]
    # tx == pi/4 boundary: theta_z sign is a free choice, keep the sign found
    form = KakForm(w_a, w_b, v_a, v_b, tuple(th), float(np.angle(np.exp(1j * phase))))
    return form


def reflect(theta, sx: int, sy: int) -> tuple:
    """Reflect about the dual-unitary line: (pi/4 + sx dx, pi/4 + sy dy, tz)."""
    dx = theta[0] - np.pi / 4
    dy = theta[1] - np.pi / 4
    return (np.pi / 4 + sx * dx, np.pi / 4 + sy * dy, theta[2])


def is_dual_unitary_point(theta, tol: float = 1e-12) -> bool:
    return abs(theta[0] - np.pi / 4) <= tol and abs(theta[1] - np.pi / 4) <= tol


def min_phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """min over phi of ||u - e^{i phi} v|| (Frobenius)."""
    ph = np.angle(np.trace(v.conj().T @ u))
    return float(np.linalg.norm(u - np.exp(1j * ph) * v))


def paulis_xx_yy_zz() -> tuple:
    return _XX, _YY, _ZZ
