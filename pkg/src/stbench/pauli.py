"""Dense linear algebra for one- and two-qubit operators and channels.

Conventions used everywhere in the package:

* Vectorization maps ``|m><n|`` to ``|m> (x) |n>``.  For a numpy array this is
  the row-major flattening ``rho.reshape(-1)``, so that
  ``vec(A rho B^dag) = (A (x) B^*) vec(rho)``.
* A superoperator is the ``4^n x 4^n`` matrix ``sum_k K_k (x) K_k^*``.
* Pauli transfer matrices are normalized as
  ``P[b, a] = Tr[sigma_b E(sigma_a)] / 2^n`` so a trace-preserving unital map
  has ``P[0, 0] = 1``.  Pauli strings are indexed with the first qubit as the
  most significant base-4 digit.
* The folded two-qubit tensor ``F[oA, oB, iA, iB]`` regroups the superoperator
  per site; every index is a doubled (ket, bra) pair in ``range(4)``.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import InputError

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.stack([I2, X, Y, Z])
PAULI_LABELS = "IXYZ"

# normalized Bell vector |o> = vec(1/sqrt 2)
BELL = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2.0)

STRUCT_TOL = 1e-10


def pauli(index: int) -> np.ndarray:
    if index not in (0, 1, 2, 3):
        raise InputError(f"Pauli index must be in 0..3, got {index!r}")
    return PAULIS[index].copy()


def pauli_string(indices) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for a in indices:
        out = np.kron(out, pauli(int(a)))
    return out


def commutes(a: int, b: int) -> bool:
    """True when single-qubit Paulis a and b commute."""
    return a == 0 or b == 0 or a == b


def comm_sign(a: int, b: int) -> int:
    """sigma_a sigma_b sigma_a = comm_sign(a, b) * sigma_b."""
    return 1 if commutes(a, b) else -1


def n_qubits_of(dim: int) -> int:
    n = int(round(np.log2(dim)))
    if 2**n != dim or n < 1:
        raise InputError(f"dimension {dim} is not a power of two")
    return n


def vectorize(rho: np.ndarray, n_qubits: int | None = None) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InputError(f"expected a square matrix, got shape {rho.shape}")
    if n_qubits is not None and rho.shape[0] != 2**n_qubits:
        raise InputError(f"matrix of size {rho.shape[0]} is not on {n_qubits} qubits")
    return rho.reshape(-1).copy()


def unvectorize(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise InputError(f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape(d, d).copy()


def is_unitary(u: np.ndarray, tol: float = 1e-12) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    res = u.conj().T @ u - np.eye(u.shape[0])
    return bool(np.linalg.norm(res, 2) <= tol)


def check_unitary(u: np.ndarray, tol: float = 1e-12, what: str = "gate") -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u, tol):
        raise InputError(f"{what} is not unitary within {tol}")
    return u


def unitary_superop(u: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    u = check_unitary(u, tol)
    return np.kron(u, u.conj())


def kraus_superop(kraus) -> np.ndarray:
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    if not kraus:
        raise InputError("empty Kraus list")
    shape = kraus[0].shape
    if len(shape) != 2 or shape[0] != shape[1]:
        raise InputError("Kraus operators must be square")
    if any(k.shape != shape for k in kraus):
        raise InputError("Kraus operators have mismatched shapes")
    return sum(np.kron(k, k.conj()) for k in kraus)


def pauli_basis_matrix(n: int) -> np.ndarray:
    """Columns are vec(sigma_a) for all Pauli strings a on n qubits."""
    cols = [vectorize(pauli_string(a)) for a in itertools.product(range(4), repeat=n)]
    return np.stack(cols, axis=1)


_PB = {1: pauli_basis_matrix(1), 2: pauli_basis_matrix(2)}


def _basis(n: int) -> np.ndarray:
    if n not in _PB:
        _PB[n] = pauli_basis_matrix(n)
    return _PB[n]


def superop_to_ptm(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=complex)
    n = n_qubits_of(int(round(np.sqrt(s.shape[0]))))
    if s.shape != (4**n, 4**n):
        raise InputError(f"superoperator has shape {s.shape}")
    v = _basis(n)
    return (v.conj().T @ s @ v) / 2**n


def ptm_to_superop(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p)
    n = n_qubits_of(int(round(np.sqrt(p.shape[0]))))
    if p.shape != (4**n, 4**n):
        raise InputError(f"PTM has shape {p.shape}")
    v = _basis(n)
    return (v @ p @ v.conj().T) / 2**n


def choi_of(s: np.ndarray) -> np.ndarray:
    """Choi matrix sum_ij |i><j| (x) E(|i><j|), unnormalized (trace 2^n for TP maps)."""
    s = np.asarray(s, dtype=complex)
    d = int(round(np.sqrt(s.shape[0])))
    return s.reshape(d, d, d, d).transpose(2, 0, 3, 1).reshape(d * d, d * d)


def check_cptp(s: np.ndarray, tol: float = STRUCT_TOL) -> dict:
    s = np.asarray(s, dtype=complex)
    d = int(round(np.sqrt(s.shape[0])))
    one = np.eye(d, dtype=complex).reshape(-1)
    choi = choi_of(s)
    herm = 0.5 * (choi + choi.conj().T)
    min_eig = float(np.linalg.eigvalsh(herm).min())
    tp_res = float(np.linalg.norm(one.conj() @ s - one.conj()))
    un_res = float(np.linalg.norm(s @ one - one))
    return {
        "cp": min_eig >= -tol,
        "tp": tp_res <= tol,
        "unital": un_res <= tol,
        "min_choi_eig": min_eig,
        "tp_residual": tp_res,
        "unital_residual": un_res,
    }


def fold2(s: np.ndarray) -> np.ndarray:
    """Two-qubit superoperator -> folded tensor F[oA, oB, iA, iB]."""
    s = np.asarray(s, dtype=complex)
    if s.shape != (16, 16):
        raise InputError(f"expected a 16x16 superoperator, got {s.shape}")
    t = s.reshape(2, 2, 2, 2, 2, 2, 2, 2)
    # (mA mB nA nB | mA' mB' nA' nB') -> (mA nA, mB nB | mA' nA', mB' nB')
    t = t.transpose(0, 2, 1, 3, 4, 6, 5, 7)
    return t.reshape(4, 4, 4, 4)


def unfold2(f: np.ndarray) -> np.ndarray:
    t = np.asarray(f, dtype=complex).reshape(2, 2, 2, 2, 2, 2, 2, 2)
    t = t.transpose(0, 2, 1, 3, 4, 6, 5, 7)
    return t.reshape(16, 16)


def local_superop(s1: np.ndarray, s2: np.ndarray) -> np.ndarray:
    """Superoperator of a product channel E1 (x) E2 in the global vec order."""
    f = np.einsum("ac,bd->abcd", s1, s2)
    return unfold2(f)


def pauli_channel(px: float, py: float, pz: float) -> np.ndarray:
    """Single-qubit Pauli-diagonal channel as a 4x4 superoperator."""
    probs = np.array([1.0 - px - py - pz, px, py, pz])
    if np.any(probs < -1e-15) or probs.sum() > 1.0 + 1e-15:
        raise InputError(f"invalid Pauli probabilities {(px, py, pz)}")
    return sum(p * np.kron(PAULIS[k], PAULIS[k].conj()) for k, p in enumerate(probs))


def depolarizing_superop(n: int = 1) -> np.ndarray:
    """Completely depolarizing channel rho -> Tr(rho) 1/2^n."""
    one = np.eye(2**n, dtype=complex).reshape(-1)
    return np.outer(one, one.conj()) / 2**n


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_su4(rng: np.random.Generator) -> np.ndarray:
    u = random_unitary(4, rng)
    return u / np.linalg.det(u) ** 0.25
