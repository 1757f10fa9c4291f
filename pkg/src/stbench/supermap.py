"""Diagonal rescaling supermaps and their realization by Pauli dressings.

A rescaling supermap multiplies the Pauli transfer matrix of a two-qubit
channel entrywise: ``P'[b, a] = x[a, b] P[b, a]`` with ``a = (a1, a2)`` the
input string and ``b = (b1, b2)`` the output string.  Its Choi-type operator

    S = sum_{a,b} x[a,b] (s_a1^T (x) s_a1) (x) (s_a2^T (x) s_a2) (x) (s_b1^T (x) s_b1) (x) (s_b2^T (x) s_b2)

is a sum of commuting operators, diagonal in a product Bell basis.  Its
eigenvalue on the Bell label (g, d) equals ``sum_{a,b} x[a,b] chi_{gd}(a,b)``
where ``chi`` is the +-1 commutation pattern of the Pauli dressing
``sigma_d U sigma_g``.  Positivity of S is therefore the linear condition
``H x >= 0`` with H the symmetric sign matrix, and ``p = H x / 256`` is the
unique Pauli-dressing distribution with ``sum_gd p(g,d) chi_gd = x``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, SolverError
from .pauli import PAULIS, comm_sign, superop_to_ptm, ptm_to_superop, unitary_superop
from .simplex import linprog_bland

IDX = list(itertools.product(range(4), repeat=4))  # (a1, a2, b1, b2) or (g1, g2, d1, d2)

# 4x4 sign table s[g, a] and the 256x256 dressing sign matrix
SIGN = np.array([[comm_sign(g, a) for a in range(4)] for g in range(4)], dtype=float)
H = np.einsum("ae,bf,cg,dh->abcdefgh", SIGN, SIGN, SIGN, SIGN).reshape(256, 256)

RTM = (1, 0, 0, 1)  # in A -> out B: right-moving transfer block
LTM = (0, 1, 1, 0)  # in B -> out A: left-moving transfer block

# pattern classes: 0 = non-identity ("a"), 1 = identity; row/column order of the tables
PATTERNS = [(1, 1), (1, 0), (0, 1), (0, 0)]
PATTERN_NAMES = ["a1a2", "a1 1", "1 a2", "1 1"]


def flat(a1, a2, b1, b2) -> int:
    return ((a1 * 4 + a2) * 4 + b1) * 4 + b2


def dressing_signs(g1: int, g2: int, d1: int, d2: int) -> np.ndarray:
    """x tensor (4,4,4,4) of the dressing sigma_(d1 d2) U sigma_(g1 g2)."""
    return H[:, flat(g1, g2, d1, d2)].reshape(4, 4, 4, 4)


def single_qubit_dressing_sign(pre: int, post: int, a: int, b: int) -> int:
    """Sign picked up by PTM entry (b <- a) under sigma_post . U . sigma_pre."""
    return comm_sign(pre, a) * comm_sign(post, b)


def weights_from_x(x: np.ndarray) -> np.ndarray:
    """Dressing weights p(g, d) (length 256) with H p = x."""
    return H @ np.asarray(x, dtype=float).reshape(256) / 256.0


def x_from_weights(p: np.ndarray) -> np.ndarray:
    return (H @ np.asarray(p, dtype=float).reshape(256)).reshape(4, 4, 4, 4)


def _slot_factor(a: int) -> np.ndarray:
    return np.kron(PAULIS[a].T, PAULIS[a])


_FACTORS = [_slot_factor(a) for a in range(4)]


def assemble_S(x: np.ndarray) -> np.ndarray:
    """Dense 256x256 operator of the supermap."""
    x = np.asarray(x, dtype=float).reshape(4, 4, 4, 4)
    s = np.zeros((256, 256), dtype=complex)
    for (a1, a2, b1, b2) in IDX:
        v = x[a1, a2, b1, b2]
        if v == 0.0:
            continue
        s += v * np.kron(np.kron(_FACTORS[a1], _FACTORS[a2]), np.kron(_FACTORS[b1], _FACTORS[b2]))
    return s


def min_eigenvalue(x: np.ndarray) -> float:
    s = assemble_S(x)
    return float(np.linalg.eigvalsh(0.5 * (s + s.conj().T)).min())


def commutation_check(n_pairs: int = 64, seed: int = 0) -> float:
    """Largest commutator norm among factor pairs and a sample of full operator pairs."""
    worst = 0.0
    for a in range(4):
        for b in range(4):
            fa, fb = _FACTORS[a], _FACTORS[b]
            worst = max(worst, float(np.abs(fa @ fb - fb @ fa).max()))
    rng = np.random.default_rng(seed)
    for _ in range(n_pairs):
        i, j = rng.integers(256, size=2)
        ops = []
        for k in (i, j):
            a1, a2, b1, b2 = IDX[k]
            ops.append(np.kron(np.kron(_FACTORS[a1], _FACTORS[a2]), np.kron(_FACTORS[b1], _FACTORS[b2])))
        worst = max(worst, float(np.abs(ops[0] @ ops[1] - ops[1] @ ops[0]).max()))
    return worst


def validate_x(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.size != 256:
        raise InputError(f"supermap tensor needs 256 entries, got {x.size}")
    x = x.reshape(4, 4, 4, 4)
    if abs(x[0, 0, 0, 0] - 1.0) > 1e-12:
        raise InputError("supermap tensor must have x[1111] = 1")
    return x


def apply_supermap(x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Superoperator whose PTM is x (.) PTM(U), entry (b <- a) scaled by x[a, b]."""
    x = validate_x(x)
    p = superop_to_ptm(unitary_superop(u))
    scale = x.reshape(16, 16).T  # rows b, columns a
    return ptm_to_superop(p * scale)


# ---------------------------------------------------------------------------
# tables


def pattern_of(idx) -> tuple:
    a1, a2, b1, b2 = idx
    return (PATTERNS.index((int(a1 != 0), int(a2 != 0))), PATTERNS.index((int(b1 != 0), int(b2 != 0))))


def symmetrize(x: np.ndarray) -> np.ndarray:
    """4x4 table of class averages; rows are input patterns, columns output patterns."""
    x = np.asarray(x, dtype=float).reshape(4, 4, 4, 4)
    tot = np.zeros((4, 4))
    cnt = np.zeros((4, 4))
    for idx in IDX:
        r, c = pattern_of(idx)
        tot[r, c] += x[idx]
        cnt[r, c] += 1
    return tot / cnt


def expand_table(table: np.ndarray) -> np.ndarray:
    """Inverse of symmetrize for class-constant tensors."""
    table = np.asarray(table, dtype=float)
    x = np.zeros((4, 4, 4, 4))
    for idx in IDX:
        x[idx] = table[pattern_of(idx)]
    return x


def reference_table_3way() -> np.ndarray:
    """Reference 3-way table (rows a1a2, a1 1, 1 a2, 1 1); not positive, kept for comparison."""
    return np.array([[0, 1, 0, 1], [0, 1, 1, 1], [0, 0, 0, 1], [0, 1, 0, 1]], dtype=float)


def reference_table_4way(lam: float) -> np.ndarray:
    """Reference 4-way family; not positive at lam = 0 or 1, kept for comparison."""
    l = float(lam)
    return np.array(
        [
            [1 / 3, (1 - l) / 3, l / 3, 0],
            [l / 3, 0, (1 + 2 * l) / 3, l],
            [(1 - l) / 3, 1 - 2 * l / 3, 0, 1 - l],
            [0, 1 - l, l, 1],
        ]
    )


def twirl3_table() -> np.ndarray:
    """Table realized by depolarizing the left output (right space-unital, keeps M+)."""
    x = np.zeros((4, 4, 4, 4))
    x[:, :, 0, :] = 1.0
    return symmetrize(x)


def twirl4_table(lam: float) -> np.ndarray:
    """Table realized by the 4-way Pauli twirl at parameter lam."""
    return symmetrize(twirl4_x(lam))


def _uniform_dressing_x(keys) -> np.ndarray:
    p = np.zeros(256)
    p[flat(0, 0, 0, 0)] += 0.25
    for k in keys:
        p[flat(*k)] += 0.75 / len(keys)
    return x_from_weights(p)


def twirl4_x(lam: float) -> np.ndarray:
    nt = (1, 2, 3)
    s4 = _uniform_dressing_x([(g, 0, 0, d) for g in nt for d in nt])  # keeps M-
    s5 = _uniform_dressing_x([(0, g, d, 0) for g in nt for d in nt])  # keeps M+
    return (1.0 - lam) * s4 + lam * s5


# ---------------------------------------------------------------------------
# optimization


@dataclass
class SupermapSolution:
    mode: str
    value: float
    x: np.ndarray
    weights: np.ndarray
    min_eig: float
    status: str = "optimal"
    stages: list = field(default_factory=list)

    @property
    def x_rtm(self) -> float:
        return float(self.x[RTM])

    @property
    def x_ltm(self) -> float:
        return float(self.x[LTM])

    def table(self) -> np.ndarray:
        return symmetrize(self.x)

    def distribution(self, tol: float = 1e-12) -> dict:
        return {IDX[k]: float(w) for k, w in enumerate(self.weights) if w > tol}


def _rows(pred):
    return [flat(*i) for i in IDX if pred(*i)]


def constraint_system(mode: str, force_both_unit: bool = False):
    """Equality rows (in x-space) for the supermap programs.

    mode: 'three_way' (right space-unital output, maximize x_RTM),
    'three_way_literal' (the left zero block, maximize x_RTM), or
    'four_way' (both zero blocks, maximize x_RTM + x_LTM).
    """
    nt = range(1, 4)
    rows, rhs = [], []

    def eq(coeffs, value):
        r = np.zeros(256)
        for k, c in coeffs:
            r[k] += c
        rows.append(r)
        rhs.append(value)

    eq([(flat(0, 0, 0, 0), 1.0)], 1.0)
    zero_right = [flat(a, 0, b, 0) for a in nt for b in nt]
    zero_left = [flat(0, a, 0, b) for a in nt for b in nt]
    rtm = [flat(a, 0, 0, b) for a in nt for b in nt]
    ltm = [flat(0, a, b, 0) for a in nt for b in nt]
    if mode == "three_way":
        zeros = zero_right
    elif mode == "three_way_literal":
        zeros = zero_left
    elif mode == "four_way":
        zeros = zero_right + zero_left
    else:
        raise InputError(f"unknown supermap mode {mode!r}")
    for k in zeros:
        eq([(k, 1.0)], 0.0)
    for k in rtm[1:]:
        eq([(k, 1.0), (rtm[0], -1.0)], 0.0)
    objective = np.zeros(256)
    objective[rtm[0]] = 1.0
    if mode == "four_way":
        for k in ltm[1:]:
            eq([(k, 1.0), (ltm[0], -1.0)], 0.0)
        objective[ltm[0]] = 1.0
        if force_both_unit:
            eq([(rtm[0], 1.0)], 1.0)
            eq([(ltm[0], 1.0)], 1.0)
    return np.array(rows), np.array(rhs), objective


def _weight_cost() -> np.ndarray:
    # number of non-identity Paulis in each dressing
    return np.array([sum(1 for v in idx if v) for idx in IDX], dtype=float)


def solve_supermap(mode: str = "four_way", prefer: str | None = None,
                   force_both_unit: bool = False, tol: float = 1e-10) -> SupermapSolution:
    """Maximize the transfer-block rescaling over PSD diagonal supermaps.

    The program is solved over dressing weights p >= 0 (x = H p), which is the
    positivity constraint S >= 0 in its diagonal form.  Ties among optima are
    broken lexicographically: first by `prefer` ('right' maximizes x_RTM,
    'left' maximizes x_LTM), then by the smallest mean dressing weight.
    """
    rows_x, rhs, obj_x = constraint_system(mode, force_both_unit)
    A = rows_x @ H
    c1 = -(obj_x @ H)
    res = linprog_bland(c1, A, rhs, tol)
    stages = [res]
    if res.status == "infeasible":
        raise SolverError(f"{mode} supermap program is infeasible", certificate=res.certificate)
    if res.status != "optimal":
        raise SolverError(f"{mode} supermap program ended with status {res.status}")
    value = -res.objective
    A_cur, b_cur = np.vstack([A, -c1]), np.append(rhs, value)
    extra = []
    if prefer == "right":
        extra.append(-H[flat(*RTM)])
    elif prefer == "left":
        extra.append(-H[flat(*LTM)])
    elif prefer is not None:
        raise InputError(f"prefer must be 'right', 'left' or None, got {prefer!r}")
    extra.append(_weight_cost())
    p = res.x
    for c in extra:
        r = linprog_bland(c, A_cur, b_cur, tol)
        stages.append(r)
        if r.status != "optimal":
            raise SolverError(f"tie-breaking stage ended with status {r.status}")
        p = r.x
        A_cur, b_cur = np.vstack([A_cur, c]), np.append(b_cur, r.objective)
    p = np.where(np.abs(p) < 1e-13, 0.0, p)
    x = x_from_weights(p)
    return SupermapSolution(mode, float(value), x, p, min_eigenvalue(x), "optimal", stages)


def solve_sdp(mode: str) -> tuple[float, np.ndarray]:
    sol = solve_supermap(mode)
    return sol.value, sol.x


@dataclass
class Decomposition:
    feasible: bool
    weights: np.ndarray | None
    certificate: np.ndarray | None
    residual: float

    def distribution(self, tol: float = 1e-12) -> dict:
        if self.weights is None:
            return {}
        return {IDX[k]: float(w) for k, w in enumerate(self.weights) if w > tol}


def lp_decompose(x_target: np.ndarray, tol: float = 1e-10) -> Decomposition:
    """Find p >= 0, sum p = 1, with sum_gd p(g,d) chi_gd = x_target, or a Farkas certificate.

    H^2 = 256 I, so the only candidate is p = H x / 256.  If some p_k < 0 then
    y = -H e_k satisfies H^T y = -256 e_k <= 0 and x . y = -256 p_k > 0.
    """
    x = validate_x(x_target).reshape(256)
    p = H @ x / 256.0
    k = int(np.argmin(p))
    if p[k] < -tol:
        return Decomposition(False, None, -H[:, k].copy(), float("nan"))
    p = np.where(np.abs(p) < 1e-14, 0.0, np.clip(p, 0.0, None))
    return Decomposition(True, p, None, float(np.abs(H @ p - x).max()))


def dressing_members(weights: np.ndarray, tol: float = 1e-12) -> dict:
    return {IDX[k]: float(w) for k, w in enumerate(weights) if w > tol}


def verify_supermap(x: np.ndarray, n_samples: int = 100, seed: int = 0, tol: float = 1e-9) -> dict:
    """Decompose x, build the dressing ensemble for random seeds, and check the output class."""
    from .ensembles import average_channel, dressing_ensemble
    from .pauli import random_unitary
    from .spacetime import classify

    x = validate_x(x)
    dec = lp_decompose(x)
    if not dec.feasible:
        return {"ok": False, "reason": "not a Pauli-dressing mixture", "certificate": dec.certificate}
    dist = dec.distribution()
    rng = np.random.default_rng(seed)
    nt = range(1, 4)
    want_right = all(abs(x[a, 0, b, 0]) < tol for a in nt for b in nt)
    want_left = all(abs(x[0, a, 0, b]) < tol for a in nt for b in nt)
    worst_ptm, worst_class = 0.0, 0.0
    labels = set()
    for _ in range(n_samples):
        u = random_unitary(4, rng)
        avg = average_channel(dressing_ensemble(u, dist))
        worst_ptm = max(worst_ptm, float(np.abs(avg - apply_supermap(x, u)).max()))
        c = classify(avg, tol)
        labels.add(c.label)
        need = ["tp", "unital"]
        if want_right:
            need.append("right")
        if want_left:
            need.append("left")
        worst_class = max(worst_class, max(c.residuals[k] for k in need))
    ok = worst_ptm <= tol and worst_class <= tol
    return {"ok": ok, "ptm_residual": worst_ptm, "class_residual": worst_class,
            "labels": sorted(labels), "distribution": dist}


# ---------------------------------------------------------------------------
# generic path: log-det barrier on the dense operator


def _class_constraints(mode: str, force_both_unit: bool):
    """Fixed class-table entries {(r, c): value} and the objective entries."""
    fixed = {(3, 3): 1.0}
    if mode in ("three_way", "four_way"):
        fixed[(1, 1)] = 0.0
    if mode in ("three_way_literal", "four_way"):
        fixed[(2, 2)] = 0.0
    if mode not in ("three_way", "three_way_literal", "four_way"):
        raise InputError(f"unknown supermap mode {mode!r}")
    obj = [(1, 2)]
    if mode == "four_way":
        obj.append((2, 1))
        if force_both_unit:
            fixed[(1, 2)] = 1.0
            fixed[(2, 1)] = 1.0
    return fixed, obj


def _class_operator(k: int) -> np.ndarray:
    t = np.zeros(16)
    t[k] = 1.0
    s = assemble_S(expand_table(t.reshape(4, 4)))
    return 0.5 * (s + s.conj().T)


def _barrier_max(F0, Fs, c, tol):
    """Maximize c.y subject to F0 + sum_k y_k Fs[k] > 0 from y = 0 (F0 must be positive definite)."""
    n = len(Fs)
    dim = F0.shape[0]
    y = np.zeros(n)

    def F(yy):
        return F0 + np.tensordot(yy, Fs, axes=1)

    mu = 1.0
    while dim * mu > tol:
        for _ in range(100):
            Finv = np.linalg.inv(F(y))
            G = np.array([Finv @ Fk for Fk in Fs])
            grad = c / mu + np.real(np.einsum("kii->k", G))
            Gf = G.reshape(n, -1)
            hess = np.real(Gf @ G.transpose(0, 2, 1).reshape(n, -1).T)
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]
            dec = float(grad @ step)
            a = 1.0
            while True:
                try:
                    np.linalg.cholesky(F(y + a * step))
                    break
                except np.linalg.LinAlgError:
                    a *= 0.5
                    if a < 1e-12:
                        raise SolverError("barrier line search failed")
            if a < 1.0:
                a *= 0.95  # stay strictly inside the cone
            y = y + a * step
            if dec < 1e-12:
                break
        mu *= 0.2
    return y


def solve_sdp_barrier(mode: str = "four_way", force_both_unit: bool = False,
                      tol: float = 1e-8) -> tuple[float, np.ndarray]:
    """Eigenvalue-level SDP over class-symmetric tables, independent of the sign table.

    Restricting to class tables loses nothing: per-slot Clifford conjugation
    permutes X, Y, Z and maps the feasible set onto itself, so the average of
    an optimum over those permutations is again feasible and optimal.
    Infeasibility is detected by a phase that maximizes the smallest
    eigenvalue of S over the affine set; a negative maximum certifies it.
    """
    fixed, obj = _class_constraints(mode, force_both_unit)
    free = [k for k in range(16) if (k // 4, k % 4) not in fixed]
    base = np.zeros(16)
    for (r, c), v in fixed.items():
        base[4 * r + c] = v
    ops = {k: _class_operator(k) for k in range(16)}
    F0 = sum(base[k] * ops[k] for k in range(16) if base[k])
    Fs = np.array([ops[k] for k in free])
    c = np.array([1.0 if (k // 4, k % 4) in obj else 0.0 for k in free])
    lam0 = float(np.linalg.eigvalsh(F0)[0])
    if lam0 <= 1e-9:
        # phase one: maximize s with F(y) - s I > 0, starting from s = lam0 - 1
        eye = np.eye(F0.shape[0])
        s0 = lam0 - 1.0
        Fs1 = np.concatenate([Fs, -eye[None]])
        c1 = np.zeros(len(free) + 1)
        c1[-1] = 1.0
        y1 = _barrier_max(F0 - s0 * eye, Fs1, c1, tol)
        smax = s0 + y1[-1]
        if smax < -tol:
            raise SolverError(f"{mode} program is infeasible: largest attainable smallest eigenvalue {smax:.6f}",
                              certificate=np.array([smax]))
        raise SolverError(f"{mode} program has no strictly feasible point (max min-eigenvalue {smax:.3e})")
    y = _barrier_max(F0, Fs, c, tol)
    t = base.copy()
    t[free] = y
    return float(c @ y), expand_table(t.reshape(4, 4))
