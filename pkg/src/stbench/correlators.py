"""Classical evaluation of averaged correlators by transfer-matrix contraction.

Four schemes are provided: single-site (plus/Bell initial state), two-body at
distance 2T+1 (Bell-pair product), three-site, and a general k-body light-ray
window.  Every scheme accepts an optional single-site Pauli noise model
applied after each layer; the reduced noise channel is inserted after each
transfer object, which is exact because Pauli-diagonal noise is unital and
trace preserving.

Site and layer conventions follow ``stbench.circuit``: layer t acts on bonds
(b, b+1) with b = t - 1 + offset (mod 2), where the Bell pairs of the
``bell_product`` state occupy the layer-0 bonds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import BrickworkSpec, Observable
from .errors import InputError, PreconditionError
from .pauli import BELL, X, fold2, superop_to_ptm
from .spacetime import (
    boundary_maps,
    classify,
    split_right_input,
    trace_left_output,
    transfer,
    two_site_transfer,
)

K_CAP = 6
_VEC_ONE = np.array([1, 0, 0, 1], dtype=complex)  # vec(1): per-site trace
_VEC_HALF = _VEC_ONE / 2  # vec(1/2): maximally mixed site
_BELL_PAIR = np.outer(np.array([1, 0, 0, 1]), np.array([1, 0, 0, 1])).astype(complex) / 2


@dataclass(frozen=True)
class CorrelatorRecord:
    scheme: str
    sites: tuple
    T: int
    value: float


def _folded_pair(rho4: np.ndarray) -> np.ndarray:
    """4x4 two-site density matrix -> per-site folded vector of length 16."""
    return rho4.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(16)


def _folded_obs(o: np.ndarray, k: int) -> np.ndarray:
    """Covector c with Tr(O rho) = c . folded(rho) for a k-site operator O."""
    ot = np.asarray(o, dtype=complex).T
    t = ot.reshape((2,) * (2 * k))
    perm = [ax for s in range(k) for ax in (s, k + s)]
    return t.transpose(perm).reshape(4**k)


_BELL_FOLDED = _folded_pair(_BELL_PAIR)


def _noise(spec: BrickworkSpec, s: int) -> np.ndarray | None:
    if spec.noise is None or spec.noise.is_zero():
        return None
    return spec.noise.site_channel(s)


def _with_noise(m: np.ndarray, spec: BrickworkSpec, s: int) -> np.ndarray:
    n = _noise(spec, s)
    return m if n is None else n @ m


_CLASS_FLAGS = {
    "right": ("tp", "unital", "right_space_unital"),
    "4-way": ("tp", "unital", "left_space_unital", "right_space_unital"),
}


def require_class(spec: BrickworkSpec, need: str, tol: float = 1e-10, slots=None) -> None:
    keys = slots if slots is not None else [(t, b) for t in range(1, spec.T + 1) for b in spec.bonds(t)]
    for key in keys:
        c = classify(spec.channel(*key), tol)
        missing = [f for f in _CLASS_FLAGS[need] if not getattr(c, f)]
        if missing:
            raise PreconditionError(
                f"slot (layer {key[0]}, bond {key[1]}-{key[1] + 1}) is not {need}: "
                f"fails {', '.join(missing)} (max residual {c.max_residual:.2e})"
            )


def _traceless_single(o: Observable, what: str) -> np.ndarray:
    if len(o.sites) != 1:
        raise InputError(f"{what} must be a single-site observable")
    if not o.is_traceless():
        raise PreconditionError(f"{what} must be traceless")
    return o.matrix


def _initial_expect(spec: BrickworkSpec, obs: Observable) -> float:
    """Tr(O rho_0) for T = 0, evaluated block by block on the product state."""
    from .simulator import evolve_exact_average

    return float(evolve_exact_average(spec, [obs])[0])


# ---------------------------------------------------------------------------
# single site


def single_site_valid(L: int, T: int, leftover_mixed: bool) -> bool:
    return 2 * T <= L if leftover_mixed else 2 * T + 1 <= L


def avg_single_site(spec: BrickworkSpec, obs: Observable, tol: float = 1e-10) -> float:
    """<O at x> for the plus/Bell state: (1/2) Tr(O M+_T ... M+_1 (sigma_X)) if x = T, else 0."""
    if spec.init.kind != "plus_bell":
        raise PreconditionError("single-site scheme needs the plus_bell initial state")
    o = _traceless_single(obs, "single-site observable")
    x = obs.sites[0]
    L, T = spec.L, spec.T
    if not 0 <= x < L:
        raise InputError(f"site {x} outside 0..{L - 1}")
    if T == 0:
        return _initial_expect(spec, obs)
    if not single_site_valid(L, T, L % 2 == 0):
        raise PreconditionError(f"single-site scheme needs 2T <= L (2T+1 <= L for odd L); got L={L}, T={T}")
    require_class(spec, "right", tol)
    if x != T:
        # away from the open right edge the light-ray window is fully mixed
        if not _is_four_way(spec, tol):
            a0, m = _window_plan(spec, (x,))
            if not k_body_valid(spec, a0, m):
                raise PreconditionError(
                    f"site {x} is too close to the right edge for T={T}, L={L} "
                    "to guarantee a vanishing value with 3-way channels"
                )
        return 0.0
    v = X.reshape(-1).astype(complex)
    for k in range(1, T + 1):
        m = transfer(spec.channel(k, k - 1), "plus")
        v = _with_noise(m, spec, k) @ v
    return float(np.real(0.5 * (o.T.reshape(-1) @ v)))


# ---------------------------------------------------------------------------
# two body


def two_body_valid(L: int, T: int, i: int, j: int, left_free: bool = False, right_free: bool = False) -> bool:
    return (left_free or i >= T) and (right_free or j <= L - 1 - T)


# PTM masks of entries coupling exactly one identity leg across the gate:
# "right" pairs (in-right, out-left), "left" pairs (in-left, out-right)
_IDX4 = np.array([(a1, a2, b1, b2) for a1 in range(4) for a2 in range(4) for b1 in range(4) for b2 in range(4)])
_EDGE_MASK = {
    "right": ((_IDX4[:, 1] == 0) != (_IDX4[:, 2] == 0)).reshape(16, 16).T,
    "left": ((_IDX4[:, 0] == 0) != (_IDX4[:, 3] == 0)).reshape(16, 16).T,
}


def edge_decoupled(spec: BrickworkSpec, side: str, tol: float = 1e-10) -> bool:
    """True if every channel kills the PTM entries that leak through an open edge on `side`.

    The two-body chain then stays exact when its light cone touches that edge;
    the 4-way twirl at lambda = 1 (right) or lambda = 0 (left) has this form.
    """
    for t in range(1, spec.T + 1):
        for b in spec.bonds(t):
            if np.abs(superop_to_ptm(spec.channel(t, b))[_EDGE_MASK[side]]).max() > tol:
                return False
    return True


def _is_four_way(spec: BrickworkSpec, tol: float) -> bool:
    try:
        require_class(spec, "4-way", tol)
    except PreconditionError:
        return False
    return True


def avg_two_body(spec: BrickworkSpec, a: Observable, b: Observable, tol: float = 1e-10) -> float:
    """<a_i b_j> for the Bell-pair state: nonzero only for j = i + 2T + 1 with i + T even."""
    if spec.init.kind != "bell_product":
        raise PreconditionError("two-body scheme needs the bell_product initial state")
    oa = _traceless_single(a, "left observable")
    ob = _traceless_single(b, "right observable")
    i, j = a.sites[0], b.sites[0]
    L, T = spec.L, spec.T
    if not (0 <= i < j < L):
        raise InputError(f"need 0 <= i < j < L, got i={i}, j={j}")
    if T == 0:
        from .circuit import product_observable

        return _initial_expect(spec, product_observable((i, j), (oa, ob)))
    require_class(spec, "4-way", tol)
    left_free = i < T and edge_decoupled(spec, "left", tol)
    right_free = j > L - 1 - T and edge_decoupled(spec, "right", tol)
    if not two_body_valid(L, T, i, j, left_free, right_free):
        raise PreconditionError(
            f"pair ({i}, {j}) needs i >= T and j <= L-1-T (T={T}, L={L}) to stay clear of the open boundary, "
            "unless the channels decouple that edge"
        )
    if j - i != 2 * T + 1 or (i + T) % 2:
        return 0.0
    p = i + T
    v = _BELL_FOLDED.reshape(4, 4)
    for k in range(1, T + 1):
        mm = _with_noise(transfer(spec.channel(k, p - k), "minus"), spec, p - k)
        mp = _with_noise(transfer(spec.channel(k, p + k), "plus"), spec, p + k + 1)
        v = mm @ v @ mp.T
    val = oa.T.reshape(-1) @ v @ ob.T.reshape(-1)
    return float(np.real(val))


# ---------------------------------------------------------------------------
# three site


def three_site_valid(L: int, T: int, p: int) -> bool:
    return p >= 0 and p % 2 == 0 and p + 2 * T + 2 <= L


def avg_three_site(spec: BrickworkSpec, obs: Observable, tol: float = 1e-10) -> float:
    """<O on (i, i+1, i+2)> via (1 x E_L) prod M+^2 (M_R x 1) on the Bell pair (i-T+1, i-T+2)."""
    if spec.init.kind != "bell_product":
        raise PreconditionError("three-site scheme needs the bell_product initial state")
    i = obs.sites[0]
    if tuple(obs.sites) != (i, i + 1, i + 2):
        raise InputError("three-site observable must sit on consecutive sites (i, i+1, i+2)")
    if not obs.is_traceless():
        raise PreconditionError("three-site observable must be traceless")
    L, T = spec.L, spec.T
    if T == 0:
        return _initial_expect(spec, obs)
    p = i - T + 1
    if not three_site_valid(L, T, p):
        raise PreconditionError(
            f"three-site window at i={i} is incompatible with T={T}, L={L} "
            "(needs i-T+1 even, >= 0, and i+T+3 <= L)"
        )
    require_class(spec, "right", tol)

    def noisy_split(t, s):
        # E-hat of layer t on (s, s+1), then noise on both outputs
        m = split_right_input(spec.channel(t, s))
        n1, n2 = _noise(spec, s), _noise(spec, s + 1)
        if n1 is not None:
            m = np.kron(n1, n2) @ m
        return m

    def noisy_merge(t, s):
        # layer-t gate on (s, s+1) with its left output traced, noise on s+1
        return _with_noise(trace_left_output(spec.channel(t, s)), spec, s + 1)

    if p > 0:
        m_r = boundary_maps(spec.channel(1, p - 1), spec.channel(T, p + T)).m_r
        m_r = _with_noise(m_r, spec, p)
    else:
        m_r = np.eye(4, dtype=complex)  # nothing acts on site 0 in layer 1
        m_r = _with_noise(m_r, spec, p)
    tau = np.kron(m_r, np.eye(4)) @ _BELL_FOLDED
    for t in range(1, T):
        split = noisy_split(t, p + t).reshape(4, 4, 4)
        merge = noisy_merge(t + 1, p + t - 1).reshape(4, 4, 4)
        m2 = np.einsum("xay,ycb->xcab", merge, split).reshape(16, 16)
        tau = m2 @ tau
    e_l = noisy_split(T, p + T)
    out = np.kron(np.eye(4), e_l) @ tau
    return float(np.real(_folded_obs(obs.matrix, 3) @ out))


def avg_three_site_plain(spec: BrickworkSpec, obs: Observable) -> float:
    """Noiseless three-site value assembled from two_site_transfer and boundary_maps."""
    i = obs.sites[0]
    T = spec.T
    p = i - T + 1
    bm = boundary_maps(spec.channel(1, p - 1) if p > 0 else identity_channel(), spec.channel(T, p + T))
    tau = np.kron(bm.m_r, np.eye(4)) @ _BELL_FOLDED
    for t in range(1, T):
        tau = two_site_transfer(spec.channel(t + 1, p + t - 1), spec.channel(t, p + t)) @ tau
    out = np.kron(np.eye(4), bm.e_l) @ tau
    return float(np.real(_folded_obs(obs.matrix, 3) @ out))


def identity_channel() -> np.ndarray:
    """Identity two-qubit superoperator (used for absent boundary gates)."""
    return np.eye(16, dtype=complex)


# ---------------------------------------------------------------------------
# k body window


def _window_plan(spec: BrickworkSpec, sites: tuple) -> tuple[int, int]:
    """Choose (a0, m): initial window start and odd window width covering sites."""
    k = len(sites)
    i = sites[0]
    T = spec.T
    off = spec.init.first_offset
    cands = []
    if k % 2:
        cands = [(i, k), (i - 1, k + 2)]
    else:
        cands = [(i, k + 1), (i - 1, k + 1)]
    for f, m in cands:
        a0 = f - T
        if (a0 - off) % 2 == 0:
            return a0, m
    raise AssertionError("unreachable: one candidate always has the right parity")


def k_body_valid(spec: BrickworkSpec, a0: int, m: int) -> bool:
    L, T = spec.L, spec.T
    if spec.init.kind == "bell_product":
        return a0 + m + 2 * T <= L
    if spec.init.kind == "plus_bell":
        # the spare last site of an even-width chain is maximally mixed
        return a0 + m + 2 * T <= (L + 1 if L % 2 == 0 else L)
    return False


def _initial_window(spec: BrickworkSpec, a0: int, m: int) -> np.ndarray:
    """Folded initial state on sites a0..a0+m-1 (virtual sites < 0 are maximally mixed)."""
    lo, hi = a0, a0 + m - 1
    vec = np.ones(1, dtype=complex)
    s = lo
    blocks = {sites[0]: (sites, dm) for sites, _, dm in spec.init.blocks()}
    owner = {}
    for sites, dm in blocks.values():
        for x in sites:
            owner[x] = (sites, dm)
    while s <= hi:
        if s < 0:
            vec = np.kron(vec, _VEC_HALF)
            s += 1
            continue
        sites, dm = owner[s]
        if len(sites) == 1:
            vec = np.kron(vec, dm.reshape(-1))
            s += 1
        elif sites[0] == s and sites[1] <= hi:
            vec = np.kron(vec, _folded_pair(dm))
            s += 2
        else:
            vec = np.kron(vec, _VEC_HALF)
            s += 1
    return vec


def _apply_pair(w: np.ndarray, f: np.ndarray, pos: int, width: int) -> np.ndarray:
    t = w.reshape((4,) * width)
    t = np.tensordot(f, t, axes=([2, 3], [pos, pos + 1]))
    t = np.moveaxis(t, [0, 1], [pos, pos + 1])
    return t.reshape(-1)


def _apply_site(w: np.ndarray, m: np.ndarray, pos: int, width: int) -> np.ndarray:
    t = w.reshape((4,) * width)
    t = np.tensordot(m, t, axes=([1], [pos]))
    t = np.moveaxis(t, 0, pos)
    return t.reshape(-1)


def avg_k_body(spec: BrickworkSpec, obs: Observable, tol: float = 1e-10) -> float:
    """k-site contiguous correlator by propagating a light-ray window of odd width.

    The window moves right by one site per layer: the incoming right site is
    fed with 1/2 (right space unitality), the gates inside the window are
    applied, and the leftmost site is traced out (trace preservation).
    """
    sites = tuple(obs.sites)
    k = len(sites)
    if k > K_CAP:
        raise InputError(f"k-body scheme supports k <= {K_CAP}, got k={k}")
    if sites != tuple(range(sites[0], sites[0] + k)):
        raise InputError("k-body observable must sit on consecutive sites")
    if not obs.is_traceless():
        raise PreconditionError("k-body observable must be traceless")
    if spec.init.kind not in ("bell_product", "plus_bell"):
        raise PreconditionError("k-body scheme needs the bell_product or plus_bell initial state")
    L, T = spec.L, spec.T
    if T == 0:
        return _initial_expect(spec, obs)
    a0, m = _window_plan(spec, sites)
    if not k_body_valid(spec, a0, m):
        raise PreconditionError(f"window of width {m} for sites {sites} does not fit T={T}, L={L}")
    require_class(spec, "right", tol)
    w = _initial_window(spec, a0, m)
    for t in range(1, T + 1):
        a = a0 + t - 1
        width = m + 1
        w = np.kron(w, _VEC_HALF)
        bonds = set(spec.bonds(t))
        for pos in range(0, width - 1):
            s = a + pos
            if s >= 0 and s in bonds and s + 1 <= L - 1:
                w = _apply_pair(w, fold2(spec.channel(t, s)), pos, width)
        for pos in range(width):
            s = a + pos
            if 0 <= s < L:
                n = _noise(spec, s)
                if n is not None:
                    w = _apply_site(w, n, pos, width)
        w = (_VEC_ONE @ w.reshape(4, -1))
    f = a0 + T
    # embed O into the window (identity on padding sites)
    pad_l = sites[0] - f
    pad_r = m - k - pad_l
    cov = _folded_obs(obs.matrix, k)
    eye = _VEC_ONE
    for _ in range(pad_l):
        cov = np.kron(eye, cov)
    for _ in range(pad_r):
        cov = np.kron(cov, eye)
    return float(np.real(cov @ w))


def evaluate(spec: BrickworkSpec, scheme: str, observables, tol: float = 1e-10) -> float:
    """Dispatch by scheme name (single_site, two_body, three_site, k_body)."""
    if scheme == "single_site":
        return avg_single_site(spec, observables[0], tol)
    if scheme == "two_body":
        return avg_two_body(spec, observables[0], observables[1], tol)
    if scheme == "three_site":
        return avg_three_site(spec, observables[0], tol)
    if scheme == "k_body":
        return avg_k_body(spec, observables[0], tol)
    raise InputError(f"unknown scheme {scheme!r}")


noisy_avg = evaluate
