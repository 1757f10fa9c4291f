"""Dense simulation: averaged-channel density-matrix oracle and per-round statevectors.

Both paths restrict the circuit to the backward light cone of the requested
observables.  For the density path this is exact because every slot channel
is trace preserving; for the statevector path Bell partners of cone sites are
kept so that every realization stays pure.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .circuit import BrickworkSpec, Observable, backward_cone, to_channel
from .ensembles import GateEnsemble
from .errors import InputError, ResourceError
from .kernels import apply_circuit2, apply_matrix, backend_name, set_threads
from .pauli import PAULIS

DENSITY_CAP = 12
STATE_CAP = 20


def _relabel(sites_sorted):
    return {s: k for k, s in enumerate(sites_sorted)}


def initial_density(spec: BrickworkSpec, active) -> np.ndarray:
    """Reduced initial density matrix on the sorted active sites."""
    aset = set(active)
    rho = np.ones((1, 1), dtype=complex)
    covered = []
    for sites, _, dm in spec.init.blocks():
        inside = [s for s in sites if s in aset]
        if not inside:
            continue
        if len(inside) == len(sites):
            rho = np.kron(rho, dm)
        else:
            # the partner is traced out; a two-site block only occurs for Bell pairs
            red = dm.reshape(2, 2, 2, 2)
            red = np.einsum("ajbj->ab", red) if inside[0] == sites[0] else np.einsum("jajb->ab", red)
            rho = np.kron(rho, red)
        covered.extend(inside)
    if covered != sorted(covered):
        raise InputError("initial-state blocks must be contiguous and ordered")
    return rho


def _density_expect(vec: np.ndarray, n: int, local: list, obs: Observable) -> complex:
    k = len(local)
    t = vec.reshape((2,) * (2 * n))
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    ket = list(letters[:n])
    bra = list(letters[n:2 * n])
    for q in range(n):
        if q not in local:
            bra[q] = ket[q]
    out = "".join(ket[q] for q in local) + "".join(bra[q] for q in local)
    red = np.einsum("".join(ket + bra) + "->" + out, t).reshape(2**k, 2**k)
    return complex(np.trace(obs.matrix @ red))


def evolve_exact_average(spec: BrickworkSpec, observables=None, backend=None):
    """Oracle: evolve the averaged channels (and noise layers) on a dense density matrix.

    With observables, returns the list of exact expectation values, computed
    on the union of their backward light cones.  Without, returns the full
    density matrix (L <= DENSITY_CAP).
    """
    if observables is None:
        sites = list(range(spec.L))
        active, gates, alive = sites, [(t, b) for t in range(1, spec.T + 1) for b in spec.bonds(t)], {
            t: sites for t in range(1, spec.T + 1)}
    else:
        sites = sorted({s for o in observables for s in o.sites})
        active, gates, alive = backward_cone(spec, sites)
    n = len(active)
    if n > DENSITY_CAP:
        raise ResourceError(f"dense density path limited to {DENSITY_CAP} sites, cone has {n}")
    idx = _relabel(active)
    vec = initial_density(spec, active).reshape(-1).copy()
    nn = 2 * n
    by_layer = {}
    for t, b in gates:
        by_layer.setdefault(t, []).append(b)
    noise_ch = {}
    for t in range(1, spec.T + 1):
        for b in by_layer.get(t, []):
            qa, qb = idx[b], idx[b + 1]
            apply_matrix(vec, spec.channel(t, b), [qa, qb, n + qa, n + qb], nn, backend)
        if spec.noise is not None and not spec.noise.is_zero():
            for s in alive.get(t, []):
                if s not in idx:
                    continue
                if s not in noise_ch:
                    noise_ch[s] = spec.noise.site_channel(s)
                q = idx[s]
                apply_matrix(vec, noise_ch[s], [q, n + q], nn, backend)
    if observables is None:
        d = 2**n
        return vec.reshape(d, d)
    vals = []
    for o in observables:
        vals.append(_density_expect(vec, n, [idx[s] for s in o.sites], o).real)
    return vals


# ---------------------------------------------------------------------------
# statevector realizations


@dataclass
class RoundResult:
    index: int
    choices: dict
    values: np.ndarray
    seed: tuple


@dataclass
class SampleSummary:
    rounds: list
    mean: np.ndarray
    std: np.ndarray
    stderr: np.ndarray
    samples: np.ndarray  # (R, n_obs)

    def histogram(self, k: int = 0):
        """Freedman-Diaconis binned counts of observable k."""
        x = self.samples[:, k]
        if x.size < 2 or np.ptp(x) == 0:
            return np.array([x.size]), np.array([x.min(), x.max()] if x.size else [0.0, 0.0])
        edges = np.histogram_bin_edges(x, bins="fd")
        counts, edges = np.histogram(x, bins=edges)
        return counts, edges


class _Plan:
    """Everything a round needs, fixed once per spec and observable set."""

    def __init__(self, spec: BrickworkSpec, observables):
        sites = sorted({s for o in observables for s in o.sites})
        cone, gates, alive = backward_cone(spec, sites)
        reg = set(cone)
        for s in cone:
            p = spec.init.partner(s)
            if p is not None:
                reg.add(p)
        self.register = sorted(reg)
        self.n = len(self.register)
        if self.n > STATE_CAP:
            raise ResourceError(f"statevector path limited to {STATE_CAP} qubits, need {self.n}")
        self.idx = _relabel(self.register)
        self.gates = gates
        self.alive = alive
        self.spec = spec
        self.observables = observables
        self.blocks = [b for b in spec.init.blocks() if any(s in reg for s in b[0])]
        self.mixed_sites = [b[0][0] for b in self.blocks if b[1] is None]
        for sites, pure, _ in self.blocks:
            if pure is None and len(sites) != 1:
                raise InputError("mixed multi-site initial blocks are not supported")
        self.slot_members = []
        for t, b in gates:
            el = spec.element(t, b)
            if isinstance(el, GateEnsemble):
                self.slot_members.append((el.probs, np.stack(el.members)))
            else:
                el = np.asarray(el)
                if el.shape != (4, 4):
                    raise InputError(f"slot {(t, b)} holds a channel; the statevector path needs unitaries")
                self.slot_members.append((np.ones(1), el[None].astype(complex)))
        self.pairs = np.array([[self.idx[b], self.idx[b + 1]] for t, b in gates], dtype=np.int64).reshape(-1, 2)
        self.layer_of = np.array([t for t, b in gates], dtype=np.int64)
        self.obs_local = [[self.idx[s] for s in o.sites] for o in observables]

    def initial_state(self, basis_bits) -> np.ndarray:
        psi = np.ones(1, dtype=complex)
        k = 0
        for sites, pure, _ in self.blocks:
            if pure is None:
                v = np.zeros(2, dtype=complex)
                v[basis_bits[k]] = 1.0
                k += 1
            else:
                v = pure
            psi = np.kron(psi, v)
        return psi

    def run(self, choices, basis_bits, noise_draws=None, backend=None) -> np.ndarray:
        psi = self.initial_state(basis_bits)
        mats = np.stack([self.slot_members[g][1][c] for g, c in enumerate(choices)]) if choices else np.zeros((0, 4, 4), complex)
        if noise_draws is None:
            apply_circuit2(psi, mats, self.pairs, self.n, backend)
        else:
            for t in range(1, self.spec.T + 1):
                sel = np.nonzero(self.layer_of == t)[0]
                if sel.size:
                    apply_circuit2(psi, mats[sel], self.pairs[sel], self.n, backend)
                for s, a in noise_draws.get(t, []):
                    apply_matrix(psi, PAULIS[a], [self.idx[s]], self.n, backend)
        return psi

    def expectations(self, psi) -> np.ndarray:
        return np.array([state_expect(psi, self.n, loc, o) for loc, o in zip(self.obs_local, self.observables)])


def state_expect(psi: np.ndarray, n: int, local: list, obs: Observable) -> float:
    k = len(local)
    t = psi.reshape((2,) * n)
    t = np.moveaxis(t, local, list(range(k))).reshape(2**k, -1)
    red = t @ t.conj().T
    return float(np.real(np.trace(obs.matrix @ red)))


def round_rng(seed: int, r: int) -> np.random.Generator:
    """Independent per-round stream; identical for serial and parallel runs."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(r,))))


def _draw_round(plan: _Plan, rng: np.random.Generator):
    choices = [int(rng.choice(len(p), p=p)) if len(p) > 1 else 0 for p, _ in plan.slot_members]
    bits = [int(rng.integers(2)) for _ in plan.mixed_sites]
    draws = None
    spec = plan.spec
    if spec.noise is not None and not spec.noise.is_zero():
        draws = {}
        reg = set(plan.register)
        for t in range(1, spec.T + 1):
            lst = []
            for s in plan.alive.get(t, []):
                if s not in reg:
                    continue
                px, py, pz = spec.noise.site_probs(s)
                a = int(rng.choice(4, p=[1.0 - px - py - pz, px, py, pz]))
                if a:
                    lst.append((s, a))
            draws[t] = lst
    return choices, bits, draws


def sample_rounds(spec: BrickworkSpec, observables, rounds: int, seed: int,
                  threads: int | None = None, backend: str | None = None, shots: int = 0) -> SampleSummary:
    """Sample `rounds` circuit realizations and record per-round expectation values.

    With shots = 0 the per-round values are exact; otherwise each is a
    finite-shot estimate drawn from that round's state.
    """
    if rounds < 0:
        raise InputError("rounds must be nonnegative")
    if shots < 0:
        raise InputError("shots must be nonnegative")
    plan = _Plan(spec, list(observables))
    backend = backend or backend_name()

    def one(r):
        rng = round_rng(seed, r)
        choices, bits, draws = _draw_round(plan, rng)
        psi = plan.run(choices, bits, draws, backend)
        if shots:
            vals = np.array([_shot_estimate(psi, plan.n, loc, o, shots, shot_rng(seed, r, k))
                             for k, (loc, o) in enumerate(zip(plan.obs_local, plan.observables))])
        else:
            vals = plan.expectations(psi)
        return RoundResult(r, {plan.gates[g]: c for g, c in enumerate(choices)}, vals, (seed, r))

    if threads and threads > 1:
        set_threads(1)
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(one, range(rounds)))
    else:
        results = [one(r) for r in range(rounds)]
    nobs = len(plan.observables)
    samples = np.array([r.values for r in results]).reshape(rounds, nobs)
    if rounds:
        mean = samples.mean(axis=0)
        std = samples.std(axis=0, ddof=1) if rounds > 1 else np.zeros(nobs)
        stderr = std / np.sqrt(rounds)
    else:
        mean = std = stderr = np.full(nobs, np.nan)
    return SampleSummary(results, mean, std, stderr, samples)


def exhaustive_average(spec: BrickworkSpec, observables, max_terms: int = 4**8) -> np.ndarray:
    """Average over every combination of ensemble members (and mixed-site basis states)."""
    plan = _Plan(spec, list(observables))
    sizes = [len(p) for p, _ in plan.slot_members]
    total = int(np.prod(sizes, dtype=np.int64)) * 2 ** len(plan.mixed_sites)
    if total > max_terms:
        raise ResourceError(f"{total} member combinations exceed the cap {max_terms}")
    acc = np.zeros(len(plan.observables))
    for bits in itertools.product(range(2), repeat=len(plan.mixed_sites)):
        wb = 0.5 ** len(bits)
        for combo in itertools.product(*[range(s) for s in sizes]):
            w = wb
            for g, c in enumerate(combo):
                w *= plan.slot_members[g][0][c]
            if w == 0.0:
                continue
            psi = plan.run(list(combo), list(bits))
            acc += w * plan.expectations(psi)
    return acc


def realization_state(spec: BrickworkSpec, observables, seed: int, r: int):
    """State of round r (restricted to the cone register) plus its plan."""
    plan = _Plan(spec, list(observables))
    choices, bits, draws = _draw_round(plan, round_rng(seed, r))
    return plan.run(choices, bits, draws), plan


def _shot_estimate(psi: np.ndarray, n: int, loc: list, observable: Observable, shots: int,
                   rng: np.random.Generator) -> float:
    k = len(loc)
    t = np.moveaxis(psi.reshape((2,) * n), loc, list(range(k))).reshape(2**k, -1)
    red = t @ t.conj().T
    evals, evecs = np.linalg.eigh(observable.matrix)
    probs = np.real(np.einsum("ia,ij,ja->a", evecs.conj(), red, evecs))
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    counts = rng.multinomial(shots, probs)
    return float(counts @ evals / shots)


def shot_rng(seed: int, r: int, k: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(r, 1, k))))


def shot_sample(spec: BrickworkSpec, observable: Observable, r: int, shots: int, seed: int) -> float:
    """Finite-shot estimate of the observable on realization r.

    Measures in the observable's eigenbasis on its support; the estimator is
    the sample mean of eigenvalues, unbiased for the exact value.
    """
    if shots <= 0:
        raise InputError("shots must be positive")
    psi, plan = realization_state(spec, [observable], seed, r)
    return _shot_estimate(psi, plan.n, plan.obs_local[0], observable, shots, shot_rng(seed, r))


def to_channels_spec(spec: BrickworkSpec) -> BrickworkSpec:
    """Copy of spec with every slot replaced by its averaged superoperator."""
    slots = {k: to_channel(v) for k, v in spec.slots.items()}
    return BrickworkSpec(spec.L, spec.T, slots, spec.init, spec.noise, dict(spec.meta))
