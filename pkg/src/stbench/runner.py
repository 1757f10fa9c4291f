"""Turn validated configs into circuits, run them, and write CSV reports."""

from __future__ import annotations

import csv
import math
import os
from pathlib import Path

import numpy as np

from . import correlators as co
from . import simulator as sim
from . import supermap as sm
from .circuit import BrickworkSpec, InitialState, Observable, PauliNoiseModel, product_observable, uniform_spec
from .config import CircuitConfig, CorrelatorRow, EnsembleSpec, GateSpec, RunConfig
from .ensembles import dressing_ensemble, reflection_from_kak, reflection_ensemble, single, twirl_3way, twirl_4way
from .errors import InputError, PreconditionError, SolverError
from .experiments import TGateModel, build_fig1_circuit, build_fig2_circuit, fig2_depths, o1_matrix
from .kak import KakForm, kak_compose, local_w
from .kernels import set_threads
from .pauli import X, Y, Z, random_unitary

THREADS_ENV = "STBENCH_THREADS"


def fmt(v) -> str:
    """17 significant digits: round-trips every double exactly."""
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, str):
        return v
    v = float(v)
    if math.isnan(v):
        return "nan"
    return f"{v:.17g}"


def write_csv(path: Path, header: list, rows: list) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def resolve_threads(flag: int | None, cfg_value: int | None) -> int:
    """Flag beats the environment, which beats the config; default 1."""
    if flag is not None:
        return flag
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise InputError(f"{THREADS_ENV} must be a positive integer, got {env!r}") from None
        if n < 1:
            raise InputError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
        return n
    return cfg_value or 1


# ---------------------------------------------------------------------------
# gates and ensembles


def _kak_form(g: GateSpec) -> KakForm:
    lo = g.locals_
    return KakForm(local_w(*lo["w_a"]), local_w(*lo["w_b"]), local_w(*lo["v_a"]), local_w(*lo["v_b"]), g.theta)


def gate_matrix(g: GateSpec, t: int, rng: np.random.Generator) -> np.ndarray:
    if g.type == "kak":
        return kak_compose(_kak_form(g))
    if g.type == "matrix":
        return g.matrix
    if g.type == "tgate":
        return TGateModel(g.phi).gate(g.family)
    if g.type == "haar":
        return random_unitary(4, rng)
    return gate_matrix(g.even if (t - 1) % 2 == 0 else g.odd, t, rng)


def _leaf(g: GateSpec, t: int) -> GateSpec:
    while g.type == "alternating":
        g = g.even if (t - 1) % 2 == 0 else g.odd
    return g


def make_element(g: GateSpec, e: EnsembleSpec, t: int, rng: np.random.Generator):
    u = gate_matrix(g, t, rng)
    s = e.strategy
    if s == "none":
        return single(u)
    if s == "reflection":
        leaf = _leaf(g, t)
        # KAK-specified gates keep their stated coordinates; others are decomposed
        return reflection_from_kak(_kak_form(leaf)) if leaf.type == "kak" else reflection_ensemble(u)
    if s == "twirl4way":
        return twirl_4way(u, e.lam)
    if s == "twirl3way":
        return twirl_3way(u, e.leg)
    dist = e.distribution
    if dist is None:
        dec = sm.lp_decompose(sm.expand_table(e.table))
        if not dec.feasible:
            raise SolverError("custom supermap table is not a Pauli-dressing mixture", certificate=dec.certificate)
        dist = dec.distribution()
    return dressing_ensemble(u, dist)


def build_spec(cc: CircuitConfig) -> BrickworkSpec:
    rng = np.random.default_rng(cc.gate_seed)
    noise = PauliNoiseModel.uniform(cc.L, *cc.noise) if cc.noise else None
    return uniform_spec(cc.L, cc.T, lambda t, b: make_element(cc.gate, cc.ensemble, t, rng),
                        InitialState(cc.init, cc.L), noise)


_OPS = {"X": X, "Y": Y, "Z": Z}


def op_matrix(op) -> np.ndarray:
    if isinstance(op, str):
        return o1_matrix() if op == "O1" else _OPS[op]
    nx, ny, nz = op
    return nx * X + ny * Y + nz * Z


def row_observables(row: CorrelatorRow) -> tuple[list, Observable]:
    """Observables handed to the correlator scheme, and the joint one for sampling."""
    singles = [Observable((s,), op_matrix(o)) for s, o in zip(row.sites, row.ops)]
    joint = product_observable(row.sites, [o.matrix for o in singles])
    if row.scheme == "two_body":
        return singles, joint
    if row.scheme == "single_site":
        return singles, singles[0]
    order = np.argsort(row.sites)
    joint = product_observable([row.sites[i] for i in order], [singles[i].matrix for i in order])
    return [joint], joint


# ---------------------------------------------------------------------------
# experiments


BENCH_HEADER = ["scheme", "sites", "T", "classical_value", "sampled_mean", "sampled_std", "n_rounds", "n_shots",
                "seed", "status"]


def run_benchmark(cfg: RunConfig, out: Path, threads: int) -> tuple[Path, int]:
    """One CSV row per correlator; returns (path, number of precondition failures)."""
    spec = build_spec(cfg.circuit)
    rows, failures = [], 0
    for row in cfg.correlators:
        obs, joint = row_observables(row)
        sites = " ".join(str(s) for s in row.sites)
        try:
            value = co.evaluate(spec, row.scheme, obs, cfg.tol)
            status = "ok"
        except PreconditionError as exc:
            value, status = None, f"precondition: {exc}"
            failures += 1
        mean = std = None
        if cfg.rounds:
            s = sim.sample_rounds(spec, [joint], cfg.rounds, cfg.seed, threads, shots=cfg.shots)
            mean, std = s.mean[0], s.std[0]
        rows.append([row.scheme, sites, spec.T, value, mean, std, cfg.rounds, cfg.shots, cfg.seed, status])
    path = out / f"{cfg.name}.csv"
    write_csv(path, BENCH_HEADER, rows)
    return path, failures


def fig1_grid(f: dict) -> np.ndarray:
    n = f["phi_points"]
    return np.linspace(f["phi_min"], f["phi_max"], n) if n > 1 else np.array([f["phi_min"]])


def run_fig1(cfg: RunConfig, out: Path, threads: int) -> Path:
    f = cfg.fig1
    rows = []
    phis = list(fig1_grid(f))
    if cfg.rounds and not any(p == f["mc_phi"] for p in phis):
        phis.append(f["mc_phi"])
    for phi in phis:
        spec, obs = build_fig1_circuit(f["family"], phi, f["T"], f["L"])
        classical = co.avg_single_site(spec, obs, cfg.tol)
        oracle = sim.evolve_exact_average(spec, [obs])[0] if spec.L <= sim.DENSITY_CAP else None
        mean = std = stderr = None
        if cfg.rounds and phi == f["mc_phi"]:
            s = sim.sample_rounds(spec, [obs], cfg.rounds, cfg.seed, threads, shots=cfg.shots)
            mean, std, stderr = s.mean[0], s.std[0], s.stderr[0]
        rows.append([f["family"], phi, classical, oracle, mean, std, stderr, cfg.rounds if mean is not None else 0,
                     cfg.seed])
    path = out / f"{cfg.name}.csv"
    write_csv(path, ["family", "phi", "classical_value", "oracle_value", "sampled_mean", "sampled_std",
                     "sampled_stderr", "n_rounds", "seed"], rows)
    return path


def fig2_depth(T: int, rounds: int, seed: int, threads: int, l_cap: int = 20, shots: int = 0):
    """Classical value at x = T and sampled statistics at x = T and x = T - 1."""
    spec = build_fig2_circuit(T, min(2 * T + 2, l_cap))
    o1 = o1_matrix()
    at_t, before = Observable((T,), o1), Observable((T - 1,), o1)
    classical = co.avg_single_site(spec, at_t)
    s = sim.sample_rounds(spec, [at_t, before], rounds, seed, threads, shots=shots)
    return spec, classical, s


def run_fig2(cfg: RunConfig, out: Path, threads: int) -> list:
    f = cfg.fig2
    if cfg.rounds < 2:
        raise InputError("fig2 needs at least two rounds per depth")
    summary, raw, hist = [], [], []
    for T in fig2_depths(f["t_min"], f["t_max"], f["l_cap"]):
        spec, classical, s = fig2_depth(T, cfg.rounds, cfg.seed, threads, f["l_cap"], cfg.shots)
        summary.append([T, spec.L, classical, s.mean[0], s.std[0], s.stderr[0], s.mean[1], s.std[1], s.stderr[1],
                        cfg.rounds, cfg.seed])
        for r in range(cfg.rounds):
            raw.append([T, r, s.samples[r, 0], s.samples[r, 1]])
        if T in f["histogram_depths"]:
            counts, edges = s.histogram(0)
            for k, cnt in enumerate(counts):
                hist.append([T, edges[k], edges[k + 1], int(cnt)])
    paths = [out / f"{cfg.name}.csv", out / f"{cfg.name}_samples.csv"]
    write_csv(paths[0], ["T", "L", "classical_at_T", "mean_at_T", "std_at_T", "stderr_at_T", "mean_at_Tminus1",
                         "std_at_Tminus1", "stderr_at_Tminus1", "n_rounds", "seed"], summary)
    write_csv(paths[1], ["T", "round", "value_at_T", "value_at_Tminus1"], raw)
    if hist:
        paths.append(out / f"{cfg.name}_histogram.csv")
        write_csv(paths[-1], ["T", "bin_lo", "bin_hi", "count"], hist)
    return paths


def _label(idx) -> str:
    return "".join("IXYZ"[k] for k in idx)


def _write_solution(out: Path, stem: str, x: np.ndarray, mode: str) -> list:
    x = np.asarray(x).reshape(4, 4, 4, 4)
    p_x = out / f"{stem}_x.csv"
    write_csv(p_x, ["in", "out", "x"], [[_label(i[:2]), _label(i[2:]), x[i]] for i in sm.IDX])
    table = sm.symmetrize(x)
    p_t = out / f"{stem}_table.csv"
    write_csv(p_t, ["in_pattern"] + sm.PATTERN_NAMES,
              [[sm.PATTERN_NAMES[r]] + list(table[r]) for r in range(4)])
    dec = sm.lp_decompose(x)
    p_d = out / f"{stem}_distribution.csv"
    if dec.feasible:
        write_csv(p_d, ["dressing", "weight"], [[_label(k), w] for k, w in sorted(dec.distribution().items())])
    else:
        write_csv(p_d, ["constraint", "certificate"], [[k, v] for k, v in enumerate(dec.certificate)])
    return [p_x, p_t, p_d]


def run_supermap(cfg: RunConfig, out: Path) -> tuple[list, list]:
    """Returns (written paths, report lines); raises SolverError on infeasibility."""
    d = cfg.supermap
    mode = d["mode"]
    report, paths = [], []
    try:
        sol = sm.solve_supermap(mode, d["prefer"], d["force_both_unit"])
    except SolverError as exc:
        if exc.certificate is not None:
            p = out / f"{cfg.name}_certificate.csv"
            write_csv(p, ["constraint", "farkas_multiplier"], [[k, v] for k, v in enumerate(exc.certificate)])
            exc.paths = [p]
        raise
    report.append(f"mode {mode}: optimum {sol.value:.9f} (x_RTM {sol.x_rtm:.9f}, x_LTM {sol.x_ltm:.9f})")
    report.append(f"certificate: min eigenvalue of S = {sol.min_eig:.3e}")
    paths += _write_solution(out, cfg.name, sol.x, mode)
    if mode == "four_way":
        lams = d["lambdas"] or [0.0, 1.0]
        left = sm.solve_supermap(mode, "left").x
        right = sm.solve_supermap(mode, "right").x
        for lam in lams:
            x = (1.0 - lam) * left + lam * right
            me = sm.min_eigenvalue(x)
            report.append(f"lambda {lam:g}: x_RTM {x[sm.RTM]:.9f}, x_LTM {x[sm.LTM]:.9f}, min eigenvalue {me:.3e}")
            paths += _write_solution(out, f"{cfg.name}_lambda{lam:g}", x, mode)
    return paths, report
