"""Run configuration: YAML text validated into plain dataclasses.

Every error names the dotted field path and, when the value came from a file,
its line and column.  Unknown keys are rejected at every level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError

EXPERIMENTS = ("benchmark", "fig1", "fig2", "supermap")
SCHEMES = ("single_site", "two_body", "three_site", "k_body")
STRATEGIES = ("none", "reflection", "twirl4way", "twirl3way", "custom_supermap")
GATE_TYPES = ("kak", "matrix", "tgate", "haar", "alternating")
MODES = ("three_way", "three_way_literal", "four_way")


class _Locator:
    """Maps dotted field paths to (line, column) of the YAML node."""

    def __init__(self, source: str = "<config>"):
        self.source = source
        self.marks: dict = {}

    def walk(self, node, path: str = "") -> None:
        self.marks[path] = (node.start_mark.line + 1, node.start_mark.column + 1)
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                self.marks[_join(path, k.value)] = (k.start_mark.line + 1, k.start_mark.column + 1)
                self.walk(v, _join(path, k.value))
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                self.walk(v, f"{path}[{i}]")

    def where(self, path: str) -> str:
        p = path
        while p and p not in self.marks:
            p = p.rsplit(".", 1)[0] if "." in p else ""
        if p in self.marks:
            line, col = self.marks[p]
            return f"{self.source}:{line}:{col}"
        return self.source


def _join(path: str, key) -> str:
    return f"{path}.{key}" if path else str(key)


class _Ctx:
    def __init__(self, loc: _Locator):
        self.loc = loc

    def fail(self, path: str, msg: str):
        raise ConfigError(f"{self.loc.where(path)}: field '{path or '<root>'}': {msg}")

    def mapping(self, d, path, allowed, required=()):
        if not isinstance(d, dict):
            self.fail(path, f"expected a mapping, got {type(d).__name__}")
        for k in d:
            if k not in allowed:
                self.fail(_join(path, k), f"unknown key (allowed: {', '.join(sorted(allowed))})")
        for k in required:
            if k not in d:
                self.fail(path, f"missing required key '{k}'")
        return d

    def integer(self, d, key, path, default=None, lo=None, hi=None):
        p = _join(path, key)
        if key not in d:
            if default is None:
                self.fail(path, f"missing required key '{key}'")
            return default
        v = d[key]
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(p, f"expected an integer, got {v!r}")
        if lo is not None and v < lo:
            self.fail(p, f"must be >= {lo}, got {v}")
        if hi is not None and v > hi:
            self.fail(p, f"must be <= {hi}, got {v}")
        return v

    def number(self, v, p, lo=None, hi=None):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            self.fail(p, f"expected a finite number, got {v!r}")
        v = float(v)
        if lo is not None and v < lo:
            self.fail(p, f"must be >= {lo}, got {v}")
        if hi is not None and v > hi:
            self.fail(p, f"must be <= {hi}, got {v}")
        return v

    def real(self, d, key, path, default=None, lo=None, hi=None):
        if key not in d:
            if default is None:
                self.fail(path, f"missing required key '{key}'")
            return default
        return self.number(d[key], _join(path, key), lo, hi)

    def choice(self, d, key, path, options, default=None):
        if key not in d:
            if default is None:
                self.fail(path, f"missing required key '{key}'")
            return default
        v = d[key]
        if v not in options:
            self.fail(_join(path, key), f"expected one of {', '.join(map(str, options))}, got {v!r}")
        return v

    def vector(self, v, p, n):
        if not isinstance(v, list) or len(v) != n:
            self.fail(p, f"expected a list of {n} numbers")
        return tuple(self.number(x, f"{p}[{i}]") for i, x in enumerate(v))

    def complex_matrix(self, v, p, dim):
        """Row-major list of rows, each entry a [re, im] pair or a real number."""
        if not isinstance(v, list) or len(v) != dim:
            self.fail(p, f"expected {dim} rows")
        out = np.zeros((dim, dim), dtype=complex)
        for i, row in enumerate(v):
            if not isinstance(row, list) or len(row) != dim:
                self.fail(f"{p}[{i}]", f"expected {dim} entries")
            for j, e in enumerate(row):
                q = f"{p}[{i}][{j}]"
                if isinstance(e, list):
                    re, im = self.vector(e, q, 2)
                    out[i, j] = re + 1j * im
                else:
                    out[i, j] = self.number(e, q)
        return out


# ---------------------------------------------------------------------------
# parsed records


@dataclass
class GateSpec:
    type: str
    theta: tuple = ()
    locals_: dict = field(default_factory=dict)
    matrix: np.ndarray | None = None
    family: int = 1
    phi: float = math.pi / 4
    even: "GateSpec | None" = None
    odd: "GateSpec | None" = None


@dataclass
class EnsembleSpec:
    strategy: str
    lam: float = 1.0
    leg: str = "first"
    table: np.ndarray | None = None
    distribution: dict | None = None


@dataclass
class CircuitConfig:
    L: int
    T: int
    init: str
    gate: GateSpec
    ensemble: EnsembleSpec
    noise: tuple | None = None
    gate_seed: int = 0


@dataclass
class CorrelatorRow:
    scheme: str
    sites: tuple
    ops: tuple  # per site: 'X', 'Y', 'Z', 'O1' or a Bloch 3-vector


@dataclass
class RunConfig:
    experiment: str
    name: str = "run"
    seed: int = 0
    rounds: int = 0
    shots: int = 0
    threads: int | None = None
    tol: float = 1e-10
    circuit: CircuitConfig | None = None
    correlators: list = field(default_factory=list)
    fig1: dict = field(default_factory=dict)
    fig2: dict = field(default_factory=dict)
    supermap: dict = field(default_factory=dict)


_TOP = {"experiment", "name", "seed", "rounds", "shots", "threads", "tol", "circuit", "correlators",
        "fig1", "fig2", "supermap"}


def _gate(c: _Ctx, d, path) -> GateSpec:
    c.mapping(d, path, {"type", "theta", "w_a", "w_b", "v_a", "v_b", "matrix", "family", "phi", "even", "odd"},
              ("type",))
    t = c.choice(d, "type", path, GATE_TYPES)
    allowed = {
        "kak": {"type", "theta", "w_a", "w_b", "v_a", "v_b"},
        "matrix": {"type", "matrix"},
        "tgate": {"type", "family", "phi"},
        "haar": {"type"},
        "alternating": {"type", "even", "odd"},
    }[t]
    c.mapping(d, path, allowed)
    g = GateSpec(t)
    if t == "kak":
        if "theta" not in d:
            c.fail(path, "missing required key 'theta'")
        g.theta = c.vector(d["theta"], _join(path, "theta"), 3)
        for k in ("w_a", "w_b", "v_a", "v_b"):
            g.locals_[k] = c.vector(d[k], _join(path, k), 3) if k in d else (0.0, 0.0, 0.0)
    elif t == "matrix":
        if "matrix" not in d:
            c.fail(path, "missing required key 'matrix'")
        g.matrix = c.complex_matrix(d["matrix"], _join(path, "matrix"), 4)
        err = np.abs(g.matrix.conj().T @ g.matrix - np.eye(4)).max()
        if err > 1e-10:
            c.fail(_join(path, "matrix"), f"not unitary (deviation {err:.2e})")
    elif t == "tgate":
        g.family = c.choice(d, "family", path, (1, 2, 3))
        g.phi = c.real(d, "phi", path, math.pi / 4)
    elif t == "alternating":
        for k in ("even", "odd"):
            if k not in d:
                c.fail(path, f"missing required key '{k}'")
        g.even = _gate(c, d["even"], _join(path, "even"))
        g.odd = _gate(c, d["odd"], _join(path, "odd"))
    return g


_PAULI_LETTERS = "IXYZ"


def _ensemble(c: _Ctx, d, path) -> EnsembleSpec:
    c.mapping(d, path, {"strategy", "lambda", "leg", "table", "distribution"}, ("strategy",))
    s = c.choice(d, "strategy", path, STRATEGIES)
    allowed = {
        "none": {"strategy"},
        "reflection": {"strategy"},
        "twirl4way": {"strategy", "lambda"},
        "twirl3way": {"strategy", "leg"},
        "custom_supermap": {"strategy", "table", "distribution"},
    }[s]
    c.mapping(d, path, allowed)
    e = EnsembleSpec(s)
    if s == "twirl4way":
        e.lam = c.real(d, "lambda", path, 1.0, 0.0, 1.0)
    if s == "twirl3way":
        e.leg = c.choice(d, "leg", path, ("first", "second"), "first")
    if s == "custom_supermap":
        if ("table" in d) == ("distribution" in d):
            c.fail(path, "give exactly one of 'table' or 'distribution'")
        if "table" in d:
            p = _join(path, "table")
            v = d["table"]
            if not isinstance(v, list) or len(v) != 4:
                c.fail(p, "expected a 4x4 table")
            e.table = np.array([c.vector(r, f"{p}[{i}]", 4) for i, r in enumerate(v)])
        else:
            p = _join(path, "distribution")
            v = d["distribution"]
            if not isinstance(v, dict) or not v:
                c.fail(p, "expected a mapping of dressing labels like 'XIIZ' to weights")
            dist = {}
            for k, w in v.items():
                q = _join(p, k)
                if not isinstance(k, str) or len(k) != 4 or any(ch not in _PAULI_LETTERS for ch in k):
                    c.fail(q, "dressing label must be four letters from IXYZ (pre1 pre2 post1 post2)")
                dist[tuple(_PAULI_LETTERS.index(ch) for ch in k)] = c.number(w, q, 0.0)
            total = sum(dist.values())
            if abs(total - 1.0) > 1e-9:
                c.fail(p, f"weights must sum to 1, got {total!r}")
            e.distribution = dist
    return e


def _circuit(c: _Ctx, d, path) -> CircuitConfig:
    c.mapping(d, path, {"L", "T", "init", "gate", "ensemble", "noise", "gate_seed"}, ("L", "T", "gate"))
    L = c.integer(d, "L", path, lo=2, hi=64)
    T = c.integer(d, "T", path, lo=0, hi=64)
    init = c.choice(d, "init", path, ("bell_product", "plus_bell"), "bell_product")
    if init == "bell_product" and L % 2:
        c.fail(_join(path, "L"), "bell_product needs an even number of sites")
    gate = _gate(c, d["gate"], _join(path, "gate"))
    ens = _ensemble(c, d.get("ensemble", {"strategy": "none"}), _join(path, "ensemble"))
    noise = None
    if "noise" in d:
        p = _join(path, "noise")
        c.mapping(d["noise"], p, {"px", "py", "pz"})
        noise = tuple(c.real(d["noise"], k, p, 0.0, 0.0, 1.0) for k in ("px", "py", "pz"))
        if sum(noise) > 1.0:
            c.fail(p, "probabilities sum above 1")
    return CircuitConfig(L, T, init, gate, ens, noise, c.integer(d, "gate_seed", path, 0, lo=0))


def _op(c: _Ctx, v, p):
    if isinstance(v, str):
        if v not in ("X", "Y", "Z", "O1"):
            c.fail(p, f"operator must be X, Y, Z, O1 or a Bloch vector, got {v!r}")
        return v
    return c.vector(v, p, 3)


def _row(c: _Ctx, d, path, L) -> CorrelatorRow:
    c.mapping(d, path, {"scheme", "sites", "ops"}, ("scheme", "sites", "ops"))
    s = c.choice(d, "scheme", path, SCHEMES)
    sites, ops = d["sites"], d["ops"]
    if not isinstance(sites, list) or not sites:
        c.fail(_join(path, "sites"), "expected a nonempty list of site indices")
    if not isinstance(ops, list) or len(ops) != len(sites):
        c.fail(_join(path, "ops"), "expected one operator per site")
    out_sites = []
    for i, x in enumerate(sites):
        q = f"{_join(path, 'sites')}[{i}]"
        if isinstance(x, bool) or not isinstance(x, int) or not 0 <= x < L:
            c.fail(q, f"site must be an integer in [0, {L - 1}], got {x!r}")
        out_sites.append(x)
    need = {"single_site": 1, "two_body": 2, "three_site": 3}.get(s)
    if need is not None and len(out_sites) != need:
        c.fail(_join(path, "sites"), f"scheme {s} needs {need} site(s), got {len(out_sites)}")
    return CorrelatorRow(s, tuple(out_sites), tuple(_op(c, o, f"{_join(path, 'ops')}[{i}]") for i, o in enumerate(ops)))


def parse(data, source: str = "<config>", locator: _Locator | None = None) -> RunConfig:
    c = _Ctx(locator or _Locator(source))
    c.mapping(data, "", _TOP, ("experiment",))
    exp = c.choice(data, "experiment", "", EXPERIMENTS)
    cfg = RunConfig(exp)
    if "name" in data:
        if not isinstance(data["name"], str) or not data["name"].replace("_", "").replace("-", "").isalnum():
            c.fail("name", "expected a file-name-safe string")
        cfg.name = data["name"]
    cfg.seed = c.integer(data, "seed", "", 0, lo=0)
    cfg.rounds = c.integer(data, "rounds", "", 0, lo=0)
    cfg.shots = c.integer(data, "shots", "", 0, lo=0)
    if "threads" in data:
        cfg.threads = c.integer(data, "threads", "", lo=1, hi=1024)
    cfg.tol = c.real(data, "tol", "", 1e-10, 0.0)
    sections = {"benchmark": ("circuit", "correlators"), "fig1": ("fig1",), "fig2": ("fig2",),
                "supermap": ("supermap",)}[exp]
    for key in ("circuit", "correlators", "fig1", "fig2", "supermap"):
        if key in data and key not in sections:
            c.fail(key, f"not used by experiment '{exp}'")
    if exp == "benchmark":
        if "circuit" not in data:
            c.fail("", "missing required key 'circuit'")
        cfg.circuit = _circuit(c, data["circuit"], "circuit")
        rows = data.get("correlators", [])
        if not isinstance(rows, list) or not rows:
            c.fail("correlators", "expected a nonempty list")
        cfg.correlators = [_row(c, r, f"correlators[{i}]", cfg.circuit.L) for i, r in enumerate(rows)]
    elif exp == "fig1":
        d = c.mapping(data["fig1"] if "fig1" in data else {}, "fig1",
                      {"family", "T", "L", "phi_points", "phi_min", "phi_max", "mc_phi"})
        T = c.integer(d, "T", "fig1", 5, lo=1, hi=9)
        cfg.fig1 = {
            "family": c.choice(d, "family", "fig1", (1, 2, 3), 1),
            "T": T,
            "L": c.integer(d, "L", "fig1", 2 * T + 2, lo=2 * T + 1, hi=20),
            "phi_points": c.integer(d, "phi_points", "fig1", 41, lo=1),
            "phi_min": c.real(d, "phi_min", "fig1", 0.0),
            "phi_max": c.real(d, "phi_max", "fig1", math.pi / 2),
            "mc_phi": c.real(d, "mc_phi", "fig1", math.pi / 4),
        }
    elif exp == "fig2":
        d = c.mapping(data["fig2"] if "fig2" in data else {}, "fig2", {"t_min", "t_max", "l_cap", "histogram_depths"})
        cfg.fig2 = {
            "t_min": c.integer(d, "t_min", "fig2", 2, lo=1),
            "t_max": c.integer(d, "t_max", "fig2", 14, lo=1),
            "l_cap": c.integer(d, "l_cap", "fig2", 20, lo=4, hi=20),
        }
        hd = d.get("histogram_depths", [])
        if not isinstance(hd, list) or any(isinstance(x, bool) or not isinstance(x, int) for x in hd):
            c.fail("fig2.histogram_depths", "expected a list of integers")
        cfg.fig2["histogram_depths"] = list(hd)
        if cfg.fig2["t_min"] > cfg.fig2["t_max"]:
            c.fail("fig2.t_min", "must not exceed t_max")
    else:
        d = c.mapping(data["supermap"] if "supermap" in data else {}, "supermap",
                      {"mode", "prefer", "force_both_unit", "lambdas"})
        prefer = d.get("prefer")
        if prefer not in (None, "right", "left"):
            c.fail("supermap.prefer", f"expected right, left or null, got {prefer!r}")
        fbu = d.get("force_both_unit", False)
        if not isinstance(fbu, bool):
            c.fail("supermap.force_both_unit", f"expected true or false, got {fbu!r}")
        lams = d.get("lambdas", [])
        if not isinstance(lams, list):
            c.fail("supermap.lambdas", "expected a list of numbers")
        cfg.supermap = {
            "mode": c.choice(d, "mode", "supermap", MODES, "four_way"),
            "prefer": prefer,
            "force_both_unit": fbu,
            "lambdas": [c.number(x, f"supermap.lambdas[{i}]", 0.0, 1.0) for i, x in enumerate(lams)],
        }
    return cfg


def load_text(text: str, source: str = "<config>"):
    """Parse YAML text; returns (data, locator)."""
    loc = _Locator(source)
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}:{mark.column + 1}" if mark else source
        raise ConfigError(f"{where}: malformed YAML: {getattr(exc, 'problem', exc)}") from None
    if node is not None:
        loc.walk(node)
    return data, loc


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    data, loc = load_text(text, str(path))
    cfg = parse(data, str(path), loc)
    if isinstance(data, dict) and "name" not in data:
        cfg.name = path.stem
    return cfg


def preset_dir() -> Path:
    return Path(__file__).parent / "presets"


def preset_names() -> list:
    return sorted(p.stem for p in preset_dir().glob("*.yaml"))


def resolve(path_or_preset: str) -> Path:
    p = Path(path_or_preset)
    if p.exists():
        return p
    cand = preset_dir() / f"{path_or_preset}.yaml"
    if cand.exists():
        return cand
    raise ConfigError(f"{path_or_preset}: no such file or preset (presets: {', '.join(preset_names())})")


@dataclass
class CheckInput:
    kind: str  # "gate", "superop" or "kraus"
    gate: GateSpec | None = None
    ensemble: EnsembleSpec | None = None
    superop: np.ndarray | None = None
    kraus: list = field(default_factory=list)
    layer: int = 1
    gate_seed: int = 0


def parse_check(data, source: str = "<check>", locator: _Locator | None = None) -> CheckInput:
    """A channel description: a gate plus optional ensemble, a 16x16 superoperator, or Kraus operators."""
    c = _Ctx(locator or _Locator(source))
    c.mapping(data, "", {"gate", "ensemble", "superop", "kraus", "layer", "gate_seed"})
    given = [k for k in ("gate", "superop", "kraus") if k in data]
    if len(given) != 1:
        c.fail("", "give exactly one of 'gate', 'superop' or 'kraus'")
    kind = given[0]
    out = CheckInput(kind)
    if kind == "gate":
        out.gate = _gate(c, data["gate"], "gate")
        out.ensemble = _ensemble(c, data.get("ensemble", {"strategy": "none"}), "ensemble")
        out.layer = c.integer(data, "layer", "", 1, lo=1)
        out.gate_seed = c.integer(data, "gate_seed", "", 0, lo=0)
    else:
        for k in ("ensemble", "layer", "gate_seed"):
            if k in data:
                c.fail(k, "only used together with 'gate'")
        if kind == "superop":
            out.superop = c.complex_matrix(data["superop"], "superop", 16)
        else:
            ks = data["kraus"]
            if not isinstance(ks, list) or not ks:
                c.fail("kraus", "expected a nonempty list of 4x4 matrices")
            out.kraus = [c.complex_matrix(k, f"kraus[{i}]", 4) for i, k in enumerate(ks)]
    return out


def load_check(path: str | Path) -> CheckInput:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read file: {exc.strerror}") from None
    data, loc = load_text(text, str(path))
    return parse_check(data, str(path), loc)
