"""Command-line entry point.

Exit codes: 0 success, 2 configuration or input error, 3 precondition
failure, 4 solver failure.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from . import config as cf
from . import runner
from .errors import InputError, PreconditionError, ResourceError, SolverError
from .kernels import set_threads
from .pauli import check_cptp, kraus_superop
from .spacetime import classify

EXIT_OK, EXIT_CONFIG, EXIT_PRECONDITION, EXIT_SOLVER = 0, 2, 3, 4


def _fail(code: int, msg: str):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


def _guard(fn):
    """Map library exceptions to exit codes."""
    try:
        return fn()
    except InputError as exc:
        _fail(EXIT_CONFIG, str(exc))
    except PreconditionError as exc:
        _fail(EXIT_PRECONDITION, str(exc))
    except ResourceError as exc:
        _fail(EXIT_PRECONDITION, str(exc))
    except SolverError as exc:
        msg = str(exc)
        for p in getattr(exc, "paths", []):
            msg += f"\ncertificate written to {p}"
        _fail(EXIT_SOLVER, msg)


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Average-computation benchmarking of 1D brickwork circuits."""


@main.command()
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("--tol", type=float, default=1e-10, show_default=True, help="Classification tolerance.")
def check(file, tol):
    """Classify the averaged channel described in FILE (YAML)."""

    def go():
        ci = cf.load_check(file)
        if ci.kind == "gate":
            rng = np.random.default_rng(ci.gate_seed)
            el = runner.make_element(ci.gate, ci.ensemble, ci.layer, rng)
            from .ensembles import average_channel

            e = average_channel(el)
            what = f"{ci.ensemble.strategy} ensemble with {len(el.members)} member(s)"
        elif ci.kind == "superop":
            e, what = ci.superop, "superoperator"
        else:
            e, what = kraus_superop(ci.kraus), f"Kraus channel with {len(ci.kraus)} operator(s)"
        c = classify(e, tol)
        cp = check_cptp(e, tol)
        click.echo(f"{what}: {c.describe()}, max residual {c.max_residual:.1e}")
        for k in ("tp", "unital", "left", "right"):
            click.echo(f"  {k:7s} residual {c.residuals[k]:.3e}")
        click.echo(f"  cp      {'yes' if cp['cp'] else 'no'}")

    _guard(go)


def _common(f):
    opts = [
        click.option("--config", "config_path", required=True,
                     help="Config file or preset name (see `stbench presets`)."),
        click.option("--seed", type=int, default=None, help="Master seed (overrides the config)."),
        click.option("--rounds", type=click.IntRange(min=0), default=None, help="Sampled realizations."),
        click.option("--shots", type=click.IntRange(min=0), default=None, help="Shots per realization; 0 = exact."),
        click.option("--out", type=click.Path(file_okay=False), default="out", show_default=True,
                     help="Output directory."),
        click.option("--tol", type=float, default=None, help="Structural tolerance."),
        click.option("--threads", type=click.IntRange(min=1), default=None,
                     help=f"Worker threads (else ${runner.THREADS_ENV}, else the config)."),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _load(config_path, seed, rounds, shots, tol) -> cf.RunConfig:
    cfg = cf.load_config(cf.resolve(config_path))
    if seed is not None:
        if seed < 0:
            raise InputError("--seed must be nonnegative")
        cfg.seed = seed
    if rounds is not None:
        cfg.rounds = rounds
    if shots is not None:
        cfg.shots = shots
    if tol is not None:
        cfg.tol = tol
    return cfg


@main.command()
@_common
def benchmark(config_path, seed, rounds, shots, out, tol, threads):
    """Compare classical averages with sampled realizations; writes CSV."""

    def go():
        cfg = _load(config_path, seed, rounds, shots, tol)
        n = runner.resolve_threads(threads, cfg.threads)
        set_threads(n)
        outdir = Path(out)
        if cfg.experiment == "benchmark":
            path, failures = runner.run_benchmark(cfg, outdir, n)
            click.echo(f"wrote {path}")
            if failures:
                _fail(EXIT_PRECONDITION, f"{failures} row(s) failed a precondition; see the status column")
        elif cfg.experiment == "fig1":
            click.echo(f"wrote {runner.run_fig1(cfg, outdir, n)}")
        elif cfg.experiment == "fig2":
            for p in runner.run_fig2(cfg, outdir, n):
                click.echo(f"wrote {p}")
        else:
            raise InputError(f"experiment '{cfg.experiment}' runs under the supermap command")

    _guard(go)


@main.command()
@click.option("--config", "config_path", default=None, help="Supermap config file or preset name.")
@click.option("--mode", type=click.Choice(cf.MODES), default=None, help="Overrides the config mode.")
@click.option("--prefer", type=click.Choice(["right", "left"]), default=None, help="Tie-break among optima.")
@click.option("--force-both-unit", is_flag=True, default=False, help="Require x_RTM = x_LTM = 1 (four_way).")
@click.option("--out", type=click.Path(file_okay=False), default="out", show_default=True, help="Output directory.")
def supermap(config_path, mode, prefer, force_both_unit, out):
    """Optimize rescaling supermaps and decompose them into Pauli dressings."""

    def go():
        if config_path is not None:
            cfg = cf.load_config(cf.resolve(config_path))
            if cfg.experiment != "supermap":
                raise InputError(f"experiment '{cfg.experiment}' runs under the benchmark command")
        else:
            cfg = cf.RunConfig("supermap", name="supermap",
                               supermap={"mode": "four_way", "prefer": None, "force_both_unit": False, "lambdas": []})
        if mode is not None:
            cfg.supermap["mode"] = mode
        if prefer is not None:
            cfg.supermap["prefer"] = prefer
        if force_both_unit:
            if cfg.supermap["mode"] != "four_way":
                raise InputError("--force-both-unit applies to four_way only")
            cfg.supermap["force_both_unit"] = True
        paths, report = runner.run_supermap(cfg, Path(out))
        for line in report:
            click.echo(line)
        for p in paths:
            click.echo(f"wrote {p}")

    _guard(go)


@main.command()
def presets():
    """List shipped presets."""
    for name in cf.preset_names():
        click.echo(name)


if __name__ == "__main__":  # pragma: no cover
    main()
