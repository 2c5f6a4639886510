"""Experiment runner: config in, delimited artifacts out.

Each subcommand reproduces one laboratory experiment and writes CSV files
with a JSON sidecar carrying the resolved configuration, the code version
and the wall time.  CSV bodies are deterministic for a fixed configuration
and seed; anything time-dependent stays in the sidecar.  Exit codes: 0 on
success, 1 for configuration problems, 2 when a verified bound or internal
cross-check fails.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import itertools
import json
import math
import os
import shutil
import subprocess
import sys
import time
from dataclasses import dataclass
from importlib import metadata
from pathlib import Path

import numpy as np

from .couplings import Dyson, Exponential, FiniteRange, InteractionSpec, PowerLawF
from .entropy import fannes_check, second_law_experiment, strong_subadditivity_check, trace_norm_distance
from .flows import GridDensity, MagnetizationState, baker_coarse_grain, max_deviation, meanfield_flow
from .gim import decay_curve, vieta_reference
from .histories import (
    MeasurementModel, finite_collapse_average, posterior_martingale,
    purification_schedule, weight_normalization,
)
from .locality import lr_check, nsy_check, nsy_gim_closed_form
from .engine import Propagator
from .pauli import Block, PauliString, random_density_matrix

try:
    VERSION = metadata.version("artifact")
except metadata.PackageNotFoundError:  # running from a source tree
    VERSION = "unpackaged"


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class Param:
    name: str
    kind: type
    default: object
    help: str


@dataclass(frozen=True)
class Artifact:
    """One CSV to be written, with its optional figure kind."""

    filename: str
    header: tuple[str, ...]
    rows: list[tuple]
    figure: str | None = None


# --------------------------------------------------------------------------
# parameter plumbing
# --------------------------------------------------------------------------

def _parse_scalar(text: str, kind: type, name: str):
    try:
        return kind(text)
    except (TypeError, ValueError):
        raise ConfigError(f"key {name!r} expects {kind.__name__}, got {text!r}") from None


def _int_list(text: str, name: str) -> list[int]:
    try:
        return [int(p) for p in str(text).split(",") if p.strip() != ""]
    except ValueError:
        raise ConfigError(f"key {name!r} expects a comma-separated integer list") from None


def _float_list(text: str, name: str) -> list[float]:
    try:
        return [float(p) for p in str(text).split(",") if p.strip() != ""]
    except ValueError:
        raise ConfigError(f"key {name!r} expects a comma-separated number list") from None


def _interval(text: str, name: str) -> Block:
    try:
        lo, hi = str(text).split(":")
        return Block.interval(int(lo), int(hi))
    except (ValueError, TypeError):
        raise ConfigError(f"key {name!r} expects an interval like -3:3") from None


def load_config(path: str) -> dict[str, str]:
    """key = value lines; '#' starts a comment; later keys win."""
    out: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file: {e}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        out[key] = value
    return out


GLOBAL_KEYS = ("out", "seed", "threads")


def resolve_params(schema: tuple[Param, ...], args: argparse.Namespace,
                   config: dict[str, str]) -> dict:
    params = {}
    for p in schema:
        value = getattr(args, p.name, None)
        if value is None and p.name in config:
            value = _parse_scalar(config[p.name], p.kind, p.name)
        params[p.name] = p.default if value is None else value
    return params


def check_config_keys(config: dict[str, str], allowed: set[str]):
    unknown = set(config) - allowed - set(GLOBAL_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")


# --------------------------------------------------------------------------
# experiments
# --------------------------------------------------------------------------

def run_decay(params: dict, rng: np.random.Generator) -> list[Artifact]:
    if params["model"] == "exponential":
        spec = Exponential(params["xi"])
    elif params["model"] == "dyson":
        spec = Dyson(params["alpha"])
    else:
        raise ConfigError(f"unknown decay model {params['model']!r}")
    t_grid = np.linspace(0.0, params["t_max"], params["points"])
    curve = decay_curve(spec, t_grid, tol=params["tol"])
    rows = [(t, v, r, vieta_reference(t)) for t, v, r in curve.rows()]
    return [Artifact("decay.csv", ("t", "value", "radius", "reference"), rows, "decay")]


def run_entropy_growth(params: dict, rng: np.random.Generator) -> list[Artifact]:
    blocks = _int_list(params["blocks"], "blocks")
    t_grid = np.linspace(0.0, params["t_max"], params["t_points"])
    table = second_law_experiment(Exponential(params["xi"]), params["n_sites"],
                                  blocks, t_grid)
    rows = [(t, k, s) for t, k, s in table.rows]
    return [Artifact("entropy.csv", ("t", "block_size", "entropy_per_site"),
                     rows, "entropy")]


def run_lr(params: dict, rng: np.random.Generator) -> list[Artifact]:
    m = InteractionSpec(kind="xy", j1=FiniteRange(params["j"], params["cutoff"]))
    region = Block.centered(params["n_sites"])
    a = PauliString.single(0, 1)
    prop = Propagator.from_model(m, region)
    rows = []
    violated = []
    for t in _float_list(params["t_list"], "t_list"):
        u = prop.unitary(t)
        for x in _int_list(params["x_list"], "x_list"):
            rep = lr_check(m, a, a, x=x, t=t, region=region, lam=params["lam"],
                           prop=prop, unitary=u)
            rows.append((t, x, rep.lhs, rep.rhs, rep.satisfied))
            if not rep.satisfied:
                violated.append((t, x))
    art = [Artifact("lr.csv", ("t", "x", "lhs", "rhs", "satisfied"), rows, "lightcone")]
    if violated:
        raise AssertionError(f"propagation bound violated at (t, x) = {violated}")
    return art


def run_nsy(params: dict, rng: np.random.Generator) -> list[Artifact]:
    m = InteractionSpec(kind="gim", j2=Exponential(params["xi"]))
    f = PowerLawF(nu=params["nu"], eps=params["f_eps"])
    inner = _interval(params["inner"], "inner")
    outer = _interval(params["outer"], "outer")
    a = PauliString.single(params["site"], params["axis"])
    rows = []
    violated = []
    for t in _float_list(params["t_list"], "t_list"):
        rep = nsy_check(m, a, t, inner, outer, f)
        closed = nsy_gim_closed_form(Exponential(params["xi"]), params["site"],
                                     params["axis"], t, inner, outer)
        if abs(closed - rep.lhs) > 1e-9:
            raise AssertionError(
                f"closed-form and diagonal lhs disagree at t={t}: {closed} vs {rep.lhs}")
        info = dict(rep.params)
        rows.append((t, rep.lhs, closed, info["theorem_rhs"], rep.rhs, rep.satisfied))
        if not rep.satisfied:
            violated.append(t)
    art = [Artifact("nsy.csv",
                    ("t", "lhs", "closed_form_lhs", "theorem_rhs", "corollary_rhs",
                     "satisfied"), rows)]
    if violated:
        raise AssertionError(f"region-enlargement bound violated at t = {violated}")
    return art


def run_fannes(params: dict, rng: np.random.Generator) -> list[Artifact]:
    rows = []
    for trial in range(params["trials"]):
        sites = int(rng.integers(1, params["max_block"] + 1))
        dim = 1 << sites
        rho1 = random_density_matrix(rng, dim)
        rho2 = random_density_matrix(rng, dim)
        lhs, rhs = fannes_check(rho1, rho2)
        dist = trace_norm_distance(rho1, rho2)
        rows.append((trial, sites, lhs, rhs, dist))
    return [Artifact("fannes.csv", ("trial", "sites", "lhs", "rhs", "trace_distance"),
                     rows)]


def run_ssa(params: dict, rng: np.random.Generator) -> list[Artifact]:
    region = Block.interval(0, 3)
    rows = []
    for trial in range(params["trials"]):
        rho = random_density_matrix(rng, region.dim, rank=1)
        for sites in itertools.permutations(region.sites, 3):
            b1, b2, b3 = (Block((s,)) for s in sites)
            rep = strong_subadditivity_check(rho, region, b1, b2, b3)
            rows.append((trial, sites[0], sites[1], sites[2],
                         rep.conditional_slack, rep.subadditivity_slack))
    return [Artifact("ssa.csv",
                     ("trial", "site1", "site2", "site3", "conditional_slack",
                      "subadditivity_slack"), rows)]


def run_histories(params: dict, rng: np.random.Generator) -> list[Artifact]:
    schedule = _int_list(params["n_schedule"], "n_schedule")
    reports = purification_schedule(params["mu"], params["p1"], params["p2"],
                                    params["eps"], schedule)
    for n in schedule:
        m = MeasurementModel(params["mu"], params["p1"], params["p2"], int(n))
        weight_normalization(m)
        if abs(posterior_martingale(m) - params["mu"]) > 1e-12:
            raise AssertionError(f"posterior martingale broken at n={n}")
    rows = [(r.n, r.undecided_mass, r.mean_l_over_n_branch1, r.mean_l_over_n_branch2)
            for r in reports]
    return [Artifact("purification.csv",
                     ("n", "undecided_mass", "mean_l_over_n_branch1",
                      "mean_l_over_n_branch2"), rows, "purification")]


def run_collapse(params: dict, rng: np.random.Generator) -> list[Artifact]:
    p0 = np.diag([1.0, 1.0, 0.0, 0.0]).astype(complex)
    p1 = np.eye(4) - p0
    rows = []
    for trial in range(params["trials"]):
        w = float(rng.uniform(0.2, 0.8))
        rho = np.zeros((4, 4), dtype=complex)
        rho[:2, :2] = w * random_density_matrix(rng, 2)
        rho[2:, 2:] = (1.0 - w) * random_density_matrix(rng, 2)
        s_av, s_before = finite_collapse_average(rho, [p0, p1])
        if not s_av < s_before - 1e-6:
            raise AssertionError(f"entropy reduction margin lost in trial {trial}")
        rows.append((trial, s_before, s_av, s_before - s_av))
    return [Artifact("collapse.csv",
                     ("trial", "entropy_before", "entropy_average", "drop"), rows)]


def run_meanfield(params: dict, rng: np.random.Generator) -> list[Artifact]:
    m0 = MagnetizationState(params["m1"], params["m2"], params["m3"])
    traj = meanfield_flow(params["a"], params["c"], m0,
                          t_end=params["t_end"], dt=params["dt"])
    rows = traj.rows()
    stride = max(1, params["stride"])
    sampled = rows[::stride]
    if rows and rows[-1] != sampled[-1]:
        sampled.append(rows[-1])
    return [Artifact("meanfield.csv", ("t", "m1", "m2", "m3"), sampled)]


def run_baker(params: dict, rng: np.random.Generator) -> list[Artifact]:
    if params["initial"] == "left-half":
        rho0 = GridDensity.left_half(params["m"])
    elif params["initial"] == "uniform":
        rho0 = GridDensity.uniform(params["m"])
    else:
        raise ConfigError(f"unknown initial density {params['initial']!r}")
    coarse = baker_coarse_grain(rho0, steps=params["steps"], k=params["k"])
    rows = [(step, max_deviation(c)) for step, c in enumerate(coarse)]
    return [Artifact("baker.csv", ("step", "max_deviation"), rows, "baker")]


EXPERIMENTS: dict[str, tuple[tuple[Param, ...], object]] = {
    "decay": ((
        Param("model", str, "exponential", "coupling family: exponential or dyson"),
        Param("xi", float, 2.0, "exponential decay base"),
        Param("alpha", float, 2.0, "power-law exponent (dyson model)"),
        Param("t_max", float, 10.0, "end of the time grid"),
        Param("points", int, 200, "number of grid points"),
        Param("tol", float, 1e-12, "truncation tolerance"),
    ), run_decay),
    "entropy-growth": ((
        Param("xi", float, math.e, "exponential decay base"),
        Param("n_sites", int, 20, "chain length"),
        Param("blocks", str, "4", "comma list of centered block sizes"),
        Param("t_max", float, 100.0, "end of the time grid"),
        Param("t_points", int, 26, "number of grid points"),
    ), run_entropy_growth),
    "lr": ((
        Param("n_sites", int, 10, "chain length"),
        Param("j", float, 1.0, "transverse coupling strength"),
        Param("cutoff", int, 1, "coupling range"),
        Param("lam", float, 1.0, "exponential weight rate"),
        Param("t_list", str, "0.25,0.5,1,2", "comma list of times"),
        Param("x_list", str, "1,2,3,4", "comma list of translations"),
    ), run_lr),
    "nsy": ((
        Param("xi", float, 2.0, "exponential decay base"),
        Param("site", int, 0, "observable site"),
        Param("axis", int, 1, "observable axis (1 or 2)"),
        Param("inner", str, "-3:3", "inner interval lo:hi"),
        Param("outer", str, "-6:6", "outer interval lo:hi"),
        Param("t_list", str, "0.5,1,2", "comma list of times"),
        Param("nu", int, 1, "decay-profile index"),
        Param("f_eps", float, 1.0, "decay-profile excess exponent"),
    ), run_nsy),
    "fannes": ((
        Param("trials", int, 1000, "number of random pairs"),
        Param("max_block", int, 6, "largest block size in sites"),
    ), run_fannes),
    "ssa": ((
        Param("trials", int, 200, "number of random pure states"),
    ), run_ssa),
    "histories": ((
        Param("mu", float, 0.5, "mixture weight"),
        Param("p1", float, 0.8, "branch-1 outcome-0 probability"),
        Param("p2", float, 0.3, "branch-2 outcome-0 probability"),
        Param("eps", float, 0.05, "undecidedness threshold"),
        Param("n_schedule", str, "5,10,20,40,80", "comma list of record lengths"),
    ), run_histories),
    "collapse": ((
        Param("trials", int, 100, "number of random decoherent states"),
    ), run_collapse),
    "meanfield": ((
        Param("a", float, 0.75, "transverse coupling"),
        Param("c", float, 0.25, "longitudinal coupling"),
        Param("m1", float, 1.0, "initial first component"),
        Param("m2", float, 0.0, "initial second component"),
        Param("m3", float, 1.0, "initial third component"),
        Param("t_end", float, 10.0, "integration time"),
        Param("dt", float, 1e-3, "integrator step"),
        Param("stride", int, 100, "CSV sampling stride"),
    ), run_meanfield),
    "baker": ((
        Param("m", int, 10, "fine grid level (2^m cells per side)"),
        Param("k", int, 4, "coarse level"),
        Param("steps", int, 6, "transport steps"),
        Param("initial", str, "left-half", "initial density: left-half or uniform"),
    ), run_baker),
}

FIGURE_RENDERER = "render"


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_artifacts(artifacts: list[Artifact], out_dir: Path, experiment: str,
                    params: dict, seed: int, wall_time: float) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for art in artifacts:
        csv_path = out_dir / art.filename
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(art.header)
            for row in art.rows:
                writer.writerow([_cell(v) for v in row])
        sidecar = {
            "experiment": experiment,
            "config": {**params, "seed": seed},
            "version": VERSION,
            "wall_time_s": wall_time,
            "written_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        }
        csv_path.with_suffix(".json").write_text(
            json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(csv_path)
    return written


def render_figures(artifacts: list[Artifact], out_dir: Path):
    exe = shutil.which(FIGURE_RENDERER)
    if exe is None:
        raise ConfigError(
            "--figures needs the separately installed figure renderer on PATH")
    for art in artifacts:
        if art.figure is None:
            continue
        csv_path = out_dir / art.filename
        png_path = csv_path.with_suffix(".png")
        proc = subprocess.run(
            [exe, "--kind", art.figure, "--in", str(csv_path), "--out", str(png_path)],
            capture_output=True, text=True)
        if proc.returncode != 0:
            raise ConfigError(
                f"figure renderer failed on {art.filename}: {proc.stderr.strip()}")


# --------------------------------------------------------------------------
# argument surface
# --------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; the contract reserves 2
    # for failed verifications, so route usage problems through ConfigError
    def error(self, message):
        raise ConfigError(f"{message}\n{self.format_usage()}")


def build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--out", help="output directory (default: current)")
    common.add_argument("--seed", type=int, help="RNG seed for randomized sweeps")
    common.add_argument("--threads", type=int, help="worker/BLAS thread cap")
    common.add_argument("--figures", action="store_true",
                        help="also render figures via the external renderer")

    parser = _Parser(prog="spinlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", metavar="EXPERIMENT")
    for name, (schema, _) in EXPERIMENTS.items():
        p = sub.add_parser(name, parents=[common], help=f"run the {name} experiment")
        for param in schema:
            p.add_argument(f"--{param.name}", type=param.kind, help=param.help)
    sub.add_parser("all", parents=[common],
                   help="run every experiment with defaults plus config overrides")
    return parser


def _run_one(name: str, args: argparse.Namespace, config: dict[str, str],
             out_dir: Path, seed: int) -> list[Artifact]:
    schema, runner = EXPERIMENTS[name]
    params = resolve_params(schema, args, config)
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    artifacts = runner(params, rng)
    wall = time.perf_counter() - start
    write_artifacts(artifacts, out_dir, name, params, seed, wall)
    return artifacts


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.experiment is None:
            raise ConfigError(parser.format_usage())
        config = load_config(args.config) if args.config else {}
        out_dir = Path(args.out or config.get("out", "."))
        seed = args.seed if args.seed is not None else int(config.get("seed", 0))
        threads = args.threads if args.threads is not None else config.get("threads")
        if threads is not None:
            for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
                os.environ[var] = str(threads)

        if args.experiment == "all":
            allowed = {p.name for schema, _ in EXPERIMENTS.values() for p in schema}
            check_config_keys(config, allowed)
            artifacts = []
            for name in EXPERIMENTS:
                artifacts += _run_one(name, args, config, out_dir, seed)
        else:
            schema, _ = EXPERIMENTS[args.experiment]
            check_config_keys(config, {p.name for p in schema})
            artifacts = _run_one(args.experiment, args, config, out_dir, seed)

        if args.figures:
            render_figures(artifacts, out_dir)
        return 0
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"invalid parameter: {e}", file=sys.stderr)
        return 1
    except AssertionError as e:
        print(f"verification failed: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
