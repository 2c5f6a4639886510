"""CSV-to-figure builders, one per artifact kind.

Rendering is read-only over its inputs and deterministic: fixed figure
geometry, no timestamps, data taken verbatim from the file. Model
parameters for the title come from the JSON sidecar the CLI writes next
to each CSV, when present.
"""

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")

from matplotlib.figure import Figure  # noqa: E402  (backend must be pinned first)

KINDS = ("decay", "entropy", "purification", "lightcone", "baker")
FIGSIZE = (6.4, 4.0)
DPI = 160


class RenderError(Exception):
    """Any input problem: missing file, bad header, no data."""


@dataclass(frozen=True)
class PlotSpec:
    inputs: tuple[Path, ...]
    output: Path
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown plot kind {self.kind!r}; choose from {KINDS}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")


def read_table(path: Path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise RenderError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise RenderError(f"{path} is empty")
    header, body = rows[0], rows[1:]
    if not body:
        raise RenderError(f"{path} has a header but no data rows")
    return header, body


def columns(path: Path, names: tuple[str, ...]) -> dict[str, np.ndarray]:
    header, body = read_table(path)
    missing = [n for n in names if n not in header]
    if missing:
        raise RenderError(f"{path} lacks column(s) {missing}; header is {header}")
    idx = {n: header.index(n) for n in names}
    try:
        return {n: np.array([float(row[idx[n]]) for row in body]) for n in names}
    except (ValueError, IndexError) as exc:
        raise RenderError(f"malformed row in {path}: {exc}") from exc


def sidecar_params(csv_path: Path) -> dict:
    """Run parameters from the CSV's JSON sidecar; empty when absent."""
    sidecar = csv_path.with_suffix(".json")
    if not sidecar.exists():
        return {}
    try:
        return dict(json.loads(sidecar.read_text(encoding="utf-8")).get("config", {}))
    except (OSError, json.JSONDecodeError):
        return {}


def figure_title(kind: str, params: dict) -> str:
    shown = {k: v for k, v in sorted(params.items()) if k != "seed"}
    if not shown:
        return kind
    body = ", ".join(f"{k}={v}" for k, v in shown.items())
    return f"{kind} ({body})"


# --------------------------------------------------------------------------
# builders
# --------------------------------------------------------------------------

def _draw_decay(ax, path: Path):
    data = columns(path, ("t", "value", "reference"))
    ax.plot(data["t"], data["value"], lw=1.6, label="computed product")
    ax.plot(data["t"], data["reference"], "--", lw=1.2, label="analytic overlay")
    ax.set_xlabel("time t [1/J]")
    ax.set_ylabel("transverse moment (dimensionless)")
    ax.legend(frameon=False)


def _draw_entropy(ax, path: Path):
    data = columns(path, ("t", "block_size", "entropy_per_site"))
    for k in sorted(set(data["block_size"])):
        mask = data["block_size"] == k
        ax.plot(data["t"][mask], data["entropy_per_site"][mask], lw=1.6,
                marker="o", ms=3, label=f"block of {int(k)} sites")
    ax.axhline(math.log(2.0), ls=":", color="k", lw=1.0, label="log 2 ceiling")
    ax.set_xlabel("time t [1/J]")
    ax.set_ylabel("entropy per site [nats]")
    ax.legend(frameon=False)


def _draw_purification(ax, path: Path):
    data = columns(path, ("n", "undecided_mass"))
    ax.semilogy(data["n"], data["undecided_mass"], marker="o", lw=1.6)
    ax.set_xlabel("record length n (measurements)")
    ax.set_ylabel("undecided weight mass")


def _draw_lightcone(ax, path: Path):
    data = columns(path, ("t", "x", "lhs"))
    ts = np.unique(data["t"])
    xs = np.unique(data["x"])
    grid = np.full((len(ts), len(xs)), np.nan)
    for t, x, v in zip(data["t"], data["x"], data["lhs"]):
        grid[np.searchsorted(ts, t), np.searchsorted(xs, x)] = v
    if np.isnan(grid).any():
        raise RenderError(f"{path} does not cover a full (t, x) grid")
    mesh = ax.pcolormesh(xs, ts, np.log10(np.maximum(grid, 1e-16)),
                         shading="nearest", cmap="viridis")
    ax.figure.colorbar(mesh, ax=ax, label="log10 commutator norm")
    ax.set_xlabel("site offset x (lattice units)")
    ax.set_ylabel("time t [1/J]")


def _draw_baker(ax, path: Path):
    data = columns(path, ("step", "max_deviation"))
    ax.plot(data["step"], data["max_deviation"], marker="s", lw=1.6)
    ax.set_xlabel("transport step")
    ax.set_ylabel("max |coarse density - 1| (dimensionless)")
    ax.set_ylim(bottom=-0.02)


_BUILDERS = {
    "decay": _draw_decay,
    "entropy": _draw_entropy,
    "purification": _draw_purification,
    "lightcone": _draw_lightcone,
    "baker": _draw_baker,
}


def render(spec: PlotSpec) -> Path:
    source = Path(spec.inputs[0])
    fig = Figure(figsize=FIGSIZE, dpi=DPI)
    ax = fig.subplots()
    _BUILDERS[spec.kind](ax, source)
    ax.set_title(figure_title(spec.kind, sidecar_params(source)))
    fig.tight_layout()
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out)
    return out
