"""Render figures from geocascade CSV/graph outputs.

The renderer never recomputes model quantities; every curve comes straight
from columns of the input files, so the simulation/bounds package stays
the single source of truth. Rendering is a pure function of the inputs.
"""

import csv
import json
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SWEEP_COLUMNS = (
    "alpha",
    "fbar",
    "stderr",
    "upper",
    "lower",
    "lower_applicable",
    "trials",
    "disconnected",
)
THRESHOLD_COLUMNS = ("q", "alpha_lower")

FIGURES = ("fig2", "fig4", "fig6", "fig7", "fig8", "snapshot")


class SchemaError(ValueError):
    """An input file does not carry the columns a figure needs."""


@dataclass
class FigureSpec:
    """What to draw: a figure id, its input files, and the output path."""

    figure: str
    inputs: list
    output: str
    labels: list = field(default_factory=list)
    alpha_upper_json: str = None
    attack_radius: float = None
    title: str = None

    def __post_init__(self):
        if self.figure not in FIGURES:
            raise ValueError(f"unknown figure id {self.figure!r}")
        if not self.inputs:
            raise ValueError("at least one input file is required")


def read_columns(path, required):
    """Parse a CSV into float arrays, checking the needed columns exist."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in required:
            if col not in header:
                raise SchemaError(f"missing column {col!r} in {path}")
        rows = list(reader)
    return {
        col: np.array([float(row[col]) for row in rows]) for col in header
    }


def read_graph_text(path):
    """Parse the `id x y` / `edge u v` snapshot format."""
    positions = []
    edges = []
    with open(path) as fh:
        for raw in fh:
            parts = raw.split()
            if not parts:
                continue
            if parts[0] == "edge":
                edges.append((int(parts[1]), int(parts[2])))
            else:
                positions.append((float(parts[1]), float(parts[2])))
    return np.asarray(positions, dtype=float), edges


def _labels(spec):
    if spec.labels:
        if len(spec.labels) != len(spec.inputs):
            raise ValueError("one label per input file is required")
        return spec.labels
    out = []
    for path in spec.inputs:
        stem = path.rsplit("/", 1)[-1]
        out.append(stem[:-4] if stem.endswith(".csv") else stem)
    return out


def _gapped_lower(data):
    """Lower-bound column with non-applicable rows masked out, not joined."""
    lower = data["lower"].copy()
    lower[data["lower_applicable"] < 0.5] = np.nan
    return lower


def _render_ratio_curves(spec, with_upper=False):
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for path, label in zip(spec.inputs, _labels(spec)):
        data = read_columns(path, SWEEP_COLUMNS)
        ax.plot(data["alpha"], data["fbar"], marker="o", ms=3, label=label)
        if with_upper:
            ax.plot(data["alpha"], data["upper"], ls="--", label=f"{label} upper bound")
    ax.set_xlabel("tolerance")
    ax.set_ylabel("mean failure ratio")
    ax.set_ylim(-0.02, 1.05)
    ax.legend()
    return fig


def render_fig2(spec):
    return _render_ratio_curves(spec)


def render_fig4(spec):
    return _render_ratio_curves(spec, with_upper=True)


def render_fig6(spec):
    if not spec.alpha_upper_json:
        raise ValueError("fig6 needs the threshold sidecar (alpha_upper_json)")
    fig = _render_ratio_curves(spec)
    with open(spec.alpha_upper_json) as fh:
        sidecar = json.load(fh)
    alpha_upper = sidecar.get("alpha_upper")
    if alpha_upper is None:
        raise SchemaError(
            f"sidecar {spec.alpha_upper_json} carries no finite alpha_upper"
        )
    ax = fig.axes[0]
    ax.axvline(alpha_upper, ls="--", color="black", label="step threshold")
    ax.legend()
    return fig


def render_fig7(spec):
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for path, label in zip(spec.inputs, _labels(spec)):
        data = read_columns(path, SWEEP_COLUMNS)
        ax.errorbar(
            data["alpha"],
            data["fbar"],
            yerr=data["stderr"],
            marker="o",
            ms=3,
            capsize=2,
            label=f"{label} simulation",
        )
        ax.plot(data["alpha"], data["upper"], ls="--", label=f"{label} upper bound")
        ax.plot(data["alpha"], _gapped_lower(data), ls=":", label=f"{label} lower bound")
    ax.set_xlabel("tolerance")
    ax.set_ylabel("mean failure ratio")
    ax.set_ylim(-0.02, 1.05)
    ax.legend()
    return fig


def render_fig8(spec):
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for path, label in zip(spec.inputs, _labels(spec)):
        data = read_columns(path, THRESHOLD_COLUMNS)
        ax.plot(data["q"], data["alpha_lower"], marker="o", ms=3, label=label)
    ax.set_xlabel("attack radius / connection radius")
    ax.set_ylabel("lower critical tolerance")
    ax.legend()
    return fig


def render_snapshot(spec):
    if spec.attack_radius is None:
        raise ValueError("snapshot needs the attack radius")
    positions, edges = read_graph_text(spec.inputs[0])
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    for u, v in edges:
        ax.plot(
            [positions[u, 0], positions[v, 0]],
            [positions[u, 1], positions[v, 1]],
            color="0.7",
            lw=0.5,
            zorder=1,
        )
    if positions.size:
        ax.scatter(positions[:, 0], positions[:, 1], s=8, color="C0", zorder=2)
    ax.add_patch(
        plt.Circle((0.0, 0.0), spec.attack_radius, color="C3", alpha=0.3, zorder=3)
    )
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    return fig


_RENDERERS = {
    "fig2": render_fig2,
    "fig4": render_fig4,
    "fig6": render_fig6,
    "fig7": render_fig7,
    "fig8": render_fig8,
    "snapshot": render_snapshot,
}


def render(spec):
    """Draw the figure and write it to spec.output; returns the Figure."""
    fig = _RENDERERS[spec.figure](spec)
    if spec.title:
        fig.axes[0].set_title(spec.title)
    fig.tight_layout()
    fig.savefig(spec.output, dpi=150)
    plt.close(fig)
    return fig
