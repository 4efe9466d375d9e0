"""Figure construction and file rendering."""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
# fixed hash salt keeps SVG element ids stable across re-renders
matplotlib.rcParams["svg.hashsalt"] = "slp-plots"

import matplotlib.pyplot as plt

from .csvio import SweepTable, read_sweep_csv

FIGURE_NAMES = ("power", "ser", "eta")


@dataclass
class FigureSpec:
    csv_path: str
    out_dir: str
    fmt: str = "svg"
    figures: tuple = FIGURE_NAMES
    noise_draws: int = 100  # per-slot error draws behind each SER cell

    def __post_init__(self):
        if self.fmt not in ("svg", "png"):
            raise ValueError(f"format must be svg or png, got {self.fmt!r}")
        for name in self.figures:
            if name not in FIGURE_NAMES:
                raise ValueError(f"unknown figure {name!r}")


def make_power_figure(table: SweepTable):
    fig, ax = plt.subplots(figsize=(6, 4.2))
    for p in table.precoders:
        rows = table.series(p)
        ax.plot([r.gamma_db for r in rows], [r.avg_power_dbw for r in rows],
                marker="o", label=p)
    ax.set_xlabel("SINR threshold (dB)")
    ax.set_ylabel("average transmit power (dBW)")
    ax.grid(True, alpha=0.3)
    if table.precoders:
        ax.legend()
    fig.tight_layout()
    return fig


def make_ser_figure(table: SweepTable, noise_draws: int):
    """Log-scale SER; zero-error cells sit at the Monte-Carlo resolution floor.

    The floor 1/(blocks*slots*noise_draws) is the smallest nonzero rate the
    sweep could have observed; floored points get a distinct marker.
    """
    fig, ax = plt.subplots(figsize=(6, 4.2))
    for p in table.precoders:
        rows = table.series(p)
        xs = [r.gamma_db for r in rows]
        floors = [1.0 / (r.blocks * r.slots * noise_draws) for r in rows]
        ys = [r.ser_avg if r.ser_avg > 0 else f for r, f in zip(rows, floors)]
        line, = ax.plot(xs, ys, marker="o", label=p)
        zero_x = [x for x, r in zip(xs, rows) if r.ser_avg == 0]
        zero_y = [f for f, r in zip(floors, rows) if r.ser_avg == 0]
        if zero_x:
            ax.plot(zero_x, zero_y, linestyle="none", marker="v", markersize=9,
                    markerfacecolor="none", color=line.get_color())
    ax.set_yscale("log")
    ax.set_xlabel("SINR threshold (dB)")
    ax.set_ylabel("average symbol error rate")
    ax.grid(True, which="both", alpha=0.3)
    if table.precoders:
        ax.legend()
    fig.tight_layout()
    return fig


def make_eta_figure(table: SweepTable):
    fig, ax = plt.subplots(figsize=(6, 4.2))
    for p in table.precoders:
        rows = table.series(p)
        ax.plot([r.gamma_db for r in rows], [r.eta for r in rows], marker="o", label=p)
    ax.set_xlabel("SINR threshold (dB)")
    ax.set_ylabel("power efficiency (bit/s/Hz per watt)")
    ax.grid(True, alpha=0.3)
    if table.precoders:
        ax.legend()
    fig.tight_layout()
    return fig


def build_figures(table: SweepTable, spec: FigureSpec) -> dict:
    out = {}
    if "power" in spec.figures:
        out["power"] = make_power_figure(table)
    if "ser" in spec.figures:
        out["ser"] = make_ser_figure(table, spec.noise_draws)
    if "eta" in spec.figures:
        out["eta"] = make_eta_figure(table)
    return out


def render(spec: FigureSpec) -> list:
    """Read the CSV and write one image per requested figure; returns paths."""
    table = read_sweep_csv(spec.csv_path)
    if not table.rows:
        warnings.warn("sweep CSV has a valid header but no data rows; "
                      "figures will be empty", stacklevel=2)
    os.makedirs(spec.out_dir, exist_ok=True)
    figures = build_figures(table, spec)
    written = []
    # strip volatile metadata so re-rendering the same CSV is byte-stable
    metadata = {"Date": None} if spec.fmt == "svg" else None
    for name, fig in figures.items():
        path = os.path.join(spec.out_dir, f"{name}.{spec.fmt}")
        fig.savefig(path, metadata=metadata)
        plt.close(fig)
        written.append(path)
    return written
