"""Matplotlib renderers for the report outputs (PNG files next to the CSVs)."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .density import DensityGrid
from .model import ModelParams, potential_xy

__all__ = [
    "save_levels_plot",
    "save_brody_plot",
    "save_freg_curve_plot",
    "save_freg_map_plot",
    "save_compare_plot",
    "save_density_plot",
    "save_bias_plot",
]


def _finish(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_levels_plot(path, params: ModelParams, levels: np.ndarray,
                     title: str = "", e_max: float | None = None):
    """Levels drawn inside the y = 0 section of the potential well."""
    if e_max is None:
        e_max = float(levels[min(len(levels) - 1, 200)])
    shown = levels[levels <= e_max]
    x_hi = 1.0
    while potential_xy(params, x_hi, 0.0) < e_max and x_hi < 50:
        x_hi *= 1.2
    x_lo = -1.0
    while potential_xy(params, x_lo, 0.0) < e_max and x_lo > -50:
        x_lo *= 1.2
    xs = np.linspace(x_lo, x_hi, 600)
    v = potential_xy(params, xs, 0.0)
    fig, ax = plt.subplots(figsize=(5, 6))
    ax.plot(xs, v, "k-", lw=1.2)
    for e in shown:
        inside = xs[v <= e]
        if inside.size > 1:
            ax.hlines(e, inside.min(), inside.max(), color="tab:blue",
                      lw=0.4, alpha=0.7)
    ax.set_xlabel("x  (y = 0 section)")
    ax.set_ylabel("E")
    ax.set_ylim(min(v.min(), shown.min() if shown.size else 0) * 1.05, e_max * 1.05)
    ax.set_title(title)
    return _finish(fig, path)


def save_brody_plot(path, curves: dict, ylabel: str = "omega",
                    adjunct: bool = False):
    """omega(E) curves, one line per labelled curve; adjunct plots 1 - omega."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for label, (centroids, omegas, errs) in curves.items():
        vals = 1.0 - omegas if adjunct else omegas
        ax.plot(centroids, vals, "-", lw=1.0, label=label)
        if errs is not None and np.any(errs):
            ax.fill_between(centroids, vals - errs, vals + errs, alpha=0.15)
    ax.set_xlabel("E (bin centroid)")
    ax.set_ylabel("1 - omega" if adjunct else ylabel)
    ax.set_ylim(-0.2, 1.2)
    ax.axhline(0.0, color="k", lw=0.5)
    ax.axhline(1.0, color="k", lw=0.5)
    ax.legend(fontsize=8)
    return _finish(fig, path)


def save_freg_curve_plot(path, energies, f_reg, sigma=None, title: str = ""):
    fig, ax = plt.subplots(figsize=(7, 4))
    if sigma is not None:
        ax.errorbar(energies, f_reg, yerr=sigma, fmt="o-", ms=3, lw=1.0,
                    capsize=2, color="tab:red")
    else:
        ax.plot(energies, f_reg, "o-", ms=3, lw=1.0, color="tab:red")
    ax.set_xlabel("E")
    ax.set_ylabel("f_reg")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title(title)
    return _finish(fig, path)


def save_freg_map_plot(path, b_values, e_values, f_grid):
    """f_reg(B, E) heat map; white = regular, black = chaotic."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    mesh = ax.pcolormesh(b_values, e_values, f_grid, cmap="gray",
                         vmin=0.0, vmax=1.0, shading="auto")
    fig.colorbar(mesh, ax=ax, label="f_reg")
    ax.set_xlabel("B")
    ax.set_ylabel("E")
    return _finish(fig, path)


def save_compare_plot(path, energies, f_reg, one_minus_omega, pearson_r: float):
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(energies, f_reg, "o-", ms=3, lw=1.0, color="tab:red", label="f_reg")
    ax.plot(energies, one_minus_omega, "s-", ms=3, lw=1.0, color="tab:blue",
            label="1 - omega")
    ax.set_xlabel("E")
    ax.set_ylabel("regularity measure")
    ax.set_ylim(-0.2, 1.2)
    ax.set_title(f"Pearson r = {pearson_r:.3f}")
    ax.legend()
    return _finish(fig, path)


def save_density_plot(path, grid: DensityGrid, title: str = ""):
    fig, ax = plt.subplots(figsize=(5.5, 5))
    ax.imshow(grid.values, origin="lower", cmap="inferno",
              extent=(grid.x[0], grid.x[-1], grid.y[0], grid.y[-1]))
    for seg in grid.boundary:
        ax.plot(seg[:, 0], seg[:, 1], "w--", lw=0.8)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title or f"level {grid.level_index}, E = {grid.energy:.4f}")
    ax.set_aspect("equal")
    return _finish(fig, path)


def save_bias_plot(path, rows: list[dict]):
    fig, ax = plt.subplots(figsize=(6, 4))
    wt = np.array([r["omega_true"] for r in rows])
    mean = np.array([r["mean_omega"] for r in rows])
    std = np.array([r["std_omega"] for r in rows])
    ax.errorbar(wt, mean - wt, yerr=std, fmt="o-", capsize=3)
    ax.axhline(0.0, color="k", lw=0.6)
    ax.set_xlabel("true omega")
    ax.set_ylabel("fitted - true")
    return _finish(fig, path)
