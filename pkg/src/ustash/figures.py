"""Matplotlib renderings of the figure tables, written next to the CSVs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 150


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def _col(rows, name):
    return np.array([row[name] for row in rows], dtype=float)


def render_completion_vs_x(rows, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    xs = _col(rows, "x")
    ax.plot(xs, _col(rows, "expected_T_s"), "o-", label="model")
    if "sim_mean_T_s" in rows[0]:
        ax.plot(xs, _col(rows, "sim_mean_T_s"), "s--", label="simulation")
    ax.set_xlabel("stash download share x")
    ax.set_ylabel("expected completion time (s)")
    ax.legend()
    ax.grid(alpha=0.3)
    return _save(fig, path)


def render_hitrate_vs_n(rows, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    ns = _col(rows, "n")
    ax.plot(ns, 100 * _col(rows, "sim_hit_rate"), label="simulated")
    ax.plot(ns, 100 * _col(rows, "analytic_hit_rate"), "--", label="analytic")
    ax.set_xlabel("requests processed")
    ax.set_ylabel("cumulative hit rate (%)")
    ax.legend()
    ax.grid(alpha=0.3)
    return _save(fig, path)


def render_s_sweep(rows, path: Path) -> Path:
    fig, ax1 = plt.subplots(figsize=(5.5, 3.8))
    ss = _col(rows, "s")
    ax1.plot(ss, 100 * _col(rows, "expected_hit_rate"), "o-", color="tab:blue",
             label="expected hit rate")
    if "sim_hit_rate" in rows[0]:
        ax1.plot(ss, 100 * _col(rows, "sim_hit_rate"), "s--", color="tab:cyan",
                 label="simulated hit rate")
    ax1.set_xlabel("popularity exponent s")
    ax1.set_ylabel("hit rate (%)", color="tab:blue")
    ax2 = ax1.twinx()
    ax2.plot(ss, _col(rows, "expected_T_s"), "^-", color="tab:red",
             label="expected completion time")
    ax2.set_ylabel("expected completion time (s)", color="tab:red")
    ax1.grid(alpha=0.3)
    return _save(fig, path)


def render_rv_sweep(rows, path: Path) -> Path:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.8))
    rv = _col(rows, "r_v")
    ax1.semilogx(rv, 100 * _col(rows, "hit_rate"), "o-", label="hit rate")
    ax1.semilogx(rv, 100 * _col(rows, "byte_hit_rate"), "s--", label="byte hit rate")
    ax1.set_xlabel("mixing ratio r_v")
    ax1.set_ylabel("rate (%)")
    ax1.legend()
    ax1.grid(alpha=0.3)
    ax2.semilogx(rv, 100 * _col(rows, "video_full_hit_rate"), "o-", label="video full hits")
    ax2.semilogx(rv, 100 * _col(rows, "video_partial_hit_rate"), "s--",
                 label="video partial hits")
    ax2.set_xlabel("mixing ratio r_v")
    ax2.set_ylabel("rate among video requests (%)")
    ax2.legend()
    ax2.grid(alpha=0.3)
    return _save(fig, path)


def render_scenarios(rows, path: Path) -> Path:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.8))
    names = [row["scenario"] for row in rows]
    ax1.bar(names, _col(rows, "mean_completion_s"), color="tab:blue")
    ax1.set_ylabel("mean completion time (s)")
    ax1.tick_params(axis="x", rotation=20)
    width = 0.4
    idx = np.arange(len(names))
    ax2.bar(idx - width / 2, _col(rows, "user_cost_cents"), width, label="user cost")
    ax2.bar(idx + width / 2, _col(rows, "stash_cost_cents"), width, label="stash cost")
    ax2.set_xticks(idx, names, rotation=20)
    ax2.set_ylabel("cost (cents)")
    ax2.legend()
    return _save(fig, path)


def render_h_surface(rows, path: Path) -> Path:
    xs = sorted({row["x"] for row in rows})
    ratios = sorted({row["omega_ratio"] for row in rows})
    grid = np.full((len(ratios), len(xs)), np.nan)
    x_index = {x: i for i, x in enumerate(xs)}
    r_index = {r: i for i, r in enumerate(ratios)}
    for row in rows:
        grid[r_index[row["omega_ratio"]], x_index[row["x"]]] = row["h_dist"]
    fig, ax = plt.subplots(figsize=(6, 4.2))
    mesh = ax.pcolormesh(xs, ratios, grid, shading="nearest", cmap="viridis")
    ax.set_yscale("log")
    ax.set_xlabel("stash download share x")
    ax.set_ylabel("bandwidth ratio omega_u / omega_b")
    fig.colorbar(mesh, ax=ax, label="distance to origin")
    best = min(rows, key=lambda row: row["h_dist"])
    ax.plot(best["x"], best["omega_ratio"], "r*", markersize=12,
            label=f"min {best['h_dist']:.3f}")
    ax.legend(loc="upper left")
    return _save(fig, path)


def render_model_curve(rows, path: Path) -> Path:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.8))
    xs = _col(rows, "x")
    ax1.plot(xs, _col(rows, "expected_T_s"), "o-")
    ax1.set_xlabel("stash download share x")
    ax1.set_ylabel("expected completion time (s)")
    ax1.grid(alpha=0.3)
    ax2.plot(xs, _col(rows, "cost_stash_cents"), label="stash")
    ax2.plot(xs, _col(rows, "cost_user_cents"), label="user")
    ax2.plot(xs, _col(rows, "cost_system_cents"), label="system")
    ax2.set_xlabel("stash download share x")
    ax2.set_ylabel("cost (cents)")
    ax2.legend()
    ax2.grid(alpha=0.3)
    return _save(fig, path)


_RENDERERS = {
    "fig5b_completion_vs_x": render_completion_vs_x,
    "fig6_hitrate_vs_n": render_hitrate_vs_n,
    "fig9_s_sweep": render_s_sweep,
    "fig10_rv_sweep": render_rv_sweep,
    "fig11_scenarios": render_scenarios,
    "fig12_h_surface": render_h_surface,
    "model_curve": render_model_curve,
}


def render(name: str, rows, path: Path) -> Path | None:
    """Render a known figure table to PNG; unknown names are skipped."""
    renderer = _RENDERERS.get(name)
    if renderer is None or not rows:
        return None
    return renderer(rows, path)
