"""Experiment orchestration: scenario comparisons and parameter sweeps.

Each experiment produces a Report holding the resolved config echo, the
metrics, and plot-ready figure tables. emit_figures writes one CSV per
figure (and a PNG rendering next to it when plots are enabled). Sweep
points are independent seeded runs; their outputs are ordered by sweep
index regardless of completion order.
"""

from __future__ import annotations

import csv
import datetime
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, config_to_toml
from .model import (ModelParams, expected_completion, expected_hit_rate,
                    expected_unique, h_metric, model_sweep, x_optimal)
from .sim import RunMetrics, SimParams, SplitPolicy, compare_scenarios, run, write_outcome_log
from .workload import (ContentCatalog, ContentClass, Trace, WorkloadConfig,
                       generate_trace, unique_count_std)


@dataclass
class Report:
    """Everything needed to reproduce and plot one experiment."""

    kind: str
    config_toml: str
    provenance: dict
    scenario_metrics: dict[str, RunMetrics] = field(default_factory=dict)
    figures: dict[str, list[dict]] = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "provenance": self.provenance,
            "config": self.config_toml,
            "scenario_metrics": {k: m.to_dict() for k, m in self.scenario_metrics.items()},
            "figures": self.figures,
            "extras": self.extras,
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def _provenance() -> dict:
    return {
        "tool": "ustash",
        "version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }


def _new_report(kind: str, cfg: ExperimentConfig) -> Report:
    return Report(kind=kind, config_toml=config_to_toml(cfg), provenance=_provenance())


def trace_rng(seed: int, point: int | None = None) -> np.random.Generator:
    """Trace stream for the base run, or for one sweep point."""
    key = [seed, 1] if point is None else [seed, 1, point]
    return np.random.default_rng(np.random.SeedSequence(key))


def build_trace(cfg: ExperimentConfig, catalog: ContentCatalog | None = None,
                point: int | None = None,
                workload: WorkloadConfig | None = None) -> Trace:
    workload = workload or cfg.workload
    if catalog is None:
        catalog = ContentCatalog.from_config(workload)
    return generate_trace(workload, trace_rng(cfg.seed, point), catalog)


# ---------------------------------------------------------------------------
# Experiments

def run_compare(cfg: ExperimentConfig, trace: Trace | None = None) -> Report:
    """Run the canonical scenarios on one trace and tabulate cost and delay."""
    report = _new_report("compare", cfg)
    if trace is None:
        trace = build_trace(cfg)
    metrics = compare_scenarios(trace, cfg.sim_params(), cfg.scenarios,
                                cfg.sim.sample_interval)
    report.scenario_metrics = metrics
    report.figures["fig11_scenarios"] = [
        {
            "scenario": name,
            "mean_completion_s": m.mean_completion_s,
            "user_cost_cents": m.user_cost_cents,
            "stash_cost_cents": m.stash_cost_cents,
            "system_cost_cents": m.user_cost_cents + m.stash_cost_cents,
            "hit_rate": m.hit_rate,
            "byte_hit_rate": m.byte_hit_rate,
        }
        for name, m in metrics.items()
    ]
    return report


def mixture_hit_rate(workload: WorkloadConfig, n: int) -> float:
    """Analytic hit rate of the two-class mixture after n requests.

    Splits n by the expected class shares and counts one miss per
    expected unique content in each class.
    """
    video_share = 1.0 / (1.0 + workload.r_v)
    n_v = n * video_share
    n_nv = n - n_v
    uniques = 0.0
    if n_v > 0:
        uniques += expected_unique(workload.video.zipf, int(round(n_v)) or 1)
    if n_nv > 0:
        uniques += expected_unique(workload.nonvideo.zipf, int(round(n_nv)) or 1)
    return max(0.0, (n - uniques) / n)


def run_simulate(cfg: ExperimentConfig, collect_outcomes: bool = False,
                 trace: Trace | None = None):
    """Single run with the configured policy; returns (Report, outcomes|None)."""
    report = _new_report("simulate", cfg)
    if trace is None:
        trace = build_trace(cfg)
    result = run(trace, cfg.policy, cfg.sim_params(), cfg.sim.sample_interval,
                 collect_outcomes=collect_outcomes)
    metrics, outcomes = result if collect_outcomes else (result, None)
    report.scenario_metrics = {"run": metrics}
    report.figures["fig6_hitrate_vs_n"] = [
        {
            "n": n,
            "sim_hit_rate": rate,
            "analytic_hit_rate": mixture_hit_rate(cfg.workload, n),
        }
        for n, rate in metrics.hit_rate_series
    ]
    return report, outcomes


def run_model_curve(cfg: ExperimentConfig, grid_points: int = 21) -> Report:
    """Analytical sweep of the model over an x grid."""
    report = _new_report("model", cfg)
    xs = np.linspace(0.0, 1.0, grid_points)
    report.figures["model_curve"] = model_sweep(cfg.model, xs)
    report.extras["x_optimal"] = x_optimal(cfg.model.net, cfg.model.lambda_e)
    return report


def _sweep_x(cfg: ExperimentConfig, values, with_sim: bool, jobs: int) -> list[dict]:
    rows = model_sweep(cfg.model, values)
    for row in rows:
        del row["cost_system_cents"]  # fig5b focuses on completion time
    if with_sim:
        catalog = ContentCatalog.from_config(cfg.workload)

        def point(i_x):
            i, x = i_x
            trace = build_trace(cfg, catalog, point=i)
            metrics = run(trace, SplitPolicy.fixed(float(x)), cfg.sim_params(),
                          cfg.sim.sample_interval)
            return metrics.mean_completion_s

        sim_means = _map_ordered(point, list(enumerate(values)), jobs)
        for row, sim_t in zip(rows, sim_means):
            row["sim_mean_T_s"] = sim_t
    return rows


def _sweep_s(cfg: ExperimentConfig, values, with_sim: bool, jobs: int) -> list[dict]:
    x_opt = x_optimal(cfg.model.net, cfg.model.lambda_e)
    rows = []
    for s in values:
        mp = cfg.model.with_(zipf=replace(cfg.model.zipf, s=float(s)))
        rows.append({
            "s": float(s),
            "expected_hit_rate": expected_hit_rate(mp.zipf, mp.n),
            "expected_T_s": expected_completion(mp, x_opt),
        })
    if with_sim:
        base_catalog = ContentCatalog.from_config(cfg.workload)

        def point(i_s):
            i, s = i_s
            catalog = base_catalog.with_zipf_exponent(float(s))
            trace = build_trace(cfg, catalog, point=i)
            return run(trace, cfg.policy, cfg.sim_params(), cfg.sim.sample_interval)

        for row, metrics in zip(rows, _map_ordered(point, list(enumerate(values)), jobs)):
            row["sim_hit_rate"] = metrics.hit_rate
    return rows


def _sweep_rv(cfg: ExperimentConfig, values, jobs: int) -> list[dict]:
    catalog = ContentCatalog.from_config(cfg.workload)

    def point(i_rv):
        i, r_v = i_rv
        workload = replace(cfg.workload, r_v=float(r_v))
        trace = build_trace(cfg, catalog, point=i, workload=workload)
        return run(trace, cfg.policy, cfg.sim_params(), cfg.sim.sample_interval)

    rows = []
    for r_v, metrics in zip(values, _map_ordered(point, list(enumerate(values)), jobs)):
        rows.append({
            "r_v": float(r_v),
            "hit_rate": metrics.hit_rate,
            "partial_hit_rate": metrics.partial_hit_rate,
            "byte_hit_rate": metrics.byte_hit_rate,
            "video_full_hit_rate": metrics.class_rate(ContentClass.VIDEO, "full_hits"),
            "video_partial_hit_rate": metrics.class_rate(ContentClass.VIDEO, "partial_hits"),
        })
    return rows


def h_surface(mp: ModelParams, ratios, xs) -> list[dict]:
    """Objective surface over the stash share and the bandwidth ratio.

    The ratio scales the user bandwidth relative to the stash bandwidth;
    all three normalized metrics are recomputed per ratio.
    """
    rows = []
    for ratio in ratios:
        net = replace(mp.net, omega_u=float(ratio) * mp.net.omega_b)
        mp_r = mp.with_(net=net)
        for x in xs:
            p = h_metric(mp_r, float(x))
            rows.append({
                "x": p.x, "omega_ratio": float(ratio),
                "t_norm": p.t_norm, "cb_norm": p.cb_norm, "cu_norm": p.cu_norm,
                "h_sum": p.h_sum, "h_dist": p.h_dist,
            })
    return rows


def _sweep_omega(cfg: ExperimentConfig, values) -> list[dict]:
    xs = np.linspace(0.0, 1.0, 101)
    return h_surface(cfg.model, values, xs)


def run_sweep(cfg: ExperimentConfig, with_sim: bool = False, jobs: int = 1) -> Report:
    if cfg.sweep is None:
        raise ValueError("config has no [sweep] section")
    parameter, values = cfg.sweep.parameter, cfg.sweep.values
    report = _new_report(f"sweep:{parameter}", cfg)
    if parameter == "x":
        report.figures["fig5b_completion_vs_x"] = _sweep_x(cfg, values, with_sim, jobs)
        report.extras["x_optimal"] = x_optimal(cfg.model.net, cfg.model.lambda_e)
    elif parameter == "s":
        report.figures["fig9_s_sweep"] = _sweep_s(cfg, values, with_sim, jobs)
    elif parameter == "r_v":
        report.figures["fig10_rv_sweep"] = _sweep_rv(cfg, values, jobs)
    elif parameter == "omega_ratio":
        report.figures["fig12_h_surface"] = _sweep_omega(cfg, values)
    else:  # pragma: no cover - config validation rejects this earlier
        raise ValueError(f"unknown sweep parameter {parameter!r}")
    return report


def _map_ordered(fn, items: list, jobs: int) -> list:
    """Apply fn to items, optionally in a pool; results keep item order."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Model/simulator cross-validation

def model_sim_agreement(mp: ModelParams, xs, seed: int = 0) -> list[dict]:
    """Simulate the model's own regime and compare against the closed form.

    Builds a single-class catalog with every content at the mean size and
    whole-content views, runs a fixed-split simulation per grid point in
    full-size hit-time mode, and reports relative completion-time error
    plus the unique-miss count against its analytic expectation.
    """
    catalog = ContentCatalog.uniform(mp.zipf.m, mp.mean_size_mb, mp.zipf.s)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    ranks = catalog.sample_ranks(ContentClass.NON_VIDEO, rng, mp.n)
    from .workload import Request

    requests = [Request(i, f"n{rank}", 1.0) for i, rank in enumerate(ranks)]
    trace = Trace(requests, catalog, None, seed)

    e_y = expected_unique(mp.zipf, mp.n)
    band = 4.0 * unique_count_std(mp.zipf, mp.n)
    params = SimParams(mp.net, mp.cost, stash_enabled=True, hit_time="full_size")
    rows = []
    for x in xs:
        metrics = run(trace, SplitPolicy.fixed(float(x)), params, sample_interval=0)
        model_t = expected_completion(mp, float(x))
        rows.append({
            "x": float(x),
            "model_T_s": model_t,
            "sim_T_s": metrics.mean_completion_s,
            "rel_err": abs(metrics.mean_completion_s - model_t) / model_t,
            "sim_misses": metrics.misses,
            "expected_unique": e_y,
            "unique_band": band,
        })
    return rows


# ---------------------------------------------------------------------------
# Emission

_FIGURE_COLUMNS = {
    "fig5b_completion_vs_x": ["x", "expected_T_s", "sim_mean_T_s"],
    "fig6_hitrate_vs_n": ["n", "sim_hit_rate", "analytic_hit_rate"],
    "fig9_s_sweep": ["s", "expected_hit_rate", "expected_T_s", "sim_hit_rate"],
    "fig10_rv_sweep": ["r_v", "hit_rate", "partial_hit_rate", "byte_hit_rate",
                       "video_full_hit_rate", "video_partial_hit_rate"],
    "fig11_scenarios": ["scenario", "mean_completion_s", "user_cost_cents",
                        "stash_cost_cents", "system_cost_cents", "hit_rate",
                        "byte_hit_rate"],
    "fig12_h_surface": ["x", "omega_ratio", "t_norm", "cb_norm", "cu_norm",
                        "h_sum", "h_dist"],
    "model_curve": ["x", "expected_T_s", "cost_stash_cents", "cost_user_cents",
                    "cost_system_cents", "t_norm", "cb_norm", "cu_norm",
                    "h_sum", "h_dist"],
}


def _columns_for(name: str, rows: list[dict]) -> list[str]:
    preferred = _FIGURE_COLUMNS.get(name, [])
    present = list(rows[0].keys())
    ordered = [c for c in preferred if c in present]
    return ordered + [c for c in present if c not in ordered]


def write_rows_csv(path, rows: list[dict], columns: list[str] | None = None) -> None:
    if not rows:
        raise ValueError("no rows to write")
    columns = columns or list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([
                v if isinstance(v, (str, int)) else f"{v:.10g}"
                for v in (row[c] for c in columns)
            ])


def emit_figures(report: Report, outdir, plots: bool = True) -> list[Path]:
    """Write one CSV per figure in the report, plus a PNG rendering each."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths: list[Path] = []
    for name, rows in report.figures.items():
        csv_path = outdir / f"{name}.csv"
        write_rows_csv(csv_path, rows, _columns_for(name, rows))
        paths.append(csv_path)
        if plots:
            from . import figures

            png = figures.render(name, rows, outdir / f"{name}.png")
            if png is not None:
                paths.append(png)
    return paths


def emit_report(report: Report, outdir) -> Path:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "report.json"
    report.to_json(path)
    (outdir / "config-echo.toml").write_text(report.config_toml)
    return path
