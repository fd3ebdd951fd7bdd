"""Command-line interface.

Subcommands: generate, analyze, model, simulate, compare, sweep.
Global flags: --config, --seed, --out, --format, --no-plots.

Exit codes: 0 success, 2 config parse error, 3 unknown config key,
4 out-of-domain config value, 5 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .analytics import (entropy_cdf, load_request_sets, similarity_matrix,
                        source_counts_by_content, write_entropy_cdf_csv,
                        write_similarity_csv, SourceCounts)
from .config import (ConfigError, ExperimentConfig, SweepSpec, _DEFAULT_SWEEP_GRIDS,
                     default_config, load_config, SWEEP_PARAMETERS)
from .experiments import (build_trace, emit_figures, emit_report, run_compare,
                          run_model_curve, run_simulate, run_sweep)
from .sim import write_outcome_log
from .workload import ContentCatalog

IO_ERROR_EXIT = 5


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ustash",
        description="Collaborative content-delivery modeling and simulation "
                    "for on-board stashes.",
    )
    parser.add_argument("--version", action="version", version=f"ustash {__version__}")
    parser.add_argument("--config", metavar="PATH", help="TOML config file (default: built-in defaults)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--out", metavar="DIR", help="output directory (default: from config)")
    parser.add_argument("--format", choices=("csv", "json"), help="tabular output format")
    parser.add_argument("--no-plots", action="store_true", help="skip PNG figure rendering")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic request trace")
    p.add_argument("--trace-csv", default="trace.csv", help="trace CSV filename")
    p.add_argument("--trace-json", default=None, help="also write a JSON trace document")

    p = sub.add_parser("analyze", help="similarity and entropy of request sets")
    p.add_argument("--requests", required=True, metavar="CSV",
                   help="request-set file with header label,content_id")
    p.add_argument("--observed-sources", action="store_true",
                   help="normalize entropy by observed sources instead of all labels")

    p = sub.add_parser("model", help="closed-form sweep over the split ratio")
    p.add_argument("--grid", type=int, default=21, help="number of x grid points")

    p = sub.add_parser("simulate", help="run one trace-driven simulation")
    p.add_argument("--log", action="store_true", help="write the per-request outcome log")

    sub.add_parser("compare", help="run the four canonical access scenarios")

    p = sub.add_parser("sweep", help="sweep one parameter")
    p.add_argument("parameter", choices=SWEEP_PARAMETERS)
    p.add_argument("--values", help="comma-separated grid values")
    p.add_argument("--sim", action="store_true",
                   help="add simulation columns to x and s sweeps")
    p.add_argument("--jobs", type=int, default=1, help="worker pool size for sweep points")
    return parser


def _resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else default_config()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.out is not None:
        cfg = replace(cfg, output=replace(cfg.output, directory=args.out))
    if args.format is not None:
        cfg = replace(cfg, output=replace(cfg.output, format=args.format))
    if args.no_plots:
        cfg = replace(cfg, output=replace(cfg.output, plots=False))
    return cfg


def _emit(report, cfg) -> Path:
    outdir = Path(cfg.output.directory)
    emit_figures(report, outdir, plots=cfg.output.plots)
    if cfg.output.format == "json":
        for name, rows in report.figures.items():
            with open(outdir / f"{name}.json", "w") as fh:
                json.dump(rows, fh, indent=2)
    emit_report(report, outdir)
    return outdir


def _cmd_generate(args, cfg: ExperimentConfig) -> None:
    outdir = Path(cfg.output.directory)
    outdir.mkdir(parents=True, exist_ok=True)
    trace = build_trace(cfg)
    trace.to_csv(outdir / args.trace_csv)
    print(f"wrote {outdir / args.trace_csv} ({len(trace)} requests, "
          f"{trace.unique_contents()} unique contents)")
    if args.trace_json:
        from .config import config_to_toml

        trace.to_json(outdir / args.trace_json, {"toml": config_to_toml(cfg)})
        print(f"wrote {outdir / args.trace_json}")


def _cmd_analyze(args, cfg: ExperimentConfig) -> None:
    outdir = Path(cfg.output.directory)
    outdir.mkdir(parents=True, exist_ok=True)
    groups = load_request_sets(args.requests)
    if len(groups) >= 2:
        matrix = similarity_matrix(groups)
        write_similarity_csv(outdir / "jaccard_matrix.csv", groups, matrix)
        print(f"wrote {outdir / 'jaccard_matrix.csv'} ({len(groups)} groups)")
    else:
        print("fewer than 2 groups; skipping the similarity matrix")
    by_content = source_counts_by_content(args.requests)
    if args.observed_sources:
        by_content = {cid: SourceCounts.observed(sc.counts) for cid, sc in by_content.items()}
    cdf = entropy_cdf(by_content.values())
    write_entropy_cdf_csv(outdir / "entropy_cdf.csv", cdf)
    print(f"wrote {outdir / 'entropy_cdf.csv'} ({len(by_content)} contents)")


def _cmd_model(args, cfg: ExperimentConfig) -> None:
    report = run_model_curve(cfg, args.grid)
    outdir = _emit(report, cfg)
    print(f"optimal split x* = {report.extras['x_optimal']:.4f}")
    print(f"wrote {outdir / 'model_curve.csv'}")


def _cmd_simulate(args, cfg: ExperimentConfig) -> None:
    report, outcomes = run_simulate(cfg, collect_outcomes=args.log)
    outdir = _emit(report, cfg)
    if args.log:
        write_outcome_log(outdir / "outcomes.csv", outcomes)
    metrics = report.scenario_metrics["run"]
    print(f"hit rate {metrics.hit_rate:.4f}, partial {metrics.partial_hit_rate:.4f}, "
          f"byte hit rate {metrics.byte_hit_rate:.4f}")
    print(f"mean completion {metrics.mean_completion_s:.3f} s, "
          f"stored {metrics.total_stored_mb / 1000:.2f} GB")
    print(f"wrote {outdir / 'report.json'}")


def _cmd_compare(args, cfg: ExperimentConfig) -> None:
    report = run_compare(cfg)
    outdir = _emit(report, cfg)
    rows = report.figures["fig11_scenarios"]
    width = max(len(r["scenario"]) for r in rows)
    print(f"{'scenario':<{width}}  {'E(T) s':>9}  {'user c':>12}  {'stash c':>12}")
    for row in rows:
        print(f"{row['scenario']:<{width}}  {row['mean_completion_s']:>9.3f}  "
              f"{row['user_cost_cents']:>12.1f}  {row['stash_cost_cents']:>12.1f}")
    print(f"wrote {outdir / 'fig11_scenarios.csv'}")


def _cmd_sweep(args, cfg: ExperimentConfig) -> None:
    values = None
    if args.values:
        try:
            values = tuple(float(v) for v in args.values.split(","))
        except ValueError:
            raise ConfigError(f"--values: expected comma-separated numbers, got {args.values!r}")
    if cfg.sweep is None or cfg.sweep.parameter != args.parameter or values is not None:
        cfg = replace(cfg, sweep=SweepSpec(
            args.parameter,
            values if values is not None else _DEFAULT_SWEEP_GRIDS[args.parameter],
        ))
    report = run_sweep(cfg, with_sim=args.sim, jobs=args.jobs)
    outdir = _emit(report, cfg)
    name = next(iter(report.figures))
    print(f"wrote {outdir / (name + '.csv')} ({len(report.figures[name])} rows)")


_COMMANDS = {
    "generate": _cmd_generate,
    "analyze": _cmd_analyze,
    "model": _cmd_model,
    "simulate": _cmd_simulate,
    "compare": _cmd_compare,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
        _COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return IO_ERROR_EXIT
    return 0


if __name__ == "__main__":
    sys.exit(main())
