"""Command-line front end.

Three subcommands, each driven by a YAML config:

* ``run``           -- Monte-Carlo learning curves and test-error summary
                       for a list of algorithms (curves.csv, summary.json)
* ``sweep``         -- (mu, sigma) grid of steady state and convergence
                       iteration per algorithm (sweep.csv)
* ``quantile-demo`` -- streaming-quartile diagnostics on a raw noise stream
                       or a recorded error file (quartiles.csv, outliers.csv,
                       means.csv)

Figures render beside the CSVs unless disabled.  Exit codes: 0 success,
2 config error, 3 numeric failure (every trial diverged).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import report
from .config import ConfigError, ExperimentConfig, load_config
from .harness import AllTrialsDivergedError, TrialConfig, monte_carlo, sweep
from .noise import StreamSpec, draw_noise, quartile_demo_records

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entrim",
        description="Robust online regression experiments: entropy criteria "
        "with streaming quartile-fence trimming.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "Monte-Carlo learning curves and MAE summary"),
        ("sweep", "grid sweep over (mu, sigma) pairs"),
        ("quantile-demo", "streaming-quartile tracking diagnostics"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, type=Path, help="YAML experiment config")
        p.add_argument("--out", type=Path, default=None, help="output directory (overrides config)")
        p.add_argument("--seed", type=int, default=None, help="base seed (overrides config)")
        p.add_argument("--trials", type=int, default=None, help="trial count (overrides config)")
        p.add_argument("--workers", type=int, default=None, help="parallel trial workers")
        p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    return parser


def _load(args) -> tuple[ExperimentConfig, Path, int]:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.trials is not None:
        if args.trials < 1:
            raise ConfigError("--trials", f"must be >= 1, got {args.trials}")
        cfg = replace(cfg, trials=args.trials)
    if args.no_figures:
        cfg = replace(cfg, figures=False)
    out_dir = Path(args.out) if args.out is not None else Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.workers is not None:
        workers = args.workers
    elif cfg.workers is not None:
        workers = cfg.workers
    else:
        workers = os.cpu_count() or 1
    if workers < 1:
        raise ConfigError("--workers", f"must be >= 1, got {workers}")
    return cfg, out_dir, workers


def _trial_config(cfg: ExperimentConfig, spec) -> TrialConfig:
    return TrialConfig(
        stream=StreamSpec(dim=cfg.dim, noise=cfg.noise),
        algo=spec.algo,
        learner=spec.learner,
        iterations=cfg.iterations,
        test_samples=cfg.test_samples,
        tail_window=cfg.tail_window,
        tracker=cfg.tracker,
    )


def _require_algorithms(cfg: ExperimentConfig) -> None:
    if not cfg.algorithms:
        raise ConfigError("algorithms", "this command needs at least one algorithm entry")


def cmd_run(args) -> int:
    cfg, out_dir, workers = _load(args)
    _require_algorithms(cfg)
    curves: dict[str, np.ndarray] = {}
    summary_algos: dict[str, dict] = {}
    labels = [spec.label for spec in cfg.algorithms]
    for spec in cfg.algorithms:
        agg = monte_carlo(_trial_config(cfg, spec), cfg.trials, cfg.seed, workers=workers)
        curves[spec.label] = agg.mean_curve
        summary_algos[spec.label] = {
            "algorithm": spec.algo.value,
            "steady_state_db": agg.steady_state_db,
            "convergence_iteration": agg.convergence_iteration,
            "mae_mean": agg.mae_mean,
            "mae_std": agg.mae_std,
            "trials_used": agg.n_trials - agg.n_diverged,
            "diverged": agg.n_diverged,
        }
    report.write_curves_csv(out_dir / report.CURVES_CSV, labels, curves)
    report.write_summary(
        out_dir / report.SUMMARY_JSON,
        {
            "seed": cfg.seed,
            "trials": cfg.trials,
            "iterations": cfg.iterations,
            "tail_window": cfg.tail_window,
            "test_samples": cfg.test_samples,
            "algorithms": summary_algos,
        },
    )
    if cfg.figures:
        report.save_learning_curves(out_dir / "curves.png", labels, curves)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg, out_dir, workers = _load(args)
    _require_algorithms(cfg)
    if cfg.sweep_mu is None or cfg.sweep_sigma is None:
        raise ConfigError("sweep", "sweep command needs a sweep section with mu and sigma axes")
    grid = [(mu, sigma) for mu in cfg.sweep_mu for sigma in cfg.sweep_sigma]
    rows = []
    for spec in cfg.algorithms:
        points = sweep(grid, _trial_config(cfg, spec), cfg.trials, cfg.seed, workers=workers)
        for (mu, sigma), point in zip(grid, points):
            rows.append((mu, sigma, spec.label, point))
    report.write_sweep_csv(out_dir / report.SWEEP_CSV, rows)
    if cfg.figures:
        report.save_sweep_scatter(out_dir / "sweep.png", rows)
    return EXIT_OK


def cmd_quantile_demo(args) -> int:
    cfg, out_dir, _ = _load(args)
    if cfg.demo_errors_file is not None:
        try:
            values = np.loadtxt(cfg.demo_errors_file, ndmin=1)
        except OSError as exc:
            raise ConfigError("demo.errors_file", f"cannot read: {exc}") from exc
    else:
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
        values = draw_noise(cfg.noise, rng, size=cfg.demo_samples)
    tracker = cfg.tracker
    if len(values) < tracker.warmup:
        raise ConfigError(
            "demo.samples", f"need at least warmup={tracker.warmup} values, got {len(values)}"
        )
    records = quartile_demo_records(values, tracker.warmup, tracker.epsilon, tracker.beta)
    report.write_quartile_demo_csvs(out_dir, records)
    if cfg.figures:
        report.save_quartile_traces(out_dir / "quartiles.png", records)
        report.save_outlier_scatter(out_dir / "outliers.png", records)
        report.save_running_means(out_dir / "means.png", records)
        kept = [r.value for r in records if not r.flagged]
        report.save_value_histogram(out_dir / "histogram_all.png", values, "all values")
        report.save_value_histogram(out_dir / "histogram_kept.png", kept, "non-outlier values")
    return EXIT_OK


_COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "quantile-demo": cmd_quantile_demo,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AllTrialsDivergedError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
