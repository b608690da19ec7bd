"""Monte-Carlo experiment engine.

``run_trial`` drives one learner over one seeded stream and records the
per-iteration weight misalignment in dB plus a test-set mean absolute error
from the frozen final state.  ``monte_carlo`` averages many trials;
``sweep`` runs a (mu, sigma) grid of such averages.

Seeding: trial ``t`` of an experiment with base seed ``s`` uses SeedSequence
entropy ``(s, t)``, with spawn keys 0/1/2 for the optimum-weight draw, the
training stream, and the testing stream.  The derivation never involves the
algorithm, so every algorithm sees identical streams (paired comparisons).
Trials are independent work items; results reduce in trial order, so
parallel and serial runs agree exactly.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .learners import Algorithm, LearnerConfig, OnlineLearner
from .noise import StreamSpec, generate_stream, make_wopt
from .quartiles import TrackerParams

MISALIGNMENT_FLOOR_DB = -240.0  # reported when the deviation is below 1e-12

_WOPT, _TRAIN, _TEST = 0, 1, 2


class AllTrialsDivergedError(RuntimeError):
    """Every Monte-Carlo trial produced non-finite weights."""


@dataclass(frozen=True, eq=False)
class TrialConfig:
    """Everything one trial needs except its seed.

    ``stream.seed`` and, when ``stream.w_opt`` is None, the optimum weights
    are overridden per trial from the trial seed.
    """

    stream: StreamSpec
    algo: Algorithm
    learner: LearnerConfig = LearnerConfig()
    iterations: int = 2000
    test_samples: int = 2000
    tail_window: int = 200
    tracker: TrackerParams = TrackerParams()

    def __post_init__(self):
        if self.iterations <= self.tail_window:
            raise ValueError(
                f"iterations ({self.iterations}) must exceed tail_window ({self.tail_window})"
            )
        if self.test_samples < 0:
            raise ValueError(f"test_samples must be non-negative, got {self.test_samples!r}")


@dataclass(frozen=True, eq=False)
class LearningCurve:
    """Per-iteration misalignment in dB with its derived statistics."""

    misalignment_db: np.ndarray
    steady_state_db: float
    convergence_iteration: int | None


@dataclass(frozen=True, eq=False)
class TrialResult:
    curve: LearningCurve
    mae: float | None
    diverged: bool


@dataclass(frozen=True, eq=False)
class MonteCarloResult:
    """Trial-averaged learning curve and test-error statistics.

    ``steady_state_db`` and ``convergence_iteration`` are computed on the
    mean curve.  ``mae_std`` is the sample standard deviation (ddof=1)
    across per-trial MAEs.
    """

    mean_curve: np.ndarray
    steady_state_db: float
    convergence_iteration: int | None
    mae_mean: float | None
    mae_std: float | None
    n_trials: int
    n_diverged: int


@dataclass(frozen=True)
class SweepPoint:
    mu: float
    sigma: float
    steady_state_db: float  # nan when every trial diverged
    convergence_iteration: int | None
    diverged: int


def misalignment(w: np.ndarray, w_opt: np.ndarray) -> float:
    """Weight-error norm in dB: 20*log10(||w - w_opt||), floored at -240 dB
    so exact convergence stays finite.  Assumes unit-norm w_opt."""
    w = np.asarray(w, dtype=float)
    w_opt = np.asarray(w_opt, dtype=float)
    if w.shape != w_opt.shape:
        raise ValueError(f"shape mismatch: {w.shape} vs {w_opt.shape}")
    dev = float(np.linalg.norm(w - w_opt))
    if dev < 1e-12:
        return MISALIGNMENT_FLOOR_DB
    return 20.0 * math.log10(dev)


def steady_state(curve: np.ndarray, tail_window: int) -> float:
    """Mean of the final ``tail_window`` curve entries."""
    curve = np.asarray(curve, dtype=float)
    if not 0 < tail_window <= curve.size:
        raise ValueError(f"tail_window {tail_window} invalid for curve of length {curve.size}")
    return float(np.mean(curve[-tail_window:]))


def convergence_iteration(curve, steady_state_db: float) -> int | None:
    """First index whose misalignment is within 2 dB of the steady state."""
    curve = np.asarray(curve, dtype=float)
    if curve.size == 0:
        raise ValueError("curve must be non-empty")
    hits = np.nonzero(curve <= steady_state_db + 2.0)[0]
    return int(hits[0]) if hits.size else None


def _trial_seed_seq(trial_seed, purpose: int) -> np.random.SeedSequence:
    if isinstance(trial_seed, np.random.SeedSequence):
        return np.random.SeedSequence(trial_seed.entropy, spawn_key=(purpose,))
    return np.random.SeedSequence(trial_seed, spawn_key=(purpose,))


def evaluate_mae(learner: OnlineLearner, samples) -> float:
    """Mean absolute prediction error over a sample list with frozen state."""
    X = np.array([s.x for s in samples])
    d = np.array([s.d for s in samples])
    return float(np.mean(np.abs(d - (X @ learner.w + learner.bias))))


def run_trial(config: TrialConfig, trial_seed) -> TrialResult:
    """One seeded trial: train over the stream, then test with frozen state.

    A trial whose weights or bias go non-finite is marked diverged; its
    curve is truncated with NaNs and it reports no MAE.
    """
    spec = config.stream
    if spec.w_opt is not None:
        w_opt = spec.w_opt
    else:
        w_opt = make_wopt(spec.dim, np.random.default_rng(_trial_seed_seq(trial_seed, _WOPT)))
    train_spec = replace(spec, w_opt=w_opt, seed=_trial_seed_seq(trial_seed, _TRAIN))
    samples = generate_stream(train_spec, config.iterations)

    tracker = config.tracker.make() if config.algo is Algorithm.TRIMMED_MEE else None
    learner = OnlineLearner(config.algo, spec.dim, config.learner, tracker=tracker)

    curve = np.full(config.iterations, np.nan)
    diverged = False
    # overflow in a diverging trial is expected and handled, not a warning
    with np.errstate(over="ignore", invalid="ignore"):
        for i, sample in enumerate(samples):
            learner.step(sample)
            if not (np.all(np.isfinite(learner.w)) and math.isfinite(learner.bias)):
                diverged = True
                break
            curve[i] = misalignment(learner.w, w_opt)

    if diverged:
        return TrialResult(LearningCurve(curve, math.nan, None), None, True)

    ss = steady_state(curve, config.tail_window)
    conv = convergence_iteration(curve, ss)
    mae = None
    if config.test_samples > 0:
        test_spec = replace(spec, w_opt=w_opt, seed=_trial_seed_seq(trial_seed, _TEST))
        mae = evaluate_mae(learner, generate_stream(test_spec, config.test_samples))
    return TrialResult(LearningCurve(curve, ss, conv), mae, False)


def _run_trial_args(args) -> TrialResult:
    return run_trial(*args)


def monte_carlo(
    config: TrialConfig,
    trials: int,
    base_seed: int,
    workers: int = 1,
) -> MonteCarloResult:
    """Average ``trials`` independent seeded trials of one configuration.

    Steady state and convergence iteration come from the mean curve.
    Diverged trials are excluded from every aggregate and counted.
    """
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials!r}")
    tasks = [(config, (base_seed, t)) for t in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_trial_args, tasks, chunksize=1))
    else:
        results = [_run_trial_args(t) for t in tasks]

    valid = [r for r in results if not r.diverged]
    n_diverged = trials - len(valid)
    if not valid:
        raise AllTrialsDivergedError(f"all {trials} trials diverged")

    mean_curve = np.mean(np.stack([r.curve.misalignment_db for r in valid]), axis=0)
    ss = steady_state(mean_curve, config.tail_window)
    conv = convergence_iteration(mean_curve, ss)
    maes = np.array([r.mae for r in valid if r.mae is not None])
    mae_mean = float(np.mean(maes)) if maes.size else None
    mae_std = float(np.std(maes, ddof=1)) if maes.size > 1 else (0.0 if maes.size else None)
    return MonteCarloResult(mean_curve, ss, conv, mae_mean, mae_std, trials, n_diverged)


def sweep(
    grid,
    config: TrialConfig,
    trials: int,
    base_seed: int,
    workers: int = 1,
) -> list[SweepPoint]:
    """Run ``monte_carlo`` for every (mu, sigma) pair of the grid.

    Every cell reuses the same base seed (hence the same trial streams), so
    cells differ only through the learner parameters; a one-cell sweep
    reproduces the plain run for that configuration exactly.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("sweep grid must be non-empty")
    points: list[SweepPoint] = []
    for mu, sigma in grid:
        cell = replace(config, learner=replace(config.learner, mu=mu, sigma=sigma))
        try:
            agg = monte_carlo(cell, trials, base_seed, workers=workers)
            points.append(
                SweepPoint(mu, sigma, agg.steady_state_db, agg.convergence_iteration, agg.n_diverged)
            )
        except AllTrialsDivergedError:
            points.append(SweepPoint(mu, sigma, math.nan, None, trials))
    return points
