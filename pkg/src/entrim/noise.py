"""Seeded generation of noise models and labeled input streams.

Supported noise families: Gaussian (mean, variance), one-sided exponential
(rate), and finite Gaussian mixtures given as (weight, mean, variance)
components.  The second Gaussian parameter is always a VARIANCE.

All randomness flows through numpy SeedSequence entropy, so every stream is
a pure function of its spec.  Parallel consumers derive independent child
sequences via spawn keys; nothing here shares a generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quartiles import QuartileTracker, is_outlier

@dataclass(frozen=True)
class NoiseSpec:
    """One noise distribution.

    Use the ``gaussian``, ``exponential`` and ``mixture`` constructors; the
    raw fields exist so specs stay plain picklable data.
    """

    kind: str
    mean: float = 0.0
    variance: float = 0.0
    rate: float = 1.0
    components: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self):
        if self.kind == "gaussian":
            if self.variance < 0.0:
                raise ValueError(f"variance must be non-negative, got {self.variance!r}")
        elif self.kind == "exponential":
            if not self.rate > 0.0:
                raise ValueError(f"rate must be positive, got {self.rate!r}")
        elif self.kind == "mixture":
            if not self.components:
                raise ValueError("mixture needs at least one component")
            weights = [w for w, _, _ in self.components]
            if any(w <= 0.0 for w in weights):
                raise ValueError("mixture weights must be positive")
            if abs(sum(weights) - 1.0) > 1e-12:
                raise ValueError(f"mixture weights must sum to 1, got {sum(weights)!r}")
            if any(v < 0.0 for _, _, v in self.components):
                raise ValueError("mixture variances must be non-negative")
        else:
            raise ValueError(f"unknown noise kind {self.kind!r}")

    @classmethod
    def gaussian(cls, mean: float, variance: float) -> "NoiseSpec":
        return cls(kind="gaussian", mean=float(mean), variance=float(variance))

    @classmethod
    def exponential(cls, rate: float) -> "NoiseSpec":
        return cls(kind="exponential", rate=float(rate))

    @classmethod
    def mixture(cls, components) -> "NoiseSpec":
        comps = tuple((float(w), float(m), float(v)) for w, m, v in components)
        return cls(kind="mixture", components=comps)


@dataclass(frozen=True, eq=False)
class StreamSpec:
    """Recipe for one labeled stream: d = x . w_opt + noise.

    ``w_opt`` must be a unit vector when given; None defers the draw to
    generation time (the generator consumes it from the seed stream before
    the inputs, so the draw is reproducible).  ``seed`` is SeedSequence
    entropy: an int, a tuple of ints, or a SeedSequence.
    """

    dim: int
    noise: NoiseSpec
    seed: object = 0
    w_opt: np.ndarray | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be at least 1, got {self.dim!r}")
        if self.w_opt is not None:
            w = np.asarray(self.w_opt, dtype=float)
            if w.shape != (self.dim,):
                raise ValueError(f"w_opt shape {w.shape} does not match dim {self.dim}")
            if abs(np.linalg.norm(w) - 1.0) > 1e-12:
                raise ValueError("w_opt must have unit norm within 1e-12")
            object.__setattr__(self, "w_opt", w)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    return np.random.default_rng(np.random.SeedSequence(seed))


def make_wopt(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a uniformly random unit vector (normalized standard normals)."""
    w = rng.standard_normal(dim)
    return w / np.linalg.norm(w)


def lambda_from_snr(snr_db: float, signal_power: float) -> float:
    """Exponential rate giving the requested SNR against a known signal power.

    The exponential's second moment is 2/rate^2, so
    rate = sqrt(2 * 10^(snr/10) / signal_power).
    """
    if not signal_power > 0.0:
        raise ValueError(f"signal power must be positive, got {signal_power!r}")
    return math.sqrt(2.0 * 10.0 ** (snr_db / 10.0) / signal_power)


def draw_noise(spec: NoiseSpec, rng: np.random.Generator, size: int | None = None):
    """Draw from a noise spec; scalar when ``size`` is None, else shape (size,).

    Mixture draws pick a component per sample by weight, then sample that
    Gaussian.
    """
    n = 1 if size is None else int(size)
    if spec.kind == "gaussian":
        out = rng.normal(spec.mean, math.sqrt(spec.variance), n)
    elif spec.kind == "exponential":
        out = rng.exponential(1.0 / spec.rate, n)
    else:
        weights = np.array([w for w, _, _ in spec.components])
        means = np.array([m for _, m, _ in spec.components])
        stds = np.sqrt([v for _, _, v in spec.components])
        idx = rng.choice(len(spec.components), size=n, p=weights)
        out = rng.normal(means[idx], stds[idx])
    return float(out[0]) if size is None else out


def generate_stream(spec: StreamSpec, n: int) -> list:
    """Generate ``n`` StreamSamples: inputs i.i.d. standard normal, labels
    x . w_opt + noise.  Fully reproducible from the spec."""
    from .learners import StreamSample  # local import to avoid a cycle

    if n < 1:
        raise ValueError(f"n must be at least 1, got {n!r}")
    rng = _rng(spec.seed)
    w_opt = spec.w_opt if spec.w_opt is not None else make_wopt(spec.dim, rng)
    X = rng.standard_normal((n, spec.dim))
    nu = draw_noise(spec.noise, rng, size=n)
    d = X @ w_opt + nu
    return [StreamSample(X[i], float(d[i])) for i in range(n)]


@dataclass
class QuartileDemoRecord:
    """Per-step diagnostics of the tracker running on a raw noise stream."""

    step: int
    value: float
    q1_tracked: float | None
    q3_tracked: float | None
    q1_exact: float | None
    q3_exact: float | None
    lower_extreme: float | None
    upper_extreme: float | None
    flagged: bool
    recalibrated: bool
    plain_mean: float
    trimmed_mean: float


def quartile_demo_records(
    values,
    warmup: int = 100,
    epsilon: float = 0.01,
    beta: float = 0.1,
) -> list[QuartileDemoRecord]:
    """Run the streaming tracker over raw values, recording tracked vs
    exact quartiles, fences, outlier flags, and plain vs fence-trimmed
    running means at every step.

    The exact quartiles come from an insertion-sorted copy of the stream
    (the sorting oracle), so this is O(n) memory; it is a diagnostic, not
    the production path.
    """
    from .quartiles import ExactQuartileTracker

    tracker = QuartileTracker(warmup, epsilon, beta)
    oracle = ExactQuartileTracker()
    records: list[QuartileDemoRecord] = []
    plain_sum = 0.0
    trimmed_sum = 0.0
    trimmed_n = 0
    for step, v in enumerate(values, 1):
        v = float(v)
        tracker.observe(v)
        oracle.add(v)
        bounds = tracker.fences()
        flagged = bounds is not None and is_outlier(v, bounds)
        plain_sum += v
        if not flagged:
            trimmed_sum += v
            trimmed_n += 1
        tq = tracker.quartiles()
        eq = oracle.quartiles()
        records.append(
            QuartileDemoRecord(
                step=step,
                value=v,
                q1_tracked=tq[0] if tq else None,
                q3_tracked=tq[1] if tq else None,
                q1_exact=eq[0] if eq else None,
                q3_exact=eq[1] if eq else None,
                lower_extreme=bounds.lower_extreme if bounds else None,
                upper_extreme=bounds.upper_extreme if bounds else None,
                flagged=flagged,
                recalibrated=tracker.recalibrated,
                plain_mean=plain_sum / step,
                trimmed_mean=trimmed_sum / trimmed_n if trimmed_n else plain_sum / step,
            )
        )
    return records


def trimmed_running_mean_demo(
    spec: NoiseSpec,
    n: int,
    seed,
    warmup: int = 100,
    epsilon: float = 0.01,
    beta: float = 0.1,
) -> tuple[np.ndarray, np.ndarray]:
    """Plain vs fence-trimmed running means of a raw noise stream.

    The plain mean uses every sample; the trimmed mean excludes samples the
    tracker's fences flag as major outliers at the step they arrive.
    """
    if n < warmup:
        raise ValueError(f"need at least warmup={warmup} samples, got {n}")
    values = draw_noise(spec, _rng(seed), size=n)
    records = quartile_demo_records(values, warmup, epsilon, beta)
    plain = np.array([r.plain_mean for r in records])
    trimmed = np.array([r.trimmed_mean for r in records])
    return plain, trimmed
