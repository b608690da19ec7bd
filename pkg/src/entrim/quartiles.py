"""Streaming estimation of the first and third quartiles of an error stream,
and the Tukey outer fences derived from them.

The tracker buffers an initial warm-up block and computes exact quartiles by
sorting.  Once the warm-up fills, it fits a piecewise-logistic compressor to
the warm-up quartiles, quantizes the compressed axis into uniform bins with
cumulative counters, and from then on reads the quartiles off the counters in
O(log bins) per sample.  When a quartile's bin index drifts close to the
center bin (errors concentrating near zero), the compressor is re-fit to the
current quartiles and the counters reset, restoring resolution where the mass
now lives.

Fences are the classic outer fences: Q1 - 3*IQR and Q3 + 3*IQR.  Values
beyond them are treated as major outliers; the boundaries themselves are not.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

LN3 = math.log(3.0)


class CalibrationError(ValueError):
    """Compressor cannot be fit: quartiles do not straddle zero."""


@dataclass(frozen=True)
class CompressorParams:
    """Slopes of the piecewise logistic compressor.

    ``alpha1`` controls resolution for negative errors, ``alpha2`` for
    non-negative ones.  ``compress(0)`` is 0.5 for any valid params.
    """

    alpha1: float
    alpha2: float

    def __post_init__(self):
        for name in ("alpha1", "alpha2"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0.0:
                raise ValueError(f"{name} must be positive and finite, got {v!r}")


@dataclass(frozen=True)
class FenceBounds:
    """Closed interval of "normal" values; anything strictly outside is a
    major outlier."""

    lower_extreme: float
    upper_extreme: float

    def __post_init__(self):
        if not self.lower_extreme <= self.upper_extreme:
            raise ValueError(
                f"lower extreme {self.lower_extreme!r} exceeds upper {self.upper_extreme!r}"
            )


@dataclass(frozen=True)
class TrackerParams:
    """Constructor arguments for QuartileTracker, bundled so experiment
    configs can carry them around."""

    warmup: int = 100
    epsilon: float = 0.01
    beta: float = 0.1

    def make(self) -> "QuartileTracker":
        return QuartileTracker(self.warmup, self.epsilon, self.beta)


def _logistic(z: float) -> float:
    # numerically stable in both tails
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def compress(e: float, params: CompressorParams) -> float:
    """Map an error through the piecewise logistic compressor into (0, 1).

    Strictly increasing, equal to 0.5 at zero, saturating smoothly for
    large magnitudes.
    """
    alpha = params.alpha1 if e < 0.0 else params.alpha2
    return _logistic(alpha * e)


def _interpolated(sorted_vals, p: float) -> float:
    """Percentile by linear interpolation at position p*(n-1), zero-based."""
    pos = p * (len(sorted_vals) - 1)
    lo = int(pos)
    frac = pos - lo
    if frac == 0.0:
        return sorted_vals[lo]
    return sorted_vals[lo] + frac * (sorted_vals[lo + 1] - sorted_vals[lo])


def exact_quartiles(samples) -> tuple[float, float]:
    """First and third quartiles of a sample by sorting a copy.

    Uses linear interpolation between order statistics at positions
    0.25*(n-1) and 0.75*(n-1).  Requires at least 4 samples.
    """
    xs = sorted(float(v) for v in samples)
    if len(xs) < 4:
        raise ValueError(f"need at least 4 samples for quartiles, got {len(xs)}")
    return _interpolated(xs, 0.25), _interpolated(xs, 0.75)


def calibrate(q1: float, q3: float) -> CompressorParams:
    """Fit compressor slopes so that compress(q1) = 0.25 and compress(q3) = 0.75.

    Solving the logistic equations gives alpha1 = -ln(3)/q1 and
    alpha2 = ln(3)/q3, which requires q1 < 0 < q3 (error stream roughly
    centered).  Raises CalibrationError otherwise.
    """
    if not (q1 < 0.0 < q3):
        raise CalibrationError(
            f"calibration needs q1 < 0 < q3, got q1={q1!r}, q3={q3!r}"
        )
    return CompressorParams(-LN3 / q1, LN3 / q3)


def choose_step(params: CompressorParams, epsilon: float, m: int) -> tuple[float, int]:
    """Quantization step on the compressed axis and the bin count it implies.

    The step is the tightest of 1/m and the compressed widths of the
    +-epsilon neighborhood of zero on either branch, so that errors within
    epsilon of the origin quantize with at most one-bin ambiguity.
    """
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    if m < 4:
        raise ValueError(f"warm-up length must be at least 4, got {m!r}")
    d1 = _logistic(params.alpha2 * epsilon) - 0.5
    d2 = 0.5 - _logistic(-params.alpha1 * epsilon)
    delta = min(1.0 / m, d1, d2)
    return delta, math.ceil(1.0 / delta)


def fences(q1: float, q3: float) -> FenceBounds:
    """Outer fences: Q1 - 3*IQR and Q3 + 3*IQR."""
    if q1 > q3:
        raise ValueError(f"q1={q1!r} exceeds q3={q3!r}")
    iqr = q3 - q1
    return FenceBounds(q1 - 3.0 * iqr, q3 + 3.0 * iqr)


def is_outlier(e: float, bounds: FenceBounds) -> bool:
    """True iff ``e`` lies strictly outside the fences (boundaries are in)."""
    return e < bounds.lower_extreme or e > bounds.upper_extreme


class ExactQuartileTracker:
    """Sorting oracle: exact running quartiles via an insertion-sorted list.

    O(n) memory and O(n) insertion; used to validate the streaming tracker
    and for diagnostic dumps, not in the learning loop.
    """

    def __init__(self):
        self._sorted: list[float] = []

    def add(self, value: float) -> None:
        bisect.insort(self._sorted, float(value))

    @property
    def n(self) -> int:
        return len(self._sorted)

    def quartiles(self) -> tuple[float, float] | None:
        if len(self._sorted) < 4:
            return None
        return _interpolated(self._sorted, 0.25), _interpolated(self._sorted, 0.75)


class QuartileTracker:
    """Single-owner streaming tracker of Q1/Q3 over an error stream.

    Parameters
    ----------
    warmup : int
        Number of samples buffered and sorted exactly before the compressor
        is fit (at least 4).
    epsilon : float
        Maximum acceptable quantization error around zero; bounds the bin
        width through the compressor.
    beta : float
        Fraction of the bin range (in (0, 0.2)) used as the recalibration
        trigger distance from the center bin.

    Not safe for concurrent mutation; snapshots (``quartiles``, ``fences``)
    are value copies.
    """

    def __init__(self, warmup: int = 100, epsilon: float = 0.01, beta: float = 0.1):
        if warmup < 4:
            raise ValueError(f"warmup must be at least 4, got {warmup!r}")
        if epsilon <= 0.0:
            raise ValueError(f"epsilon must be positive, got {epsilon!r}")
        if not 0.0 < beta < 0.2:
            raise ValueError(f"beta must lie in (0, 0.2), got {beta!r}")
        self.warmup = int(warmup)
        self.epsilon = float(epsilon)
        self.beta = float(beta)

        self.n_seen = 0
        self.q1: float | None = None
        self.q3: float | None = None
        self.shift = 0.0  # compressor operates on e - shift (uncentered streams)
        self.params: CompressorParams | None = None
        self.delta: float | None = None
        self.num_levels: int | None = None
        self.counters: np.ndarray | None = None
        self.num_samples = 0  # pseudo-count total the counters are normalized by
        self.recal_low: int | None = None
        self.recal_high: int | None = None
        self.recalibrated = False  # did the last observe() trigger a recalibration
        self.recalibrations = 0
        self._buffer: list[float] = []

    @property
    def ready(self) -> bool:
        """True once the compressor is calibrated and counters are live."""
        return self.params is not None

    def quartiles(self) -> tuple[float, float] | None:
        if self.q1 is None:
            return None
        return self.q1, self.q3

    def fences(self) -> FenceBounds | None:
        if self.q1 is None:
            return None
        return fences(self.q1, self.q3)

    def observe(self, e: float) -> None:
        """Fold one error sample into the tracker.

        Raw outliers are fed like any other sample; quartiles are robust to
        them by construction.  Rejects non-finite input without touching
        state.
        """
        e = float(e)
        if not math.isfinite(e):
            raise ValueError(f"error sample must be finite, got {e!r}")
        self.recalibrated = False
        self.n_seen += 1
        if self.params is None:
            self._warmup_observe(e)
        else:
            self._quantized_observe(e)

    # -- warm-up ---------------------------------------------------------

    def _warmup_observe(self, e: float) -> None:
        self._buffer.append(e)
        if len(self._buffer) >= 4:
            self.q1, self.q3 = exact_quartiles(self._buffer)
        if len(self._buffer) >= self.warmup:
            self._try_calibrate()

    def _try_calibrate(self) -> None:
        q1, q3 = self.q1, self.q3
        shift = 0.0
        if not (q1 < 0.0 < q3):
            # center on the warm-up median so the logistic fit exists even
            # for streams that start far from zero
            shift = _interpolated(sorted(self._buffer), 0.5)
        q1c, q3c = q1 - shift, q3 - shift
        if not (q1c < 0.0 < q3c):
            # zero IQR around the median: keep sorting exactly until the
            # stream spreads out enough to fit a compressor
            return
        self.shift = shift
        self.params = calibrate(q1c, q3c)
        self.delta, self.num_levels = choose_step(self.params, self.epsilon, len(self._buffer))
        self._reset_counters()
        half = int(0.5 / self.delta)
        off = max(1, int(self.beta * self.num_levels))
        self.recal_low = max(1, half - off)
        self.recal_high = min(self.num_levels, half + off)
        self._buffer = []

    def _reset_counters(self) -> None:
        # uniform pseudo-prior: cumulative counter i starts at i
        self.counters = np.arange(1, self.num_levels + 1, dtype=np.int64)
        self.num_samples = self.num_levels

    # -- quantized steady state ------------------------------------------

    def _bin_index(self, e: float) -> int:
        c = compress(e - self.shift, self.params)
        k = int(c / self.delta) + 1
        return min(k, self.num_levels)

    def _reconstruct(self, index: int, alpha: float) -> float:
        """Invert the compressor at a bin's lower edge.

        The edge coordinate is clamped into (0, 1) so the logit stays
        finite on degenerate bins at either end.
        """
        c = self.delta * (index - 1)
        if c <= 0.0:
            c = self.delta / 2.0
        elif c >= 1.0:
            c = 1.0 - self.delta / 2.0
        return self.shift - math.log(1.0 / c - 1.0) / alpha

    def _quantized_observe(self, e: float) -> None:
        k = self._bin_index(e)
        self.counters[k - 1 :] += 1
        self.num_samples += 1

        nes = self.num_samples
        # largest 1-based index whose cumulative fraction is <= 0.25
        i1 = int(np.searchsorted(self.counters, 0.25 * nes, side="right"))
        # smallest 1-based index whose cumulative fraction is >= 0.75
        i3 = int(np.searchsorted(self.counters, 0.75 * nes, side="left")) + 1

        cand_q1 = self._reconstruct(i1, self.params.alpha1) if i1 >= 1 else self.q1
        cand_q3 = (
            self._reconstruct(i3, self.params.alpha2) if i3 <= self.num_levels else self.q3
        )
        # a drifted stream with asymmetric slopes can momentarily invert the
        # reconstructed pair; discard such updates instead of propagating them
        if cand_q1 <= cand_q3:
            self.q1, self.q3 = cand_q1, cand_q3

        if (i1 >= 1 and i1 == self.recal_low) or (i3 <= self.num_levels and i3 == self.recal_high):
            self._recalibrate()

    def _recalibrate(self) -> None:
        q1c = self.q1 - self.shift
        q3c = self.q3 - self.shift
        if not (q1c < 0.0 < q3c):
            # slopes would flip sign; skip this event and keep counting
            return
        self.params = CompressorParams(-LN3 / q1c, LN3 / q3c)
        self._reset_counters()
        self.recalibrated = True
        self.recalibrations += 1
