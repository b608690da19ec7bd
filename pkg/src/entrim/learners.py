"""Online linear-regression learners sharing one step interface.

Five algorithms on the common update ``w += mu * gradient``:

* LMS        -- squared-error baseline, gradient ``e * x``
* MCC        -- maximize the kernel similarity of the newest error to zero
* MEE        -- maximize the windowed information potential of the errors,
                with a bias maintained from running label/input means so the
                (shift-invariant) entropy criterion lands errors at zero
* MEEF       -- MEE blended with MCC through fiducial zero-error points
* TRIMMED_MEE -- MEE whose window pairs and running means are restricted to
                samples inside streaming quartile fences; steps whose own
                error falls outside the fences leave weights and bias frozen

Errors in the window are recomputed against the current weights and bias on
every step, never cached.  Learner state is single-owner and mutated by
``step``; independent learners can run on independent threads.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .kernels import gaussian_kernel
from .quartiles import FenceBounds, QuartileTracker, is_outlier


class Algorithm(Enum):
    LMS = "lms"
    MCC = "mcc"
    MEE = "mee"
    MEEF = "meef"
    TRIMMED_MEE = "trimmed_mee"


class GradientForm(Enum):
    # single sum: newest error against each window entry (stochastic form)
    SINGLE_SUM = "single_sum"
    # double sum: all window pairs (batch form)
    DOUBLE_SUM = "double_sum"


@dataclass(frozen=True, eq=False)
class StreamSample:
    """One labeled observation: input vector ``x`` and label ``d``."""

    x: np.ndarray
    d: float


@dataclass(frozen=True)
class LearnerConfig:
    """Step size, kernel bandwidth and window geometry for one learner.

    ``window`` counts past samples kept alongside the newest one, so the
    entropy criteria see up to ``window + 1`` errors.  ``fiducial`` is the
    number of artificial zero-error anchor points (MEEF only).
    ``gradient_form`` of None picks the per-algorithm default: single sum
    for MEE/MEEF, double sum for TRIMMED_MEE.
    """

    mu: float = 0.05
    sigma: float = 1.0
    window: int = 10
    fiducial: int = 1
    gradient_form: GradientForm | None = None

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu > 0.0):
            raise ValueError(f"mu must be positive, got {self.mu!r}")
        if not (math.isfinite(self.sigma) and self.sigma > 0.0):
            raise ValueError(f"sigma must be positive, got {self.sigma!r}")
        if self.window < 1:
            raise ValueError(f"window must be at least 1, got {self.window!r}")
        if self.fiducial < 0:
            raise ValueError(f"fiducial must be non-negative, got {self.fiducial!r}")


class StepResult(NamedTuple):
    error: float
    was_outlier: bool


def lms_gradient(e: float, x: np.ndarray) -> np.ndarray:
    """Ascent direction on negative squared error: ``e * x``."""
    return e * np.asarray(x, dtype=float)


def mcc_gradient(e: float, x: np.ndarray, sigma: float) -> np.ndarray:
    """Ascent gradient of ``G_sigma(e)`` with respect to the weights."""
    x = np.asarray(x, dtype=float)
    return gaussian_kernel(e, sigma) * (e / (sigma * sigma)) * x


def mee_gradient(
    errors,
    xs,
    sigma: float,
    form: GradientForm = GradientForm.SINGLE_SUM,
    mask: FenceBounds | None = None,
) -> np.ndarray:
    """Ascent gradient of the windowed information potential.

    Parameters
    ----------
    errors, xs : arrays, newest first
        Window errors (n,) and the matching inputs (n, L); index 0 is the
        newest sample.
    form : GradientForm
        DOUBLE_SUM sums kernel-weighted error differences over all pairs,
        normalized by n^2; SINGLE_SUM anchors on the newest sample,
        normalized by n.  The normalizer always uses the pre-mask count.
    mask : FenceBounds, optional
        Only entries with errors inside the closed interval participate.
        If nothing survives (or the anchor itself is excluded in single-sum
        form), the gradient is zero.
    """
    e = np.asarray(errors, dtype=float)
    X = np.asarray(xs, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if e.size == 0:
        raise ValueError("mee_gradient requires at least one window entry")
    n = e.size  # fixed normalizer, independent of how many entries the mask keeps
    dim = X.shape[1]
    if mask is not None:
        keep = (e >= mask.lower_extreme) & (e <= mask.upper_extreme)
        if form is GradientForm.SINGLE_SUM and not keep[0]:
            return np.zeros(dim)
        e = e[keep]
        X = X[keep]
        if e.size == 0:
            return np.zeros(dim)
    if form is GradientForm.DOUBLE_SUM:
        de = e[:, None] - e[None, :]
        w = gaussian_kernel(de, sigma) * de
        # sum_ij w_ij (x_i - x_j) = 2 * sum_i (row_i w) x_i since w is
        # antisymmetric
        return 2.0 * (w.sum(axis=1) @ X) / (n * n * sigma * sigma)
    de = e[0] - e
    k = gaussian_kernel(de, sigma) * de
    return (k @ (X[0] - X)) / (n * sigma * sigma)


def meef_gradient(errors, xs, sigma: float, fiducial: int) -> np.ndarray:
    """Fiducial-point blend: entropy gradient weighted n/(n+m) plus the
    correntropy gradient of the newest error weighted m/(n+m).

    ``fiducial = 0`` degenerates to the plain entropy gradient.
    """
    if fiducial < 0:
        raise ValueError(f"fiducial must be non-negative, got {fiducial!r}")
    e = np.asarray(errors, dtype=float)
    X = np.asarray(xs, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    n = e.size
    m = fiducial
    g_entropy = mee_gradient(e, X, sigma, GradientForm.SINGLE_SUM)
    g_corr = mcc_gradient(float(e[0]), X[0], sigma)
    return (n / (n + m)) * g_entropy + (m / (n + m)) * g_corr


class OnlineLearner:
    """One adaptive linear filter: weights, bias and a sliding sample window.

    Parameters
    ----------
    algo : Algorithm
    dim : int
        Input vector length.
    config : LearnerConfig
    tracker : QuartileTracker, optional
        Fence source for TRIMMED_MEE; a default-parameter tracker is created
        when omitted.  Ignored by the other algorithms.
    """

    def __init__(
        self,
        algo: Algorithm,
        dim: int,
        config: LearnerConfig = LearnerConfig(),
        tracker: QuartileTracker | None = None,
    ):
        if dim < 1:
            raise ValueError(f"dim must be at least 1, got {dim!r}")
        self.algo = algo
        self.dim = int(dim)
        self.config = config
        self.w = np.zeros(self.dim)
        self.bias = 0.0
        self.ring: deque[StreamSample] = deque(maxlen=config.window)
        self.d_bar = 0.0
        self.x_bar = np.zeros(self.dim)
        self.counter_no = 0  # samples folded into the running means
        self.steps = 0
        self.masked_noop_steps = 0  # fence mask removed every window entry
        if algo is Algorithm.TRIMMED_MEE:
            self.tracker = tracker if tracker is not None else QuartileTracker()
        else:
            self.tracker = None
        if config.gradient_form is not None:
            self._form = config.gradient_form
        elif algo is Algorithm.TRIMMED_MEE:
            self._form = GradientForm.DOUBLE_SUM
        else:
            self._form = GradientForm.SINGLE_SUM

    def predict(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"input shape {x.shape} does not match dim {self.dim}")
        return float(x @ self.w + self.bias)

    def window_errors(self, sample: StreamSample) -> tuple[np.ndarray, np.ndarray]:
        """Errors of the current sample and every ring entry against the
        current weights and bias, newest first, with the matching inputs."""
        xs = [sample.x]
        ds = [sample.d]
        for s in reversed(self.ring):
            xs.append(s.x)
            ds.append(s.d)
        X = np.asarray(xs, dtype=float)
        d = np.asarray(ds, dtype=float)
        return d - X @ self.w - self.bias, X

    def step(self, sample: StreamSample) -> StepResult:
        """Consume one sample, update the state, and report the prediction
        error plus whether the sample was fenced out (TRIMMED_MEE only).

        Non-finite inputs are rejected with ValueError before any mutation.
        """
        x = np.asarray(sample.x, dtype=float)
        d = float(sample.d)
        if x.shape != (self.dim,):
            raise ValueError(f"input shape {x.shape} does not match dim {self.dim}")
        if not (np.all(np.isfinite(x)) and math.isfinite(d)):
            raise ValueError("sample values must be finite")
        sample = StreamSample(x, d)
        cfg = self.config
        e_n = d - self.predict(x)
        was_outlier = False

        if self.algo is Algorithm.LMS:
            self.w = self.w + cfg.mu * lms_gradient(e_n, x)
        elif self.algo is Algorithm.MCC:
            self.w = self.w + cfg.mu * mcc_gradient(e_n, x, cfg.sigma)
        elif self.algo is Algorithm.MEEF:
            errors, xs = self.window_errors(sample)
            self.w = self.w + cfg.mu * meef_gradient(errors, xs, cfg.sigma, cfg.fiducial)
        elif self.algo is Algorithm.MEE:
            self._entropy_update(sample, mask=None)
        else:  # TRIMMED_MEE
            self.tracker.observe(e_n)
            bounds = self.tracker.fences()
            if bounds is not None and is_outlier(e_n, bounds):
                was_outlier = True  # freeze weights and bias entirely
            else:
                self._entropy_update(sample, mask=bounds)

        self.ring.append(sample)  # outliers too; the fence mask excludes them later
        self.steps += 1
        return StepResult(e_n, was_outlier)

    def _entropy_update(self, sample: StreamSample, mask: FenceBounds | None) -> None:
        # running means first, then the ascent step, then the bias from the
        # updated weights
        c = self.counter_no
        self.d_bar = (sample.d + c * self.d_bar) / (c + 1)
        self.x_bar = (sample.x + c * self.x_bar) / (c + 1)
        self.counter_no = c + 1
        errors, xs = self.window_errors(sample)
        if mask is not None and not np.any(
            (errors >= mask.lower_extreme) & (errors <= mask.upper_extreme)
        ):
            self.masked_noop_steps += 1
        g = mee_gradient(errors, xs, self.config.sigma, self._form, mask)
        self.w = self.w + self.config.mu * g
        self.bias = self.d_bar - float(self.x_bar @ self.w)
