"""Streaming robust online linear regression.

Entropy- and correntropy-based online learners (LMS, MCC, MEE, MEEF and
fence-trimmed MEE), a streaming quartile tracker powering the outlier
fences, seeded noise/stream generators, and a Monte-Carlo harness with a
CLI for reproducible learning-curve, sweep and quartile experiments.
"""

from .harness import (
    AllTrialsDivergedError,
    LearningCurve,
    MonteCarloResult,
    SweepPoint,
    TrialConfig,
    TrialResult,
    convergence_iteration,
    misalignment,
    monte_carlo,
    run_trial,
    steady_state,
    sweep,
)
from .kernels import (
    correntropy_estimate,
    euclidean_gap_residual,
    gaussian_kernel,
    information_potential,
    parzen_pdf,
)
from .learners import (
    Algorithm,
    GradientForm,
    LearnerConfig,
    OnlineLearner,
    StepResult,
    StreamSample,
    lms_gradient,
    mcc_gradient,
    mee_gradient,
    meef_gradient,
)
from .noise import (
    NoiseSpec,
    StreamSpec,
    draw_noise,
    generate_stream,
    lambda_from_snr,
    make_wopt,
    quartile_demo_records,
    trimmed_running_mean_demo,
)
from .quartiles import (
    CalibrationError,
    CompressorParams,
    ExactQuartileTracker,
    FenceBounds,
    QuartileTracker,
    TrackerParams,
    calibrate,
    choose_step,
    compress,
    exact_quartiles,
    fences,
    is_outlier,
)

__version__ = "0.1.0"

__all__ = [
    "Algorithm",
    "AllTrialsDivergedError",
    "CalibrationError",
    "CompressorParams",
    "ExactQuartileTracker",
    "FenceBounds",
    "GradientForm",
    "LearnerConfig",
    "LearningCurve",
    "MonteCarloResult",
    "NoiseSpec",
    "OnlineLearner",
    "QuartileTracker",
    "StepResult",
    "StreamSample",
    "StreamSpec",
    "SweepPoint",
    "TrackerParams",
    "TrialConfig",
    "TrialResult",
    "calibrate",
    "choose_step",
    "compress",
    "convergence_iteration",
    "correntropy_estimate",
    "draw_noise",
    "euclidean_gap_residual",
    "exact_quartiles",
    "fences",
    "gaussian_kernel",
    "generate_stream",
    "information_potential",
    "is_outlier",
    "lambda_from_snr",
    "lms_gradient",
    "make_wopt",
    "mcc_gradient",
    "mee_gradient",
    "meef_gradient",
    "misalignment",
    "monte_carlo",
    "parzen_pdf",
    "quartile_demo_records",
    "run_trial",
    "steady_state",
    "sweep",
    "trimmed_running_mean_demo",
]
