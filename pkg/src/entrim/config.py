"""Experiment config files: YAML schema, strict validation, and assembly
into harness objects.

Unknown keys are rejected and every numeric range is checked on load, so a
typo fails fast with the offending key named.  All randomness in an
experiment flows from the single ``seed`` value here; no command reads the
clock or global RNG state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import yaml

from .learners import Algorithm, GradientForm, LearnerConfig
from .noise import NoiseSpec, lambda_from_snr
from .quartiles import TrackerParams


class ConfigError(ValueError):
    """Invalid experiment config; ``key`` is the dotted path of the problem."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


@dataclass(frozen=True)
class AlgorithmSpec:
    algo: Algorithm
    label: str
    learner: LearnerConfig


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    out_dir: str
    trials: int
    workers: int | None
    iterations: int
    test_samples: int
    tail_window: int
    figures: bool
    dim: int
    noise: NoiseSpec
    algorithms: tuple[AlgorithmSpec, ...]
    tracker: TrackerParams
    sweep_mu: tuple[float, ...] | None
    sweep_sigma: tuple[float, ...] | None
    demo_samples: int
    demo_errors_file: str | None


class _Section:
    """One mapping level of the config with consume-and-reject-leftovers
    semantics."""

    def __init__(self, data, path: str):
        if not isinstance(data, dict):
            raise ConfigError(path or "<root>", f"expected a mapping, got {type(data).__name__}")
        self._data = dict(data)
        self._path = path

    def _key(self, name: str) -> str:
        return f"{self._path}.{name}" if self._path else name

    def take(self, name: str, kind, default=..., minimum=None, maximum=None):
        if name not in self._data:
            if default is ...:
                raise ConfigError(self._key(name), "required key is missing")
            return default
        value = self._data.pop(name)
        key = self._key(name)
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if kind is int and isinstance(value, bool):
            raise ConfigError(key, "expected an integer")
        if not isinstance(value, kind):
            raise ConfigError(key, f"expected {kind.__name__}, got {type(value).__name__}")
        if kind in (int, float):
            if not math.isfinite(value):
                raise ConfigError(key, "must be finite")
            if minimum is not None and value < minimum:
                raise ConfigError(key, f"must be >= {minimum}, got {value}")
            if maximum is not None and value > maximum:
                raise ConfigError(key, f"must be <= {maximum}, got {value}")
        return value

    def section(self, name: str, required=False):
        if name not in self._data:
            if required:
                raise ConfigError(self._key(name), "required section is missing")
            return None
        return _Section(self._data.pop(name), self._key(name))

    def take_raw(self, name: str, default=...):
        if name not in self._data:
            if default is ...:
                raise ConfigError(self._key(name), "required key is missing")
            return default
        return self._data.pop(name)

    def finish(self) -> None:
        if self._data:
            key = self._key(sorted(self._data)[0])
            raise ConfigError(key, "unknown key")


def _parse_noise(section: _Section) -> NoiseSpec:
    kind = section.take("kind", str)
    try:
        if kind == "gaussian":
            mean = section.take("mean", float, default=0.0)
            variance = section.take("variance", float, minimum=0.0)
            section.finish()
            return NoiseSpec.gaussian(mean, variance)
        if kind == "exponential":
            rate = section.take("rate", float, default=None)
            snr_db = section.take("snr_db", float, default=None)
            section.finish()
            if (rate is None) == (snr_db is None):
                raise ConfigError(
                    section._key("rate"), "exponential needs exactly one of rate or snr_db"
                )
            if rate is None:
                # unit-norm optimum weights give unit signal power
                rate = lambda_from_snr(snr_db, 1.0)
            return NoiseSpec.exponential(rate)
        if kind == "mixture":
            comps = section.take_raw("components")
            section.finish()
            if not isinstance(comps, list) or not comps:
                raise ConfigError(section._key("components"), "expected a non-empty list")
            parsed = []
            for i, comp in enumerate(comps):
                if not isinstance(comp, list) or len(comp) != 3:
                    raise ConfigError(
                        f"{section._key('components')}[{i}]",
                        "expected [weight, mean, variance]",
                    )
                parsed.append(tuple(float(v) for v in comp))
            return NoiseSpec.mixture(parsed)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(section._path, str(exc)) from exc
    raise ConfigError(section._key("kind"), f"unknown noise kind {kind!r}")


_FORMS = {
    "single_sum": GradientForm.SINGLE_SUM,
    "double_sum": GradientForm.DOUBLE_SUM,
}


def _parse_algorithm(section: _Section) -> AlgorithmSpec:
    name = section.take("name", str)
    try:
        algo = Algorithm(name)
    except ValueError:
        valid = ", ".join(a.value for a in Algorithm)
        raise ConfigError(section._key("name"), f"unknown algorithm {name!r} (one of: {valid})")
    label = section.take("label", str, default=name)
    mu = section.take("mu", float, default=0.05)
    sigma = section.take("sigma", float, default=1.0)
    window = section.take("window", int, default=10, minimum=1)
    fiducial = section.take("fiducial", int, default=1, minimum=0)
    form_name = section.take("gradient_form", str, default=None)
    section.finish()
    if mu <= 0.0:
        raise ConfigError(section._key("mu"), f"must be > 0, got {mu}")
    if sigma <= 0.0:
        raise ConfigError(section._key("sigma"), f"must be > 0, got {sigma}")
    if algo is Algorithm.MEEF and fiducial < 1:
        raise ConfigError(section._key("fiducial"), "meef needs at least 1 fiducial point")
    form = None
    if form_name is not None:
        if form_name not in _FORMS:
            raise ConfigError(
                section._key("gradient_form"),
                f"unknown form {form_name!r} (one of: {', '.join(_FORMS)})",
            )
        form = _FORMS[form_name]
    learner = LearnerConfig(mu=mu, sigma=sigma, window=window, fiducial=fiducial, gradient_form=form)
    return AlgorithmSpec(algo, label, learner)


def _parse_range(section: _Section | None, raw, key: str) -> tuple[float, ...] | None:
    """A sweep axis: either an explicit list or {start, stop, step}."""
    if raw is None:
        return None
    if isinstance(raw, list):
        if not raw:
            raise ConfigError(key, "axis list must be non-empty")
        return tuple(float(v) for v in raw)
    if isinstance(raw, dict):
        axis = _Section(raw, key)
        start = axis.take("start", float)
        stop = axis.take("stop", float)
        step = axis.take("step", float)
        axis.finish()
        if step <= 0 or stop < start:
            raise ConfigError(key, "need step > 0 and stop >= start")
        values = []
        k = 0
        while True:
            v = start + k * step
            if v > stop + 1e-12:
                break
            values.append(round(v, 12))
            k += 1
        return tuple(values)
    raise ConfigError(key, "expected a list or {start, stop, step}")


def load_config(path) -> ExperimentConfig:
    """Parse and validate one experiment config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"invalid YAML: {exc}") from exc
    if data is None:
        raise ConfigError(str(path), "config file is empty")

    root = _Section(data, "")
    seed = root.take("seed", int, minimum=0)
    out_dir = root.take("out_dir", str, default="results")
    trials = root.take("trials", int, default=200, minimum=1)
    workers = root.take("workers", int, default=None, minimum=1)
    iterations = root.take("iterations", int, default=2000, minimum=1)
    test_samples = root.take("test_samples", int, default=2000, minimum=0)
    tail_window = root.take("tail_window", int, default=200, minimum=1)
    figures = root.take("figures", bool, default=True)

    stream = root.section("stream", required=True)
    dim = stream.take("dim", int, default=5, minimum=1)
    noise_section = stream.section("noise", required=True)
    noise = _parse_noise(noise_section)
    stream.finish()

    algos_raw = root.take_raw("algorithms", default=None)
    algorithms: list[AlgorithmSpec] = []
    if algos_raw is not None:
        if not isinstance(algos_raw, list) or not algos_raw:
            raise ConfigError("algorithms", "expected a non-empty list")
        for i, entry in enumerate(algos_raw):
            algorithms.append(_parse_algorithm(_Section(entry, f"algorithms[{i}]")))
        labels = [a.label for a in algorithms]
        if len(set(labels)) != len(labels):
            raise ConfigError("algorithms", f"duplicate labels: {labels}")

    quantile = root.section("quantile")
    if quantile is not None:
        warmup = quantile.take("warmup", int, default=100, minimum=4)
        epsilon = quantile.take("epsilon", float, default=0.01)
        beta = quantile.take("beta", float, default=0.1)
        quantile.finish()
        if epsilon <= 0:
            raise ConfigError("quantile.epsilon", f"must be > 0, got {epsilon}")
        if not 0 < beta < 0.2:
            raise ConfigError("quantile.beta", f"must lie in (0, 0.2), got {beta}")
        tracker = TrackerParams(warmup, epsilon, beta)
    else:
        tracker = TrackerParams()

    sweep_section = root.section("sweep")
    sweep_mu = sweep_sigma = None
    if sweep_section is not None:
        sweep_mu = _parse_range(None, sweep_section.take_raw("mu"), "sweep.mu")
        sweep_sigma = _parse_range(None, sweep_section.take_raw("sigma"), "sweep.sigma")
        sweep_section.finish()

    demo = root.section("demo")
    demo_samples = 10_000
    demo_errors_file = None
    if demo is not None:
        demo_samples = demo.take("samples", int, default=10_000, minimum=1)
        demo_errors_file = demo.take("errors_file", str, default=None)
        demo.finish()

    root.finish()

    if iterations <= tail_window:
        raise ConfigError("iterations", f"must exceed tail_window ({tail_window}), got {iterations}")

    return ExperimentConfig(
        seed=seed,
        out_dir=out_dir,
        trials=trials,
        workers=workers,
        iterations=iterations,
        test_samples=test_samples,
        tail_window=tail_window,
        figures=figures,
        dim=dim,
        noise=noise,
        algorithms=tuple(algorithms),
        tracker=tracker,
        sweep_mu=sweep_mu,
        sweep_sigma=sweep_sigma,
        demo_samples=demo_samples,
        demo_errors_file=demo_errors_file,
    )
