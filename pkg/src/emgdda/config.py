"""Run configuration: one YAML file, overridable from the command line."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any

import yaml

from .errors import ConfigError
from .features import N_FEATURES


@dataclass
class PathsConfig:
    corpus: str = "corpus"
    out: str = "out"
    model: str | None = None
    features: str | None = None


@dataclass
class DspConfig:
    dwt: bool = True
    level: int = 4
    norm_mode: str = "subtract_mean"


@dataclass
class ThresholdsConfig:
    zc: float = 0.01
    ssc: float = 0.01
    wamp: float = 0.01
    myop: float = 0.016


@dataclass
class SelectionConfig:
    enabled: bool = True
    k: int = 30
    bins: int = 10


@dataclass
class ClassifierConfig:
    names: list = field(default_factory=lambda: ["knn", "lda", "svm"])
    knn_k: list = field(default_factory=lambda: [4])
    lda_ridge: float = 1e-6
    svm_gamma: float | None = None
    svm_c: float = 1.0


@dataclass
class SynthConfig:
    participants: int = 12
    sessions: int = 2
    windows: int = 5
    sample_rate_hz: int = 1000
    noise_sd: float = 0.05
    decimals: int = 5


@dataclass
class SimulateConfig:
    skills: list = field(default_factory=lambda: [2, 5, 9])
    starts: list = field(default_factory=lambda: [1])
    windows: int = 10
    modes: list = field(default_factory=lambda: ["adaptive", "nonadaptive"])
    task: str = "WM"
    affect_source: str = "ground_truth"
    steepness: float = 3.0
    sample_rate_hz: int = 1000


@dataclass
class RunConfig:
    seed: int = 0
    workers: int = 1
    paths: PathsConfig = field(default_factory=PathsConfig)
    dsp: DspConfig = field(default_factory=DspConfig)
    thresholds: ThresholdsConfig = field(default_factory=ThresholdsConfig)
    selection: SelectionConfig = field(default_factory=SelectionConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)
    simulate: SimulateConfig = field(default_factory=SimulateConfig)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    def validate(self) -> "RunConfig":
        def need(ok, key, msg):
            if not ok:
                raise ConfigError(f"{key}: {msg}")

        need(self.workers >= 1, "workers", "must be >= 1")
        need(1 <= self.dsp.level <= 8, "dsp.level", "must be in [1, 8]")
        need(self.dsp.norm_mode in ("subtract_mean", "zscore"), "dsp.norm_mode",
             "must be subtract_mean or zscore")
        for k, v in vars(self.thresholds).items():
            need(v >= 0, f"thresholds.{k}", "must be >= 0")
        need(1 <= self.selection.k <= N_FEATURES, "selection.k", f"must be in [1, {N_FEATURES}]")
        need(self.selection.bins >= 2, "selection.bins", "must be >= 2")
        need(bool(self.classifier.names), "classifier.names", "must not be empty")
        for n in self.classifier.names:
            need(n in ("knn", "lda", "svm"), "classifier.names", f"unknown classifier {n!r}")
        need(all(int(k) >= 1 for k in self.classifier.knn_k) and self.classifier.knn_k,
             "classifier.knn_k", "values must be >= 1")
        need(self.classifier.lda_ridge >= 0, "classifier.lda_ridge", "must be >= 0")
        need(self.classifier.svm_gamma is None or self.classifier.svm_gamma > 0,
             "classifier.svm_gamma", "must be > 0")
        need(self.classifier.svm_c > 0, "classifier.svm_c", "must be > 0")
        need(self.synth.participants >= 1, "synth.participants", "must be >= 1")
        need(self.synth.sessions >= 1, "synth.sessions", "must be >= 1")
        need(self.synth.windows >= 1, "synth.windows", "must be >= 1")
        need(self.synth.sample_rate_hz >= 1, "synth.sample_rate_hz", "must be >= 1")
        need(self.synth.noise_sd >= 0, "synth.noise_sd", "must be >= 0")
        need(all(1 <= s <= 10 for s in self.simulate.skills), "simulate.skills", "must be in [1, 10]")
        need(all(1 <= s <= 10 for s in self.simulate.starts), "simulate.starts", "must be in [1, 10]")
        need(self.simulate.windows >= 1, "simulate.windows", "must be >= 1")
        for m in self.simulate.modes:
            need(m in ("adaptive", "nonadaptive"), "simulate.modes", f"unknown mode {m!r}")
        need(self.simulate.task in ("WM", "EM"), "simulate.task", "must be WM or EM")
        need(self.simulate.affect_source in ("ground_truth", "classifier"), "simulate.affect_source",
             "must be ground_truth or classifier")
        need(self.simulate.steepness > 0, "simulate.steepness", "must be > 0")
        return self


def _merge(obj, data: dict, prefix: str = "") -> None:
    if not isinstance(data, dict):
        raise ConfigError(f"{prefix.rstrip('.') or '<root>'}: expected a mapping")
    known = {f.name: f for f in dataclasses.fields(obj)}
    for key, value in data.items():
        path = f"{prefix}{key}"
        if key not in known:
            raise ConfigError(f"{path}: unknown key")
        current = getattr(obj, key)
        if dataclasses.is_dataclass(current):
            _merge(current, value, path + ".")
        else:
            setattr(obj, key, _coerce(path, current, value))


def _coerce(path: str, current: Any, value: Any) -> Any:
    if value is None or current is None:
        return value
    try:
        if isinstance(current, bool):
            if isinstance(value, str):
                if value.lower() in ("true", "yes", "1"):
                    return True
                if value.lower() in ("false", "no", "0"):
                    return False
                raise ValueError(value)
            return bool(value)
        if isinstance(current, int):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if isinstance(current, float):
            return float(value)
        if isinstance(current, list):
            if isinstance(value, str):
                value = [v.strip() for v in value.split(",") if v.strip()]
            if not isinstance(value, list):
                value = [value]
            if current and isinstance(current[0], (int, float)):
                return [type(current[0])(v) for v in value]
            return list(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: cannot interpret {value!r}") from None


def load_config(path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Build the effective config: defaults, then the YAML file, then overrides."""
    cfg = RunConfig()
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                data = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML in {path}: {exc}") from None
        _merge(cfg, data)
    for dotted, value in (overrides or {}).items():
        node = {}
        cursor = node
        parts = dotted.split(".")
        for p in parts[:-1]:
            cursor = cursor.setdefault(p, {})
        cursor[parts[-1]] = value
        _merge(cfg, node)
    return cfg.validate()
