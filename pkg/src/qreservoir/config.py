"""Experiment configuration: schema, validation, JSON round-trip, hashing."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .cells import ALL_KINDS
from .noise import NoiseModelParams
from .tasks import TASK_NAMES

SCHEMA_VERSION = 1

MODE_CHOICES = ("reservoir", "full")
BACKEND_CHOICES = ("noiseless", "noisy")
FUNCTION_TASKS = ("damped_shm", "bessel")

# Task-parameter overrides accepted per task (keys of the task config dataclasses).
TASK_PARAM_KEYS = {
    "damped_shm": ("g", "damping", "length", "mass", "theta0", "omega0", "t_end", "n_points"),
    "bessel": ("order", "x_start", "x_end", "n_points"),
    "narma5": ("alpha", "beta", "gamma", "delta", "length", "input_alpha", "input_beta",
               "input_gamma", "input_period", "init_value"),
    "narma10": ("alpha", "beta", "gamma", "delta", "length", "input_alpha", "input_beta",
                "input_gamma", "input_period", "init_value"),
}


class ConfigError(ValueError):
    """Invalid configuration; `field_path` names the offending entry."""

    def __init__(self, field_path: str, message: str):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}")


def default_depth(task: str) -> int:
    return 2 if task in FUNCTION_TASKS else 4


@dataclass
class ExperimentConfig:
    task: str
    model: str
    mode: str = "reservoir"
    depth: int | None = None
    epochs: int = 100
    seed: int = 0
    backend: str = "noiseless"
    noise: dict | None = None  # pinned NoiseModelParams as a dict
    noise_seed: int | None = None
    shots: int | None = None
    depolarize_first: bool = False
    window: int = 4
    normalize: bool = True  # min-max function-approximation series to [-1, 1]
    task_params: dict = field(default_factory=dict)
    output_dir: str = "runs"
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError("schema_version", f"expected {SCHEMA_VERSION}")
        if self.task not in TASK_NAMES:
            raise ConfigError("task", f"must be one of {TASK_NAMES}")
        if self.model not in ALL_KINDS:
            raise ConfigError("model", f"must be one of {ALL_KINDS}")
        if self.mode not in MODE_CHOICES:
            raise ConfigError("mode", f"must be one of {MODE_CHOICES}")
        if self.backend not in BACKEND_CHOICES:
            raise ConfigError("backend", f"must be one of {BACKEND_CHOICES}")
        if self.depth is None:
            self.depth = default_depth(self.task)
        if not isinstance(self.depth, int) or self.depth < 1:
            raise ConfigError("depth", "must be a positive integer")
        if not isinstance(self.epochs, int) or self.epochs < 0:
            raise ConfigError("epochs", "must be a nonnegative integer")
        if not isinstance(self.seed, int):
            raise ConfigError("seed", "must be an integer")
        if self.window < 1:
            raise ConfigError("window", "must be a positive integer")
        if self.shots is not None and (not isinstance(self.shots, int) or self.shots < 1):
            raise ConfigError("shots", "must be a positive integer or null")
        if self.noise is not None:
            if self.backend != "noisy":
                raise ConfigError("noise", "pinned noise requires backend 'noisy'")
            try:
                NoiseModelParams.from_dict(self.noise)
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError("noise", str(exc)) from exc
        allowed = TASK_PARAM_KEYS[self.task]
        for key in self.task_params:
            if key not in allowed:
                raise ConfigError(f"task_params.{key}", f"not a parameter of task {self.task!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        for key in d:
            if key not in known:
                raise ConfigError(key, "unknown configuration field")
        if "task" not in d or "model" not in d:
            missing = "task" if "task" not in d else "model"
            raise ConfigError(missing, "required field is missing")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(str(path), f"not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


REPORTED_EPOCHS = (1, 15, 30, 100)


@dataclass
class RunSummary:
    config: dict
    reported: dict  # epoch -> {"train_mse": ..., "test_mse": ...}
    final_train_mse: float | None
    final_test_mse: float | None
    circuit_evals: int
    shift_evals: int
    seconds: float
    artifacts: dict
    error: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)
