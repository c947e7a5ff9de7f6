"""Quantum reservoir computing with 4-qubit recurrent circuit cells."""

from .cells import CellWeights, init_weights, linear_head, rollout, window_features
from .config import ExperimentConfig, RunSummary, ConfigError
from .noise import (
    KrausChannel,
    NoiseModelParams,
    depolarizing_channel,
    sample_noise_model,
    thermal_relaxation_channel,
)
from .runner import emit_plot_data, generate_task, run, sweep
from .tasks import task_series
from .training import WindowedDataset, evaluate, make_windows, mse, rmsprop_step, train
from .vqc import (
    EVALS,
    NoiselessBackend,
    NoisyBackend,
    encode,
    entangle_block,
    parameter_shift_gradient,
    vqc_forward,
)

__all__ = [
    "CellWeights",
    "ConfigError",
    "EVALS",
    "ExperimentConfig",
    "KrausChannel",
    "NoiseModelParams",
    "NoiselessBackend",
    "NoisyBackend",
    "RunSummary",
    "WindowedDataset",
    "depolarizing_channel",
    "emit_plot_data",
    "encode",
    "entangle_block",
    "evaluate",
    "generate_task",
    "init_weights",
    "linear_head",
    "make_windows",
    "mse",
    "parameter_shift_gradient",
    "rmsprop_step",
    "rollout",
    "run",
    "sample_noise_model",
    "sweep",
    "task_series",
    "thermal_relaxation_channel",
    "train",
    "vqc_forward",
    "window_features",
]
