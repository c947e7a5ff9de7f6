"""Windowed datasets, the RMSprop optimizer, and the two training regimes.

Reservoir mode freezes the recurrent core after random initialization and
trains only the linear readout; since the core never changes, the per-window
feature vectors are computed once and reused across epochs (only when the
backend is deterministic). Full mode re-runs the cell and applies
parameter-shift gradients, so every window costs 2 circuit evaluations per
quantum parameter.

Updates are stochastic: one RMSprop step per window, windows visited in
fixed order, no shuffling.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import cells
from .vqc import EVALS

TRAIN_FRACTION = 0.67


@dataclass
class WindowedDataset:
    """Sliding windows plus scalar targets; the first 67% of windows train."""

    inputs: np.ndarray  # (n_windows, window_len)
    targets: np.ndarray  # (n_windows,)
    split_index: int

    def __len__(self) -> int:
        return len(self.targets)

    def indices(self, split: str) -> range:
        if split == "train":
            return range(self.split_index)
        if split == "test":
            return range(self.split_index, len(self.targets))
        raise ValueError(f"split must be 'train' or 'test', got {split!r}")


def make_windows(series, window_len: int, target_series=None) -> WindowedDataset:
    """Window k is series[k:k+N]; its target is (target_series or series)[k+N]."""
    series = np.asarray(series, dtype=float)
    if series.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if len(series) <= window_len:
        raise ValueError(
            f"series length {len(series)} must exceed window length {window_len}"
        )
    targets_from = series if target_series is None else np.asarray(target_series, dtype=float)
    if len(targets_from) != len(series):
        raise ValueError("target series must match the input series length")
    n = len(series) - window_len
    inputs = np.stack([series[k : k + window_len] for k in range(n)])
    targets = np.array([targets_from[k + window_len] for k in range(n)])
    return WindowedDataset(
        inputs=inputs, targets=targets, split_index=int(np.floor(TRAIN_FRACTION * n))
    )


def mse(predictions, targets) -> float:
    predictions = np.asarray(predictions, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if predictions.shape != targets.shape:
        raise ValueError("predictions and targets must have equal length")
    if predictions.size == 0:
        raise ValueError("mse of empty input is undefined")
    return float(np.mean((predictions - targets) ** 2))


@dataclass
class RmspropState:
    """Running second moment; hyperparameters as used throughout the experiments."""

    second_moment: np.ndarray
    lr: float = 0.01
    alpha: float = 0.99
    eps: float = 1e-8

    @classmethod
    def zeros(cls, n_params: int, **kwargs) -> "RmspropState":
        return cls(second_moment=np.zeros(n_params), **kwargs)


def rmsprop_step(
    state: RmspropState, params: np.ndarray, grads: np.ndarray
) -> tuple[RmspropState, np.ndarray]:
    """s <- alpha*s + (1-alpha)*g^2;  theta <- theta - lr*g/(sqrt(s)+eps)."""
    params = np.asarray(params, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if params.shape != grads.shape or params.shape != state.second_moment.shape:
        raise ValueError("params, grads and optimizer state must have equal length")
    s = state.alpha * state.second_moment + (1.0 - state.alpha) * grads**2
    new_params = params - state.lr * grads / (np.sqrt(s) + state.eps)
    return RmspropState(s, state.lr, state.alpha, state.eps), new_params


@dataclass
class EpochRecord:
    epoch: int
    train_mse: float
    test_mse: float
    circuit_evals: int  # cumulative within the run
    shift_evals: int
    seconds: float


def _all_features(weights: cells.CellWeights, data: WindowedDataset, backend) -> np.ndarray:
    return np.stack(
        [cells.window_features(weights, data.inputs[k], backend) for k in range(len(data))]
    )


def evaluate(weights: cells.CellWeights, data: WindowedDataset, split: str, backend=None):
    """(mse, predictions) over one split; pure."""
    idx = data.indices(split)
    preds = np.array([cells.rollout(weights, data.inputs[k], backend) for k in idx])
    return mse(preds, data.targets[list(idx)]), preds


def train(
    weights: cells.CellWeights,
    data: WindowedDataset,
    mode: str,
    epochs: int,
    backend=None,
    seed: int | None = None,
) -> list[EpochRecord]:
    """Train in place; returns one record per epoch (losses, eval counts, wall time)."""
    if mode not in ("reservoir", "full"):
        raise ValueError(f"mode must be 'reservoir' or 'full', got {mode!r}")
    if epochs < 0:
        raise ValueError("epochs must be nonnegative")
    total0, shift0 = EVALS.snapshot()
    start = time.perf_counter()
    log: list[EpochRecord] = []
    if epochs == 0:
        return log

    opt = RmspropState.zeros(cells.trainable_vector(weights, mode).size)
    train_idx = data.indices("train")

    cache_features = mode == "reservoir" and getattr(backend, "deterministic", True)
    features = _all_features(weights, data, backend) if cache_features else None

    for epoch in range(1, epochs + 1):
        for k in train_idx:
            target = data.targets[k]
            if mode == "reservoir":
                feats = (
                    features[k]
                    if features is not None
                    else cells.window_features(weights, data.inputs[k], backend)
                )
                y = cells.linear_head(weights, feats)
                dloss_dy = 2.0 * (y - target)
                grad = np.concatenate([dloss_dy * feats, [dloss_dy]])
            else:
                y = cells.rollout(weights, data.inputs[k], backend)
                dloss_dy = 2.0 * (y - target)
                g = cells.window_gradient(weights, data.inputs[k], dloss_dy, backend)
                grad = cells.gradient_vector(g, weights, mode)
            params = cells.trainable_vector(weights, mode)
            opt, params = rmsprop_step(opt, params, grad)
            cells.set_trainable_vector(weights, mode, params)

        if features is not None:
            preds = features @ weights.head_w + weights.head_b
            train_mse = mse(preds[: data.split_index], data.targets[: data.split_index])
            test_mse = mse(preds[data.split_index :], data.targets[data.split_index :])
        else:
            train_mse, _ = evaluate(weights, data, "train", backend)
            test_mse, _ = evaluate(weights, data, "test", backend)
        total, shift = EVALS.snapshot()
        log.append(
            EpochRecord(
                epoch=epoch,
                train_mse=train_mse,
                test_mse=test_mse,
                circuit_evals=total - total0,
                shift_evals=shift - shift0,
                seconds=time.perf_counter() - start,
            )
        )
    return log
