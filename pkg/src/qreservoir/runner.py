"""Experiment runner: build task/model/backend from a config, train, persist artifacts.

Every run owns one output directory holding:
  config.json      echo of the validated configuration
  loss_log.csv     per-epoch train/test MSE and cumulative circuit-eval counts
  predictions.csv  final-model prediction trace (index,target,prediction,split)
  checkpoint.json  trained weights, tagged with the config hash
  noise_model.json sampled noise parameters (noisy runs only)
  summary.json     reported-epoch losses, eval counts, wall time, artifact paths

CSV artifacts contain only deterministic values, so a config+seed rerun
reproduces them byte for byte; wall-clock time lives in summary.json.
"""
from __future__ import annotations

import json
import time
from pathlib import Path

import numpy as np

from . import cells, tasks, training
from .config import REPORTED_EPOCHS, ConfigError, ExperimentConfig, RunSummary
from .noise import NoiseModelParams, sample_noise_model
from .tasks import DivergenceError
from .vqc import EVALS, NoisyBackend


def _fmt(value: float) -> str:
    return repr(float(value))


def build_dataset(config: ExperimentConfig) -> training.WindowedDataset:
    inputs, targets = tasks.task_series(config.task, **config.task_params)
    if inputs is targets:  # self-prediction task
        if config.normalize:
            inputs = tasks.normalize_series(inputs)
        return training.make_windows(inputs, config.window)
    return training.make_windows(inputs, config.window, targets)


def build_backend(config: ExperimentConfig):
    """None for the analytic statevector backend, NoisyBackend otherwise."""
    if config.backend == "noiseless":
        return None, None
    if config.noise is not None:
        params = NoiseModelParams.from_dict(config.noise)
    else:
        params = sample_noise_model(
            config.noise_seed if config.noise_seed is not None else config.seed
        )
    backend = NoisyBackend(
        params,
        shots=config.shots,
        seed=config.seed,
        depolarize_first=config.depolarize_first,
    )
    return backend, params


def _write_loss_log(path: Path, log: list[training.EpochRecord]) -> None:
    lines = ["epoch,train_mse,test_mse,circuit_evals,shift_evals"]
    for rec in log:
        lines.append(
            f"{rec.epoch},{_fmt(rec.train_mse)},{_fmt(rec.test_mse)},"
            f"{rec.circuit_evals},{rec.shift_evals}"
        )
    path.write_text("\n".join(lines) + "\n")


def _write_predictions(
    path: Path, data: training.WindowedDataset, predictions: np.ndarray
) -> None:
    lines = ["index,target,prediction,split"]
    for k in range(len(data)):
        split = "train" if k < data.split_index else "test"
        lines.append(f"{k},{_fmt(data.targets[k])},{_fmt(predictions[k])},{split}")
    path.write_text("\n".join(lines) + "\n")


def _write_checkpoint(path: Path, config: ExperimentConfig, weights: cells.CellWeights) -> None:
    payload = {
        "schema_version": 1,
        "config_hash": config.config_hash(),
        "weights": weights.to_dict(),
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def load_checkpoint(path) -> cells.CellWeights:
    with open(path) as fh:
        payload = json.load(fh)
    return cells.CellWeights.from_dict(payload["weights"])


def run(config: ExperimentConfig) -> RunSummary:
    """Execute one seeded experiment and persist its artifacts."""
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config.save(out_dir / "config.json")

    backend, noise_params = build_backend(config)
    if noise_params is not None:
        (out_dir / "noise_model.json").write_text(
            json.dumps(noise_params.to_dict(), indent=2, sort_keys=True) + "\n"
        )

    weights = cells.init_weights(config.model, config.depth, config.seed)
    total0, shift0 = EVALS.snapshot()
    start = time.perf_counter()
    artifacts = {"config": str(out_dir / "config.json")}
    if noise_params is not None:
        artifacts["noise_model"] = str(out_dir / "noise_model.json")
    error = None
    log: list[training.EpochRecord] = []
    try:
        data = build_dataset(config)
        log = training.train(
            weights, data, config.mode, config.epochs, backend, seed=config.seed
        )
        _, train_preds = training.evaluate(weights, data, "train", backend)
        _, test_preds = training.evaluate(weights, data, "test", backend)
        predictions = np.concatenate([train_preds, test_preds])
        _write_loss_log(out_dir / "loss_log.csv", log)
        _write_predictions(out_dir / "predictions.csv", data, predictions)
        _write_checkpoint(out_dir / "checkpoint.json", config, weights)
        artifacts.update(
            {
                "loss_log": str(out_dir / "loss_log.csv"),
                "predictions": str(out_dir / "predictions.csv"),
                "checkpoint": str(out_dir / "checkpoint.json"),
            }
        )
    except DivergenceError as exc:
        error = str(exc)

    total, shift = EVALS.snapshot()
    by_epoch = {rec.epoch: rec for rec in log}
    reported = {
        str(epoch): {
            "train_mse": by_epoch[epoch].train_mse,
            "test_mse": by_epoch[epoch].test_mse,
        }
        for epoch in REPORTED_EPOCHS
        if epoch in by_epoch
    }
    summary = RunSummary(
        config=config.to_dict(),
        reported=reported,
        final_train_mse=log[-1].train_mse if log else None,
        final_test_mse=log[-1].test_mse if log else None,
        circuit_evals=total - total0,
        shift_evals=shift - shift0,
        seconds=time.perf_counter() - start,
        artifacts=artifacts,
        error=error,
    )
    (out_dir / "summary.json").write_text(
        json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n"
    )
    return summary


def _table_cell(summary: RunSummary, epoch: int) -> str:
    rec = summary.reported.get(str(epoch))
    if rec is None:
        return ""
    return f"{rec['train_mse']:.2e}/{rec['test_mse']:.2e}"


def sweep(configs: list[ExperimentConfig], table_path=None) -> list[RunSummary]:
    """Run each config in turn; failures are isolated per run."""
    summaries = []
    for config in configs:
        try:
            summaries.append(run(config))
        except ConfigError:
            raise
        except Exception as exc:  # isolate unexpected per-run failures
            summaries.append(
                RunSummary(
                    config=config.to_dict(),
                    reported={},
                    final_train_mse=None,
                    final_test_mse=None,
                    circuit_evals=0,
                    shift_evals=0,
                    seconds=0.0,
                    artifacts={},
                    error=f"{type(exc).__name__}: {exc}",
                )
            )
    if table_path is not None:
        write_table(summaries, table_path)
    return summaries


def write_table(summaries: list[RunSummary], path) -> None:
    """Combined results table, one row per run, in the loss-table layout."""
    header = "dataset,model,reservoir,seed,epoch_1,epoch_15,epoch_30,epoch_100"
    lines = [header]
    for s in summaries:
        cfg = s.config
        reservoir = "True" if cfg["mode"] == "reservoir" else "False"
        cells_ = [_table_cell(s, e) for e in REPORTED_EPOCHS]
        lines.append(
            f"{cfg['task']},{cfg['model']},{reservoir},{cfg['seed']}," + ",".join(cells_)
        )
    Path(path).write_text("\n".join(lines) + "\n")


def emit_plot_data(run_dir, out_path=None) -> str:
    """Prediction trace of a completed run as CSV text; optionally written to a file."""
    source = Path(run_dir) / "predictions.csv"
    if not source.exists():
        raise FileNotFoundError(f"no prediction trace at {source}")
    text = source.read_text()
    if out_path is not None:
        Path(out_path).write_text(text)
    return text


def generate_task(task: str, out_path, **task_params) -> None:
    """Dump a task series to CSV (index,value for self-prediction; index,value,target for NARMA)."""
    inputs, targets = tasks.task_series(task, **task_params)
    if inputs is targets:
        lines = ["index,value"]
        lines.extend(f"{i},{_fmt(v)}" for i, v in enumerate(inputs))
    else:
        lines = ["index,value,target"]
        lines.extend(
            f"{i},{_fmt(u)},{_fmt(y)}" for i, (u, y) in enumerate(zip(inputs, targets))
        )
    Path(out_path).write_text("\n".join(lines) + "\n")
