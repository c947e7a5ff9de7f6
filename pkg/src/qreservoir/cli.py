"""Command-line entry point.

Verbs:
  run            execute one experiment from a JSON config
  sweep          execute a list of configs and aggregate a results table
  emit-plot-data dump a completed run's prediction trace
  generate-task  dump a benchmark series to CSV
"""
from __future__ import annotations

import argparse
import json
import sys

from .config import ConfigError, ExperimentConfig
from .runner import emit_plot_data, generate_task, run, sweep
from .tasks import TASK_NAMES


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    d = config.to_dict()
    if args.seed is not None:
        d["seed"] = args.seed
    if args.output_dir is not None:
        d["output_dir"] = args.output_dir
    if args.backend is not None:
        d["backend"] = args.backend
    return ExperimentConfig.from_dict(d)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qreservoir", description="Quantum recurrent reservoir experiments"
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run one experiment from a config file")
    p_run.add_argument("--config", required=True, help="path to a JSON experiment config")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--output-dir", default=None, help="override the output directory")
    p_run.add_argument(
        "--backend", choices=("noiseless", "noisy"), default=None, help="override the backend"
    )

    p_sweep = sub.add_parser("sweep", help="run a JSON list of configs")
    p_sweep.add_argument("--config", required=True, help="path to a JSON list of configs")
    p_sweep.add_argument("--table", default=None, help="where to write the combined table CSV")

    p_plot = sub.add_parser("emit-plot-data", help="dump a run's prediction trace")
    p_plot.add_argument("--run-dir", required=True, help="output directory of a completed run")
    p_plot.add_argument("--out", default=None, help="destination CSV (stdout if omitted)")

    p_task = sub.add_parser("generate-task", help="dump a benchmark series to CSV")
    p_task.add_argument("--task", required=True, choices=TASK_NAMES)
    p_task.add_argument("--out", required=True, help="destination CSV path")
    p_task.add_argument(
        "--param",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="task parameter override (repeatable)",
    )
    return parser


def _parse_param(raw: str):
    if "=" not in raw:
        raise ConfigError("param", f"expected KEY=VALUE, got {raw!r}")
    key, value = raw.split("=", 1)
    try:
        parsed = json.loads(value)
    except json.JSONDecodeError:
        parsed = value
    return key, parsed


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "run":
            config = _apply_overrides(ExperimentConfig.load(args.config), args)
            summary = run(config)
            print(json.dumps(summary.to_dict(), indent=2, sort_keys=True))
            return 0 if summary.error is None else 1
        if args.verb == "sweep":
            with open(args.config) as fh:
                raw = json.load(fh)
            if not isinstance(raw, list):
                raise ConfigError("sweep", "config file must hold a JSON list of configs")
            configs = [ExperimentConfig.from_dict(d) for d in raw]
            summaries = sweep(configs, table_path=args.table)
            failures = [s for s in summaries if s.error is not None]
            for s in failures:
                print(f"run failed ({s.config['task']}/{s.config['model']}): {s.error}",
                      file=sys.stderr)
            print(f"{len(summaries) - len(failures)}/{len(summaries)} runs succeeded")
            return 0 if not failures else 1
        if args.verb == "emit-plot-data":
            text = emit_plot_data(args.run_dir, args.out)
            if args.out is None:
                sys.stdout.write(text)
            return 0
        if args.verb == "generate-task":
            params = dict(_parse_param(p) for p in args.param)
            generate_task(args.task, args.out, **params)
            return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"not found: {exc}", file=sys.stderr)
        return 2
    except (TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
