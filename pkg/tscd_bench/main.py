"""
Command-line entry point: generate, run, evaluate, report and radar.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import matplotlib.pyplot as plt

from tscd_bench.errors import BenchmarkError, ConfigError
from tscd_bench.radar import METRIC_COLUMNS, render_radar
from tscd_bench.report import aggregate_file, write_reports
from tscd_bench.runner import MANIFEST_FILE, generate_datasets, rescore_run, run_experiment, score_pair
from tscd_bench.schemas.experiment import SELECTION_MODES, ExperimentConfig, load_config
from tscd_bench.settings import Settings, configure_logging, load_settings


log = logging.getLogger("tscd_bench.main")


def _load(args: argparse.Namespace) -> ExperimentConfig:
    config = load_config(args.config)
    if args.seed is not None:
        config = config.model_copy(update={"master_seed": args.seed})
    return config


def cmd_generate(args: argparse.Namespace, settings: Settings) -> None:
    config = _load(args)
    out = settings.resolve_output_dir(args.out, config.output_dir)
    written = generate_datasets(config, out)
    print(f"{len(written)} datasets written to {out}")


def cmd_run(args: argparse.Namespace, settings: Settings) -> None:
    config = _load(args)
    out = settings.resolve_output_dir(args.out, config.output_dir)
    jobs = settings.resolve_jobs(args.jobs, config.jobs)
    run_experiment(config, out, jobs=jobs)
    print(f"Results written to {out}")


def cmd_evaluate(args: argparse.Namespace, settings: Settings) -> None:
    if args.scores and args.graph:
        print(json.dumps(score_pair(args.scores, args.graph)))
        return
    if args.out:
        print(f"Rescored results written to {rescore_run(args.out)}")
        return
    raise ConfigError(["evaluate: give --scores with --graph, or --out"])


def _manifest_modes(out: Path) -> List[str]:
    manifest = out / MANIFEST_FILE
    if not manifest.exists():
        return list(SELECTION_MODES)
    return json.loads(manifest.read_text())["config"]["modes"]


def cmd_report(args: argparse.Namespace, settings: Settings) -> None:
    out = Path(args.out)
    modes = [args.mode] if args.mode else _manifest_modes(out)
    for path in write_reports(out, modes):
        print(path)


def cmd_radar(args: argparse.Namespace, settings: Settings) -> None:
    out = Path(args.out)
    path = Path(args.svg) if args.svg else out / f"radar_{args.mode}_{args.metric}.svg"
    figure = render_radar(
        out / aggregate_file(args.mode),
        args.metric,
        output_path=path,
        mode=args.mode,
        d=args.d,
        t=args.t,
        f=args.f,
        model=args.model)
    plt.close(figure)
    print(path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tscd_bench", description="Time-series causal discovery benchmark")
    commands = parser.add_subparsers(dest="command", required=True)

    generate = commands.add_parser("generate", help="write datasets and ground-truth graphs only")
    generate.add_argument("--config", required=True, help="config file or preset name")
    generate.add_argument("--out")
    generate.add_argument("--seed", type=int, help="master seed override")
    generate.set_defaults(handler=cmd_generate)

    run = commands.add_parser("run", help="run the full experiment grid")
    run.add_argument("--config", required=True, help="config file or preset name")
    run.add_argument("--out")
    run.add_argument("--jobs", type=int)
    run.add_argument("--seed", type=int, help="master seed override")
    run.set_defaults(handler=cmd_run)

    evaluate = commands.add_parser("evaluate", help="score persisted score matrices against persisted graphs")
    evaluate.add_argument("--scores")
    evaluate.add_argument("--graph")
    evaluate.add_argument("--out")
    evaluate.set_defaults(handler=cmd_evaluate)

    report = commands.add_parser("report", help="rewrite the aggregate and summary tables of a run")
    report.add_argument("--out", required=True)
    report.add_argument("--mode", choices=SELECTION_MODES)
    report.set_defaults(handler=cmd_report)

    radar = commands.add_parser("radar", help="draw a radar chart from an aggregate table")
    radar.add_argument("--out", required=True)
    radar.add_argument("--mode", choices=SELECTION_MODES, default="best_per_dataset")
    radar.add_argument("--metric", choices=list(METRIC_COLUMNS), default="auprc")
    radar.add_argument("--d", type=int)
    radar.add_argument("--t", type=int)
    radar.add_argument("--f", type=float)
    radar.add_argument("--model", choices=["linear", "nonlinear"])
    radar.add_argument("--svg", help="chart path, defaults to radar_<mode>_<metric>.svg in --out")
    radar.set_defaults(handler=cmd_radar)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    settings = load_settings()
    configure_logging(settings.logging_level)

    args = build_parser().parse_args(argv)

    try:
        args.handler(args, settings)
    except BenchmarkError as e:
        log.error(e)
        print(f"error: {e}", file=sys.stderr)
        return 1

    return 0
