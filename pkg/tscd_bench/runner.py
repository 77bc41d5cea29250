"""
Grid runner: builds every (setting x scenario x seed) dataset once, fits every method
configuration on it and writes the results, aggregates and manifest of the run.
"""
import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

from tscd_bench import __version__
from tscd_bench.data import CausalGraph, TimeSeriesMatrix, load_scores, save_scores
from tscd_bench.errors import BenchmarkError
from tscd_bench.evaluation import auprc, auroc
from tscd_bench.methods import run_method
from tscd_bench.misspec import build_dataset
from tscd_bench.report import RESCORED_FILE, RESULTS_FILE, write_reports, write_results
from tscd_bench.schemas.experiment import ExperimentConfig
from tscd_bench.schemas.method import MethodConfig
from tscd_bench.schemas.model import BaseModelSpec
from tscd_bench.schemas.record import EvalRecord
from tscd_bench.schemas.scenario import ScenarioSpec


log = logging.getLogger("tscd_bench.runner")

MANIFEST_FILE = "manifest.json"
DATASET_DIR = "datasets"
SCORE_DIR = "scores"
TRIAL_FILE = "trial.json"


@dataclass
class TrialPlan:
    """
    One dataset of the grid and the configurations to fit on it.

    Attributes:
    - **spec** (ScenarioSpec): Scenario with the derived data seed.
    - **seed** (int): Trial seed as listed in the configuration.
    - **configs** (List[MethodConfig]): Method configurations.
    - **persist_root** (Path | None): Run directory when datasets are persisted.
    """
    spec: ScenarioSpec
    seed: int
    configs: List[MethodConfig]
    persist_root: Optional[Path] = None

    @property
    def key(self) -> str:
        document = [self.spec.model_dump(mode="json"), self.seed]
        return hashlib.sha256(json.dumps(document, sort_keys=True).encode("utf-8")).hexdigest()[:12]

    @property
    def name(self) -> str:
        return f"{self.spec.kind}_{self.key}"


def trial_seed(
        master_seed: int,
        kind: str,
        base: BaseModelSpec,
        seed: int) -> int:
    """
    Data seed of one trial, a hash of (master seed, scenario kind, setting, trial seed).

    Parameter levels of one kind share the seed, so graded levels differ only in the
    violation; adding scenarios never changes the data of existing trials.
    """
    document = [master_seed, kind, base.model_dump(mode="json"), seed]
    digest = hashlib.sha256(json.dumps(document, sort_keys=True).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def plan_trials(
        config: ExperimentConfig,
        persist_root: Optional[Path] = None) -> List[TrialPlan]:
    configs = config.expand_methods()
    plans = []

    for base in config.expand_settings():
        for seed in config.seeds:
            for spec in config.expand_scenarios(base, seed):
                derived = trial_seed(config.master_seed, spec.kind, base, seed)
                plans.append(TrialPlan(
                    spec=spec.model_copy(update={"seed": derived}),
                    seed=seed,
                    configs=configs,
                    persist_root=persist_root))

    return plans


def _record(
        plan: TrialPlan,
        cfg: MethodConfig,
        auroc_value: Optional[float] = None,
        auprc_value: Optional[float] = None) -> EvalRecord:
    base = plan.spec.base
    return EvalRecord(
        scenario=plan.spec.kind,
        param=plan.spec.param_label(),
        d=base.d,
        t=base.t,
        f=base.f,
        seed=plan.seed,
        method=cfg.method,
        config_id=cfg.config_id(),
        config_json=cfg.config_json(),
        auroc=auroc_value,
        auprc=auprc_value)


def _group_by_fit(configs: List[MethodConfig]) -> Dict[tuple, List[MethodConfig]]:
    groups: Dict[tuple, List[MethodConfig]] = {}
    for cfg in configs:
        groups.setdefault(cfg.fit_key(), []).append(cfg)
    return groups


def _trial_document(plan: TrialPlan) -> dict:
    base = plan.spec.base
    return {
        "scenario": plan.spec.kind,
        "param": plan.spec.param_label(),
        "d": base.d,
        "t": base.t,
        "f": base.f,
        "seed": plan.seed,
        "spec": plan.spec.model_dump(mode="json"),
        "fits": []}


def persist_dataset(
        plan: TrialPlan,
        data: TimeSeriesMatrix,
        truth: CausalGraph) -> Path:
    directory = plan.persist_root / DATASET_DIR / plan.name
    directory.mkdir(parents=True, exist_ok=True)
    data.to_csv(directory / "data.csv")
    truth.to_json(directory / "graph.json")
    (directory / TRIAL_FILE).write_text(json.dumps(_trial_document(plan), indent=2))
    return directory


def run_trial(plan: TrialPlan) -> List[EvalRecord]:
    """
    Builds the plan's dataset and scores every configuration on it.

    Configurations that share a fit key reuse one fit. Any BenchmarkError while building,
    fitting or scoring turns the affected rows into sentinel rows.
    """

    log.info(f"Trial {plan.name}: {plan.spec.kind} {plan.spec.param_label()} "
             f"d={plan.spec.base.d} t={plan.spec.base.t} f={plan.spec.base.f} seed={plan.seed}")

    try:
        data, truth = build_dataset(plan.spec)
    except BenchmarkError as e:
        log.error(f"Trial {plan.name}: dataset failed: {e}")
        return [_record(plan, cfg) for cfg in plan.configs]

    document = None
    if plan.persist_root is not None:
        directory = persist_dataset(plan, data, truth)
        score_dir = plan.persist_root / SCORE_DIR / plan.name
        score_dir.mkdir(parents=True, exist_ok=True)
        document = json.loads((directory / TRIAL_FILE).read_text())

    records = []
    for index, group in enumerate(_group_by_fit(plan.configs).values()):
        try:
            result = run_method(data, group[0])
            metrics = (auroc(result.scores, truth), auprc(result.scores, truth))
        except BenchmarkError as e:
            log.warning(f"Trial {plan.name}: {group[0].config_id()} gives sentinel rows: {e}")
            records.extend(_record(plan, cfg) for cfg in group)
            continue

        records.extend(_record(plan, cfg, *metrics) for cfg in group)

        if document is not None:
            score_file = f"fit_{index}.csv"
            save_scores(result.scores, score_dir / score_file)
            document["fits"].append({
                "score_file": score_file,
                "configs": [{"method": cfg.method, "config_id": cfg.config_id(), "config_json": cfg.config_json()}
                            for cfg in group]})

    if document is not None:
        (plan.persist_root / DATASET_DIR / plan.name / TRIAL_FILE).write_text(json.dumps(document, indent=2))

    return records


def _map_trials(
        plans: List[TrialPlan],
        jobs: int) -> List[List[EvalRecord]]:
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            return list(executor.map(run_trial, plans, chunksize=1))
    return [run_trial(plan) for plan in plans]


def write_manifest(
        config: ExperimentConfig,
        output_dir: Path,
        n_trials: int,
        n_records: int) -> Path:
    manifest = {
        "name": config.name,
        "config_hash": config.config_hash(),
        "tool_version": __version__,
        "trials": n_trials,
        "records": n_records,
        "config": config.model_dump(mode="json", by_alias=True)}
    path = output_dir / MANIFEST_FILE
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return path


def run_experiment(
        config: ExperimentConfig,
        output_dir: str | Path,
        jobs: Optional[int] = None) -> Path:
    """
    Runs the full grid of a configuration.

    Writes results.csv (canonically sorted, so serial and parallel runs produce identical
    bytes), aggregate_<mode>.csv per configured mode, summary.csv and manifest.json.

    Parameters
    ----------
    config : ExperimentConfig
        Validated configuration.
    output_dir : str | Path
        Run directory, created when missing.
    jobs : int | None
        Worker processes; defaults to config.jobs.

    Returns
    -------
    output_dir : Path
    """

    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    jobs = jobs or config.jobs

    plans = plan_trials(config, persist_root=output_dir if config.persist_datasets else None)
    log.info(f"Running {len(plans)} trials x {len(config.expand_methods())} configurations with {jobs} worker(s)")

    records = [record for trial in _map_trials(plans, jobs) for record in trial]

    write_results(records, output_dir / RESULTS_FILE)
    write_manifest(config, output_dir, len(plans), len(records))

    # the raw results stay on disk even when no aggregate can be formed
    try:
        write_reports(output_dir, config.modes)
    except BenchmarkError as e:
        log.error(f"No reports for {output_dir}: {e}")

    return output_dir


def generate_datasets(
        config: ExperimentConfig,
        output_dir: str | Path) -> List[Path]:
    """
    Builds and persists every dataset and ground-truth graph of the grid without fitting.
    """

    output_dir = Path(output_dir)
    written = []

    for plan in plan_trials(config, persist_root=output_dir):
        data, truth = build_dataset(plan.spec)
        written.append(persist_dataset(plan, data, truth))

    log.info(f"Wrote {len(written)} datasets to {output_dir / DATASET_DIR}")
    return written


def score_pair(
        scores_path: str | Path,
        graph_path: str | Path) -> dict:
    scores = load_scores(scores_path)
    truth = CausalGraph.from_json(graph_path)
    return {"auroc": auroc(scores, truth), "auprc": auprc(scores, truth)}


def rescore_run(output_dir: str | Path) -> Path:
    """
    Scores every persisted score matrix of a run against its persisted graph and writes
    rescored.csv in the results format.
    """

    output_dir = Path(output_dir)
    records = []

    for trial_file in sorted((output_dir / DATASET_DIR).glob(f"*/{TRIAL_FILE}")):
        document = json.loads(trial_file.read_text())
        truth = CausalGraph.from_json(trial_file.parent / "graph.json")

        for fit in document["fits"]:
            scores = load_scores(output_dir / SCORE_DIR / trial_file.parent.name / fit["score_file"])
            auroc_value, auprc_value = auroc(scores, truth), auprc(scores, truth)
            for cfg in fit["configs"]:
                records.append(EvalRecord(
                    scenario=document["scenario"],
                    param=document["param"],
                    d=document["d"],
                    t=document["t"],
                    f=document["f"],
                    seed=document["seed"],
                    method=cfg["method"],
                    config_id=cfg["config_id"],
                    config_json=cfg["config_json"],
                    auroc=auroc_value,
                    auprc=auprc_value))

    path = output_dir / RESCORED_FILE
    write_results(records, path)
    return path
