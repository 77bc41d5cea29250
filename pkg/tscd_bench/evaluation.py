"""
Scoring of edge-score matrices against ground truth, multi-seed aggregation and the
hyperparameter-selection protocols.

Metrics live on [0, 1] inside records and are reported x100 in every aggregate.
"""
import logging
from typing import Iterable, List, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError
from sklearn.metrics import average_precision_score, roc_auc_score

from tscd_bench.data import CausalGraph
from tscd_bench.errors import CoverageError, InvalidInputError, UndefinedMetricError
from tscd_bench.schemas.record import (
    AGGREGATE_COLUMNS, RESULT_COLUMNS, SUMMARY_COLUMNS, AggregateRow, EvalRecord, SummaryRow)


log = logging.getLogger("tscd_bench.evaluation")

CELL_COLUMNS = ["scenario", "d", "t", "f", "method"]


def _off_diagonal(
        scores: np.ndarray,
        truth: CausalGraph) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=float)
    if scores.shape != truth.summary.shape:
        raise InvalidInputError(f"Score matrix {scores.shape} does not match graph {truth.summary.shape}")
    off = ~np.eye(truth.d, dtype=bool)
    return scores[off], truth.summary[off].astype(int)


def _unit(value: float) -> float:
    # summation can overshoot 1 by an ulp on perfect rankings
    return min(1.0, max(0.0, float(value)))


def auroc(
        scores: np.ndarray,
        truth: CausalGraph) -> float:
    """
    Area under the ROC curve of the off-diagonal scores, ties counted as one half.
    """
    values, labels = _off_diagonal(scores, truth)
    positives = int(labels.sum())
    if positives == 0 or positives == labels.size:
        raise UndefinedMetricError(
            f"AUROC needs both edges and non-edges off the diagonal ({positives} of {labels.size} are edges)")
    return _unit(roc_auc_score(labels, values))


def auprc(
        scores: np.ndarray,
        truth: CausalGraph) -> float:
    """
    Average precision of the off-diagonal scores; tied scores form a single threshold.
    """
    values, labels = _off_diagonal(scores, truth)
    if labels.sum() == 0:
        raise UndefinedMetricError("AUPRC needs at least one off-diagonal edge")
    return _unit(average_precision_score(labels, values))


def as_frame(records: Iterable[EvalRecord] | pd.DataFrame) -> pd.DataFrame:
    """
    Records as a DataFrame with the results columns plus a `label` column,
    "kind" or "kind[param]".
    """
    if isinstance(records, pd.DataFrame):
        frame = records.copy()
    else:
        frame = pd.DataFrame([record.model_dump() for record in records], columns=RESULT_COLUMNS)

    if frame.empty:
        raise InvalidInputError("No records to evaluate")

    frame["param"] = frame["param"].fillna("").astype(str)
    frame["f"] = frame["f"].astype(float)
    frame["auroc"] = frame["auroc"].astype(float)
    frame["auprc"] = frame["auprc"].astype(float)
    frame["label"] = np.where(
        frame["param"] == "",
        frame["scenario"],
        frame["scenario"] + "[" + frame["param"] + "]")
    return frame


def _std(values: pd.Series) -> float:
    return float(values.std(ddof=1)) if len(values) > 1 else 0.0


def _summarize(
        frame: pd.DataFrame,
        keys: List[str]) -> pd.DataFrame:
    grouped = frame.groupby(keys, dropna=False, sort=True)
    summary = grouped.agg(
        mean_auroc=("auroc", "mean"),
        std_auroc=("auroc", _std),
        mean_auprc=("auprc", "mean"),
        std_auprc=("auprc", _std),
        n=("auprc", "size")).reset_index()

    for column in ("mean_auroc", "std_auroc", "mean_auprc", "std_auprc"):
        summary[column] = summary[column] * 100.0
    summary["n"] = summary["n"].astype(int)
    return summary


def _valid(frame: pd.DataFrame) -> pd.DataFrame:
    sentinel = frame["auroc"].isna() | frame["auprc"].isna()
    if sentinel.any():
        log.warning(f"Ignoring {int(sentinel.sum())} sentinel rows in aggregation")
    return frame[~sentinel]


def aggregate(
        records: Iterable[EvalRecord] | pd.DataFrame,
        group_by: Sequence[str] = ("label", "d", "t", "f", "method", "config_id")) -> pd.DataFrame:
    """
    Mean and sample standard deviation (n - 1; 0 for one trial) of both metrics per group,
    reported x100. Sentinel rows are left out of the statistics.

    Parameters
    ----------
    records : Iterable[EvalRecord] | pd.DataFrame
        Records on the [0, 1] scale.
    group_by : Sequence[str]
        Grouping columns; "label" is the scenario label.

    Returns
    -------
    rows : pd.DataFrame
        group_by columns followed by mean_auroc, std_auroc, mean_auprc, std_auprc, n.
    """
    frame = _valid(as_frame(records))
    if frame.empty:
        raise InvalidInputError("Every record is a sentinel; nothing to aggregate")
    return _summarize(frame, list(group_by))


def check_coverage(frame: pd.DataFrame) -> None:
    """
    Every configuration of a method must appear for every scenario and seed of each setting.
    """

    for (d, t, f, method), group in frame.groupby(["d", "t", "f", "method"], dropna=False, sort=True):
        expected = pd.MultiIndex.from_product(
            [sorted(group["label"].unique()), sorted(group["seed"].unique()), sorted(group["config_id"].unique())],
            names=["label", "seed", "config_id"])
        present = pd.MultiIndex.from_frame(group[["label", "seed", "config_id"]])
        missing = expected.difference(present)
        if len(missing):
            label, seed, config_id = missing[0]
            raise CoverageError(
                f"Configuration {config_id} has no record for scenario {label}, "
                f"d={d}, t={t}, f={None if pd.isna(f) else f}, seed {seed} "
                f"({len(missing)} holes in total)")


def _cell_config_means(frame: pd.DataFrame) -> pd.DataFrame:
    keys = ["label", "d", "t", "f", "method", "config_id"]
    return frame.groupby(keys, dropna=False, sort=True)[["auroc", "auprc"]].mean().reset_index()


def _pick_best(
        means: pd.DataFrame,
        keys: List[str]) -> pd.DataFrame:
    # idxmax keeps the first of equal maxima; config_id order is canonical after sorting
    ordered = means.sort_values(keys + ["config_id"], kind="mergesort").reset_index(drop=True)
    ordered = ordered[ordered["auprc"].notna()]
    best = ordered.loc[ordered.groupby(keys, dropna=False, sort=True)["auprc"].idxmax()]
    return best[keys + ["config_id"]]


def _checked(
        rows: pd.DataFrame,
        row_model: type[BaseModel]) -> pd.DataFrame:
    try:
        for row in rows.to_dict("records"):
            row_model.model_validate(row)
    except ValidationError as error:
        raise InvalidInputError(f"Malformed {row_model.__name__}: {error}") from error
    return rows


def _finish(
        summary: pd.DataFrame,
        mode: str) -> pd.DataFrame:
    summary = summary.rename(columns={"label": "scenario"})
    summary["mode"] = mode
    rows = summary[AGGREGATE_COLUMNS].sort_values(CELL_COLUMNS, kind="mergesort").reset_index(drop=True)
    return _checked(rows, AggregateRow)


def _scenario_averages(
        means: pd.DataFrame,
        setting: List[str]) -> pd.DataFrame:
    # a configuration competes only if it has valid records for every scored scenario
    expected = means.groupby(setting, dropna=False, sort=True)["label"].nunique().rename("expected").reset_index()
    averaged = means.groupby(setting + ["config_id"], dropna=False, sort=True).agg(
        auroc=("auroc", "mean"),
        auprc=("auprc", "mean"),
        covered=("label", "nunique")).reset_index()
    averaged = averaged.merge(expected, on=setting)

    partial = averaged["covered"] < averaged["expected"]
    if partial.any():
        log.warning(
            f"Excluding {int(partial.sum())} configurations with a sentinel-only scenario "
            f"from scenario-averaged selection")
    eligible = averaged[~partial]

    uncovered = expected.merge(eligible[setting].drop_duplicates(), on=setting, how="left", indicator=True)
    uncovered = uncovered[uncovered["_merge"] == "left_only"]
    if len(uncovered):
        row = uncovered.iloc[0]
        f = None if pd.isna(row["f"]) else row["f"]
        raise CoverageError(
            f"No configuration of {row['method']} has valid records for every scenario "
            f"at d={row['d']}, t={row['t']}, f={f}")

    return eligible.drop(columns=["covered", "expected"])


def select_hyperparams(
        records: Iterable[EvalRecord] | pd.DataFrame,
        mode: str) -> pd.DataFrame:
    """
    Aggregate rows under one hyperparameter-selection protocol.

    - best_per_dataset: per (scenario, setting, method), the configuration with the best
      mean AUPRC over seeds; both metrics are reported for that configuration.
    - best_avg_scenarios: per (setting, method), the configuration with the best AUPRC
      averaged over scenario means; reported per scenario.
    - all_hyper_aggregate: per (scenario, setting, method), mean and std over every
      record of every configuration and seed.

    Ties go to the first config_id in sorted order.

    Returns
    -------
    rows : pd.DataFrame
        Columns of the aggregate CSV, metrics x100, canonically sorted.
    """

    frame = as_frame(records)
    check_coverage(frame)
    valid = _valid(frame)
    if valid.empty:
        raise InvalidInputError("Every record is a sentinel; nothing to select")

    cell = ["label", "d", "t", "f", "method"]

    if mode == "best_per_dataset":
        best = _pick_best(_cell_config_means(valid), cell)
        selected = valid.merge(best, on=cell + ["config_id"])
        return _finish(_summarize(selected, cell), mode)

    if mode == "best_avg_scenarios":
        setting = ["d", "t", "f", "method"]
        best = _pick_best(_scenario_averages(_cell_config_means(valid), setting), setting)
        selected = valid.merge(best, on=setting + ["config_id"])
        return _finish(_summarize(selected, cell), mode)

    if mode == "all_hyper_aggregate":
        return _finish(_summarize(valid, cell), mode)

    raise InvalidInputError(f"Unknown selection mode {mode}")


def summarize_methods(records: Iterable[EvalRecord] | pd.DataFrame) -> pd.DataFrame:
    """
    Study-wide summary per (method, d): mean and std over all settings and scenarios of the
    best-per-dataset cell means, x100.
    """

    frame = as_frame(records)
    check_coverage(frame)
    valid = _valid(frame)

    cell = ["label", "d", "t", "f", "method"]
    best = _pick_best(_cell_config_means(valid), cell)
    cells = _cell_config_means(valid).merge(best, on=cell + ["config_id"])

    summary = _summarize(cells, ["method", "d"])
    return _checked(
        summary[SUMMARY_COLUMNS].sort_values(["method", "d"], kind="mergesort").reset_index(drop=True),
        SummaryRow)
