"""
Radar charts of aggregate rows: one axis per scenario, one polygon per method.
"""
import logging
from pathlib import Path
from typing import List, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from tscd_bench.errors import CoverageError, InvalidInputError
from tscd_bench.report import filter_setting, load_aggregate


log = logging.getLogger("tscd_bench.radar")

# clockwise from the top
AXIS_ORDER = [
    "vanilla",
    "mixed",
    "trend_season",
    "minmax",
    "confounders",
    "measurement_error",
    "standardized",
    "missing",
    "nonstationary"]

METRIC_COLUMNS = {"auroc": "mean_auroc", "auprc": "mean_auprc"}

MIN_AXES = 3


def _kind(label: str) -> str:
    return label.split("[", 1)[0]


def axis_labels(labels: List[str]) -> List[str]:
    """
    Scenario labels in chart order: the fixed kinds first, remaining kinds after them
    alphabetically; parameter levels of one kind sit next to each other.
    """
    def position(label):
        kind = _kind(label)
        rank = AXIS_ORDER.index(kind) if kind in AXIS_ORDER else len(AXIS_ORDER)
        return rank, kind, label

    return sorted(set(labels), key=position)


def radar_table(
        frame: pd.DataFrame,
        metric: str) -> pd.DataFrame:
    """
    Method x scenario table of the metric, averaged over the settings left in the frame.
    Raises CoverageError when a method lacks a scenario or fewer than three scenarios remain.
    """
    if metric not in METRIC_COLUMNS:
        raise InvalidInputError(f"Unknown metric {metric}, expected one of {list(METRIC_COLUMNS)}")
    if frame.empty:
        raise CoverageError("No aggregate rows match the setting filter")

    table = frame.pivot_table(index="method", columns="scenario", values=METRIC_COLUMNS[metric], aggfunc="mean")
    table = table[axis_labels(list(table.columns))]

    if table.shape[1] < MIN_AXES:
        raise CoverageError(f"A radar chart needs at least {MIN_AXES} scenarios, got {list(table.columns)}")

    gaps = table.isna().stack()
    gaps = gaps[gaps]
    if len(gaps):
        method, scenario = gaps.index[0]
        raise CoverageError(f"Method {method} has no {metric} row for scenario {scenario}")

    return table


def render_radar(
        aggregate: pd.DataFrame | str | Path,
        metric: str,
        output_path: Optional[str | Path] = None,
        mode: Optional[str] = None,
        d: Optional[int] = None,
        t: Optional[int] = None,
        f: Optional[float] = None,
        model: Optional[str] = None) -> plt.Figure:
    """
    Draws one polygon per method over the scenario axes on a 0-100 radial scale.

    Parameters
    ----------
    aggregate : pd.DataFrame | str | Path
        Aggregate rows or the path of an aggregate CSV.
    metric : str
        "auroc" or "auprc".
    output_path : str | Path | None
        SVG destination; nothing is written when None.
    mode : str | None
        Keeps rows of one selection mode.
    d, t, f, model
        Setting filter, see report.filter_setting.

    Returns
    -------
    figure : matplotlib.figure.Figure
    """

    frame = aggregate if isinstance(aggregate, pd.DataFrame) else load_aggregate(aggregate)
    if mode is not None:
        frame = frame[frame["mode"] == mode]
    table = radar_table(filter_setting(frame, d=d, t=t, f=f, model=model), metric)

    labels = list(table.columns)
    # axes run clockwise from the top; set_theta_direction(-1) flips the polar default
    angles = np.linspace(0.0, 2.0 * np.pi, len(labels), endpoint=False)

    figure, ax = plt.subplots(figsize=(7.0, 7.0), subplot_kw={"projection": "polar"})
    ax.set_theta_offset(np.pi / 2.0)
    ax.set_theta_direction(-1)

    for method, row in table.iterrows():
        values = row.to_numpy(dtype=float)
        ax.plot(np.append(angles, angles[0]), np.append(values, values[0]), linewidth=1.8, label=method)
        ax.fill(angles, values, alpha=0.1)

    ax.set_xticks(angles)
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_ylim(0.0, 100.0)
    ax.set_yticks([20, 40, 60, 80, 100])
    ax.grid(alpha=0.3)
    ax.legend(loc="upper right", bbox_to_anchor=(1.25, 1.1))
    ax.set_title(metric.upper())
    figure.tight_layout()

    if output_path is not None:
        figure.savefig(output_path, format="svg", bbox_inches="tight")
        log.info(f"Wrote radar chart to {output_path}")

    return figure
