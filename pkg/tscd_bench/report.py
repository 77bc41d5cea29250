"""
Results files: the raw results CSV, one aggregate CSV per selection mode and the
study-wide summary.
"""
import logging
from pathlib import Path
from typing import Iterable, List, Optional

import numpy as np
import pandas as pd

from tscd_bench.evaluation import select_hyperparams, summarize_methods
from tscd_bench.schemas.record import AGGREGATE_COLUMNS, RESULT_COLUMNS, SUMMARY_COLUMNS, EvalRecord


log = logging.getLogger("tscd_bench.report")

RESULTS_FILE = "results.csv"
RESCORED_FILE = "rescored.csv"
SUMMARY_FILE = "summary.csv"
FLOAT_FORMAT = "%.4f"

SORT_COLUMNS = ["scenario", "param", "d", "t", "f", "seed", "method", "config_id"]


def aggregate_file(mode: str) -> str:
    return f"aggregate_{mode}.csv"


def _format_forcing(f: Optional[float]) -> str:
    return "" if f is None or pd.isna(f) else f"{f:g}"


def results_frame(records: Iterable[EvalRecord]) -> pd.DataFrame:
    """
    Records in canonical order on the persisted scale (metrics x100, forcing as text).
    """
    frame = pd.DataFrame([record.model_dump() for record in records], columns=RESULT_COLUMNS)

    # numeric forcing sorts before formatting so 10 precedes 40
    frame["f_sort"] = frame["f"].astype(float)
    frame = frame.sort_values(
        ["scenario", "param", "d", "t", "f_sort", "seed", "method", "config_id"],
        kind="mergesort",
        na_position="first").drop(columns="f_sort").reset_index(drop=True)

    frame["f"] = frame["f"].map(_format_forcing)
    frame["auroc"] = frame["auroc"].astype(float) * 100.0
    frame["auprc"] = frame["auprc"].astype(float) * 100.0
    return frame[RESULT_COLUMNS]


def write_results(
        records: Iterable[EvalRecord],
        path: str | Path) -> pd.DataFrame:
    """
    Writes the results CSV; sentinel metrics are empty cells.
    """
    frame = results_frame(records)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="")
    log.info(f"Wrote {len(frame)} result rows to {path}")
    return frame


def load_results(path: str | Path) -> pd.DataFrame:
    """
    Reads a results CSV back onto the [0, 1] metric scale.
    """
    frame = pd.read_csv(path, dtype={"param": str, "config_id": str, "config_json": str}, keep_default_na=False,
                        na_values={"f": [""], "auroc": [""], "auprc": [""]})
    frame["param"] = frame["param"].fillna("")
    frame["f"] = pd.to_numeric(frame["f"], errors="coerce")
    frame["auroc"] = pd.to_numeric(frame["auroc"], errors="coerce") / 100.0
    frame["auprc"] = pd.to_numeric(frame["auprc"], errors="coerce") / 100.0
    return frame


def _write_table(
        frame: pd.DataFrame,
        columns: List[str],
        path: Path) -> None:
    table = frame[columns].copy()
    if "f" in table:
        table["f"] = table["f"].map(_format_forcing)
    table.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    log.info(f"Wrote {len(table)} rows to {path}")


def write_reports(
        output_dir: str | Path,
        modes: List[str],
        results: Optional[pd.DataFrame] = None) -> List[Path]:
    """
    Writes aggregate_<mode>.csv for every mode and summary.csv from the run's results.

    Parameters
    ----------
    output_dir : str | Path
        Run directory holding results.csv.
    modes : List[str]
        Selection modes to report.
    results : pd.DataFrame | None
        Results on the [0, 1] scale; read from results.csv when None.

    Returns
    -------
    paths : List[Path]
        Written files.
    """

    output_dir = Path(output_dir)
    if results is None:
        results = load_results(output_dir / RESULTS_FILE)

    written = []
    for mode in modes:
        path = output_dir / aggregate_file(mode)
        _write_table(select_hyperparams(results, mode), AGGREGATE_COLUMNS, path)
        written.append(path)

    path = output_dir / SUMMARY_FILE
    _write_table(summarize_methods(results), SUMMARY_COLUMNS, path)
    written.append(path)

    return written


def load_aggregate(path: str | Path) -> pd.DataFrame:
    frame = pd.read_csv(path, keep_default_na=False, na_values={"f": [""]})
    frame["f"] = pd.to_numeric(frame["f"], errors="coerce")
    return frame


def filter_setting(
        frame: pd.DataFrame,
        d: Optional[int] = None,
        t: Optional[int] = None,
        f: Optional[float] = None,
        model: Optional[str] = None) -> pd.DataFrame:
    """
    Rows of one setting; the model filter keeps rows with (nonlinear) or without (linear)
    a forcing constant.
    """
    mask = np.ones(len(frame), dtype=bool)
    if d is not None:
        mask &= frame["d"].to_numpy() == d
    if t is not None:
        mask &= frame["t"].to_numpy() == t
    if f is not None:
        mask &= np.isclose(frame["f"].to_numpy(dtype=float), f)
    if model == "linear":
        mask &= frame["f"].isna().to_numpy()
    elif model == "nonlinear":
        mask &= frame["f"].notna().to_numpy()
    return frame[mask]
