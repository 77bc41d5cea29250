"""
Observation matrices and ground-truth graphs, plus their on-disk formats.

TimeSeriesMatrix persists as CSV with header var_0,...,var_{d-1} and empty cells for
missing entries. CausalGraph persists as JSON
{"d": int, "tau_max": int | null, "summary": [[0|1]], "window": [[[0|1]]] | null}.
ScoreMatrix persists as a headerless d x d CSV (row = source, column = target).
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import networkx as nx
import numpy as np
import pandas as pd

from tscd_bench.errors import InvalidInputError


log = logging.getLogger("tscd_bench.data")


@dataclass
class TimeSeriesMatrix:
    """
    T x d observations with an optional boolean missing mask.

    Missing cells hold NaN in `values`; every observed cell is finite.
    """
    values: np.ndarray
    missing_mask: Optional[np.ndarray] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

        if self.values.ndim != 2:
            raise InvalidInputError(f"Time series must be 2-D, got shape {self.values.shape}")

        if self.missing_mask is not None:
            self.missing_mask = np.asarray(self.missing_mask, dtype=bool)
            if self.missing_mask.shape != self.values.shape:
                raise InvalidInputError(
                    f"Mask shape {self.missing_mask.shape} does not match values {self.values.shape}")
            observed = self.values[~self.missing_mask]
        else:
            observed = self.values

        if not np.all(np.isfinite(observed)):
            raise InvalidInputError("Observed entries must be finite")

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def has_missing(self) -> bool:
        return self.missing_mask is not None and bool(self.missing_mask.any())

    def require_complete(self, operation: str) -> np.ndarray:
        """
        Returns the values, raising when any entry is missing.
        """
        if self.has_missing:
            raise InvalidInputError(f"{operation} needs a fully observed time series")
        return self.values

    def column_names(self) -> list[str]:
        return [f"var_{i}" for i in range(self.d)]

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.values.copy(), columns=self.column_names())
        if self.missing_mask is not None:
            frame = frame.mask(self.missing_mask)
        return frame

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "TimeSeriesMatrix":
        values = frame.to_numpy(dtype=float)
        mask = np.isnan(values)
        return cls(values=values, missing_mask=mask if mask.any() else None)

    def to_csv(self, path: str | Path) -> None:
        self.to_frame().to_csv(path, index=False, na_rep="")
        log.info(f"Wrote time series {self.T}x{self.d} to {path}")

    @classmethod
    def from_csv(cls, path: str | Path) -> "TimeSeriesMatrix":
        frame = pd.read_csv(path, float_precision="round_trip")
        return cls.from_frame(frame)


@dataclass
class CausalGraph:
    """
    Ground-truth graph.

    Attributes:
    - **summary** (np.ndarray): d x d booleans, entry [p, q] marks the edge p -> q.
    - **window** (np.ndarray | None): (tau_max + 1) x d x d booleans indexed by lag.
    """
    summary: np.ndarray
    window: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        self.summary = np.asarray(self.summary, dtype=bool)

        if self.summary.ndim != 2 or self.summary.shape[0] != self.summary.shape[1]:
            raise InvalidInputError(f"Summary graph must be square, got {self.summary.shape}")

        if self.window is not None:
            self.window = np.asarray(self.window, dtype=bool)
            if self.window.ndim != 3 or self.window.shape[1:] != self.summary.shape:
                raise InvalidInputError(
                    f"Window graph shape {self.window.shape} does not match d={self.d}")
            if self.window[0].diagonal().any():
                raise InvalidInputError("Self-edges require a positive lag")
            if not np.array_equal(self.window.any(axis=0), self.summary):
                raise InvalidInputError("Summary graph differs from the lag-OR of the window")

    @property
    def d(self) -> int:
        return self.summary.shape[0]

    @property
    def tau_max(self) -> Optional[int]:
        return None if self.window is None else self.window.shape[0] - 1

    def off_diagonal_labels(self) -> np.ndarray:
        return self.summary[~np.eye(self.d, dtype=bool)]

    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.d))
        sources, targets = np.nonzero(self.summary)
        graph.add_edges_from(zip(sources.tolist(), targets.tolist()))
        return graph

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "tau_max": self.tau_max,
            "summary": self.summary.astype(int).tolist(),
            "window": None if self.window is None else self.window.astype(int).tolist()}

    @classmethod
    def from_dict(cls, document: dict) -> "CausalGraph":
        summary = np.asarray(document["summary"], dtype=bool)
        window = document.get("window")
        graph = cls(
            summary=summary,
            window=None if window is None else np.asarray(window, dtype=bool))

        if graph.d != document.get("d", graph.d):
            raise InvalidInputError(f"Graph document declares d={document['d']} but has {graph.d} nodes")
        return graph

    def to_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def from_json(cls, path: str | Path) -> "CausalGraph":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, CausalGraph):
            return NotImplemented
        if not np.array_equal(self.summary, other.summary):
            return False
        if (self.window is None) != (other.window is None):
            return False
        return self.window is None or np.array_equal(self.window, other.window)


def save_scores(
        scores: np.ndarray,
        path: str | Path) -> None:
    """
    Writes a d x d score matrix as headerless CSV, rows are sources.
    """
    pd.DataFrame(scores).to_csv(path, index=False, header=False)


def load_scores(path: str | Path) -> np.ndarray:
    scores = pd.read_csv(path, header=None, float_precision="round_trip").to_numpy(dtype=float)
    if scores.ndim != 2 or scores.shape[0] != scores.shape[1]:
        raise InvalidInputError(f"Score matrix in {path} is not square: {scores.shape}")
    if not np.all(np.isfinite(scores)) or np.any(scores < 0):
        raise InvalidInputError(f"Score matrix in {path} must be finite and non-negative")
    return scores
