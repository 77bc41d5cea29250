from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from tscd_bench.errors import InvalidInputError


@dataclass
class MethodResult:
    """
    Output of one method fit.

    Attributes:
    - **scores** (np.ndarray): d x d non-negative edge scores, [p, q] for p -> q.
    - **graph** (np.ndarray): d x d binary summary graph.
    - **window_scores** (np.ndarray | None): (tau_max, d, d) scores, index l - 1 for lag l.
    - **window_pvalues** (np.ndarray | None): (tau_max, d, d) test p-values (pcmci).
    - **diagnostics** (dict): Method-specific notes such as ridge fallbacks or sweep counts.
    """
    scores: np.ndarray
    graph: np.ndarray
    window_scores: Optional[np.ndarray] = None
    window_pvalues: Optional[np.ndarray] = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.all(np.isfinite(self.scores)) or np.any(self.scores < 0):
            raise InvalidInputError("Scores must be finite and non-negative")


def collapse_window(window_scores: np.ndarray) -> np.ndarray:
    """
    Summary scores as the entrywise maximum over the lag axis.
    """
    window_scores = np.asarray(window_scores, dtype=float)
    if window_scores.ndim != 3:
        raise InvalidInputError(f"Window scores must be (tau_max, d, d), got {window_scores.shape}")
    if window_scores.shape[0] == 0:
        return np.zeros(window_scores.shape[1:])
    return window_scores.max(axis=0)


def threshold_scores(
        scores: np.ndarray,
        threshold: float) -> np.ndarray:
    return np.asarray(scores) > threshold


def significant_links(
        window_pvalues: np.ndarray,
        alpha_sig: float) -> np.ndarray:
    """
    Summary graph with p -> q whenever some lag has a p-value at or below alpha_sig.
    """
    return (np.asarray(window_pvalues) <= alpha_sig).any(axis=0)
