"""
PCMCI-style constraint-based discovery with partial-correlation tests.

Stage one selects a parent set for every target by iteratively removing lagged candidates
that are independent of the target given their strongest surviving peers. Stage two runs
the momentary conditional independence (MCI) test of each surviving link given the parents
of the target and the lag-shifted parents of the source.
"""
import logging
from typing import Dict, List, Tuple

import numpy as np

from tscd_bench.data import TimeSeriesMatrix
from tscd_bench.errors import InsufficientLengthError
from tscd_bench.methods.base import MethodResult, collapse_window, significant_links
from tscd_bench.numerics import partial_correlation
from tscd_bench.schemas.method import MethodConfig


log = logging.getLogger("tscd_bench.methods.pcmci")

MAX_CONDITION_SIZE = 3

Link = Tuple[int, int]


class LaggedSample:
    """
    Aligned lagged copies of a series over the rows t = 2 tau_max .. T - 1, so every test
    of one fit uses the same samples. column(var, lag) is x_{t - lag, var}.
    """

    def __init__(
            self,
            values: np.ndarray,
            tau_max: int):
        T, self.d = values.shape
        self.max_lag = 2 * tau_max
        if T - self.max_lag <= 2 * tau_max * self.d + 3:
            raise InsufficientLengthError(
                f"PCMCI with tau_max={tau_max} and d={self.d} needs more than "
                f"{2 * tau_max * self.d + 3 + self.max_lag} samples, got {T}")
        self.layers = np.stack([values[self.max_lag - lag:T - lag] for lag in range(self.max_lag + 1)])

    def column(
            self,
            var: int,
            lag: int) -> np.ndarray:
        return self.layers[lag, :, var]

    def matrix(self, links: List[Link]) -> np.ndarray | None:
        if not links:
            return None
        return np.column_stack([self.column(var, lag) for var, lag in links])


def select_parents(
        sample: LaggedSample,
        target: int,
        tau_max: int,
        alpha_sig: float) -> List[Link]:
    """
    Condition-selection stage for one target.

    Rounds k = 0, 1, ... test every surviving candidate (var, lag) given its k strongest
    surviving peers by current |r|, dropping it when p > alpha_sig. Removals take effect at
    the end of a round. Selection stops after a round without removals, when k reaches
    the number of surviving peers, or after k = 3.

    Returns
    -------
    parents : List[Link]
        Surviving links sorted by decreasing strength.
    """

    y = sample.column(target, 0)
    survivors = [(var, lag) for lag in range(1, tau_max + 1) for var in range(sample.d)]
    strength: Dict[Link, float] = {link: np.inf for link in survivors}

    for k in range(MAX_CONDITION_SIZE + 1):
        if k > len(survivors) - 1:
            break

        ranked = sorted(survivors, key=lambda link: (-strength[link], link))
        removed = []

        for link in survivors:
            peers = [peer for peer in ranked if peer != link][:k]
            r, p_value = partial_correlation(sample.column(*link), y, sample.matrix(peers))
            if p_value > alpha_sig:
                removed.append(link)
            else:
                strength[link] = abs(r)

        dropped = set(removed)
        survivors = [link for link in survivors if link not in dropped]
        if not removed:
            break

    return sorted(survivors, key=lambda link: (-strength[link], link))


def pcmci(
        X: TimeSeriesMatrix,
        cfg: MethodConfig) -> MethodResult:
    """
    Runs condition selection for every target, then MCI on every surviving link.

    Window scores are |r| of the MCI test (zero for links removed in stage one) and
    window p-values are the MCI p-values (one for removed links). The summary score is the
    maximum over lags; p -> q is an edge when some lag has p-value <= alpha_sig.

    Parameters
    ----------
    X : TimeSeriesMatrix
        Fully observed series.
    cfg : MethodConfig
        Uses tau_max and alpha_sig.

    Returns
    -------
    result : MethodResult
    """

    values = X.require_complete("PCMCI")
    tau_max, alpha_sig = cfg.tau_max, cfg.alpha_sig
    sample = LaggedSample(values, tau_max)
    d = sample.d

    parents = {target: select_parents(sample, target, tau_max, alpha_sig) for target in range(d)}

    window_scores = np.zeros((tau_max, d, d))
    window_pvalues = np.ones((tau_max, d, d))

    for target in range(d):
        y = sample.column(target, 0)

        for source, lag in parents[target]:
            conditions = [link for link in parents[target] if link != (source, lag)]
            for var, parent_lag in parents[source]:
                shifted = (var, parent_lag + lag)
                if shifted not in conditions and shifted != (source, lag):
                    conditions.append(shifted)

            r, p_value = partial_correlation(sample.column(source, lag), y, sample.matrix(conditions))
            window_scores[lag - 1, source, target] = abs(r)
            window_pvalues[lag - 1, source, target] = p_value

    log.debug(f"Selected {sum(len(links) for links in parents.values())} candidate parents")

    return MethodResult(
        scores=collapse_window(window_scores),
        graph=significant_links(window_pvalues, alpha_sig),
        window_scores=window_scores,
        window_pvalues=window_pvalues,
        diagnostics={"parents": parents})
