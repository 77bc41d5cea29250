"""
VAR-Granger: least-squares VAR fit, edge score = largest absolute lag coefficient.
"""
import logging

import numpy as np
from scipy import linalg

from tscd_bench.data import TimeSeriesMatrix
from tscd_bench.errors import RankDeficientError
from tscd_bench.methods.base import MethodResult, collapse_window, threshold_scores
from tscd_bench.methods.design import build_lag_design
from tscd_bench.numerics import ols_fit
from tscd_bench.schemas.method import MethodConfig


log = logging.getLogger("tscd_bench.methods.var")

RIDGE_PENALTY = 1e-6


def _ridge_fit(
        X: np.ndarray,
        y: np.ndarray) -> np.ndarray:
    gram = X.T @ X + RIDGE_PENALTY * np.eye(X.shape[1])
    return linalg.solve(gram, X.T @ y, assume_a="pos")


def var_granger(
        X: TimeSeriesMatrix,
        cfg: MethodConfig) -> MethodResult:
    """
    Fits every target on the full lag design by OLS.

    Predictors and targets are centred, which is equivalent to fitting an intercept.
    A rank-deficient design falls back to ridge with penalty 1e-6 for that target;
    the fallback targets are listed in diagnostics["ridge_fallback"].

    Parameters
    ----------
    X : TimeSeriesMatrix
        Fully observed series.
    cfg : MethodConfig
        Uses tau_max, threshold and standardize.

    Returns
    -------
    result : MethodResult
        scores[p, q] = max_l |A_l[q, p]|; graph = scores > threshold.
    """

    design = build_lag_design(X, cfg.tau_max, standardize=cfg.standardize)
    design.require_fittable()

    predictors = design.predictors - design.predictors.mean(axis=0)
    targets = design.targets - design.targets.mean(axis=0)

    coefficients = np.empty((predictors.shape[1], design.d))
    fallback = []

    for target in range(design.d):
        try:
            coefficients[:, target], _ = ols_fit(predictors, targets[:, target])
        except RankDeficientError as e:
            log.warning(f"Target {target}: {e}; using ridge fallback ({RIDGE_PENALTY:g})")
            coefficients[:, target] = _ridge_fit(predictors, targets[:, target])
            fallback.append(target)

    window_scores = design.window(coefficients)
    scores = collapse_window(window_scores)

    return MethodResult(
        scores=scores,
        graph=threshold_scores(scores, cfg.threshold),
        window_scores=window_scores,
        diagnostics={"ridge_fallback": fallback, "coefficients": coefficients})
