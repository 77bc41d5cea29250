"""
Discovery methods. Every method maps (TimeSeriesMatrix, MethodConfig) to a MethodResult.
"""
import logging
from typing import Callable, Dict

from tscd_bench.data import TimeSeriesMatrix
from tscd_bench.methods.base import MethodResult, collapse_window, significant_links, threshold_scores
from tscd_bench.methods.design import LagDesign, build_lag_design
from tscd_bench.methods.lasso import LassoFit, lasso_coordinate_descent, lasso_granger, lasso_kkt_residual
from tscd_bench.methods.pcmci import pcmci
from tscd_bench.methods.var import var_granger
from tscd_bench.schemas.method import MethodConfig


log = logging.getLogger("tscd_bench.methods")

METHODS: Dict[str, Callable[[TimeSeriesMatrix, MethodConfig], MethodResult]] = {
    "var": var_granger,
    "lgc": lasso_granger,
    "pcmci": pcmci}


def run_method(
        X: TimeSeriesMatrix,
        cfg: MethodConfig) -> MethodResult:
    log.debug(f"Running {cfg.config_id()} on {X.T}x{X.d} data")
    return METHODS[cfg.method](X, cfg)


def graph_for_config(
        result: MethodResult,
        cfg: MethodConfig):
    """
    Binary summary graph of a fitted result under a configuration that shares its fit key.
    The score matrix is never changed.
    """
    if cfg.method == "pcmci":
        return significant_links(result.window_pvalues, cfg.alpha_sig)
    return threshold_scores(result.scores, cfg.threshold)


__all__ = [
    "METHODS", "MethodResult", "LagDesign", "LassoFit",
    "run_method", "graph_for_config",
    "build_lag_design", "collapse_window", "threshold_scores", "significant_links",
    "var_granger", "lasso_granger", "pcmci",
    "lasso_coordinate_descent", "lasso_kkt_residual"
]
