"""
Lasso-Granger: per-target L1-penalized regression on the standardized lag design,
solved by cyclic coordinate descent.
"""
import logging
from dataclasses import dataclass

import numpy as np

from tscd_bench.data import TimeSeriesMatrix
from tscd_bench.errors import InvalidInputError, LassoConvergenceError
from tscd_bench.methods.base import MethodResult, collapse_window, threshold_scores
from tscd_bench.methods.design import build_lag_design
from tscd_bench.numerics import soft_threshold
from tscd_bench.schemas.method import MethodConfig


log = logging.getLogger("tscd_bench.methods.lasso")

LASSO_TOLERANCE = 1e-6
LASSO_MAX_SWEEPS = 10000


@dataclass
class LassoFit:
    """
    Attributes:
    - **beta** (np.ndarray): Coefficients.
    - **sweeps** (int): Completed sweeps.
    - **objective_history** (np.ndarray): Objective before the first sweep and after each sweep.
    - **converged** (bool): False when the sweep budget ran out first.
    - **max_change** (float): Largest coefficient change of the last sweep.
    """
    beta: np.ndarray
    sweeps: int
    objective_history: np.ndarray
    converged: bool = True
    max_change: float = 0.0


def lasso_objective(
        X: np.ndarray,
        y: np.ndarray,
        beta: np.ndarray,
        lam: float) -> float:
    """
    (1 / 2n) ||y - X beta||^2 + lam ||beta||_1
    """
    residual = y - X @ beta
    return float(residual @ residual / (2.0 * X.shape[0]) + lam * np.abs(beta).sum())


def lasso_coordinate_descent(
        X: np.ndarray,
        y: np.ndarray,
        lam: float,
        tol: float = LASSO_TOLERANCE,
        max_sweeps: int = LASSO_MAX_SWEEPS,
        strict: bool = True) -> LassoFit:
    """
    Minimizes (1 / 2n) ||y - X beta||^2 + lam ||beta||_1 by cyclic coordinate descent.

    Each coordinate update is beta_j = S(X_j'(y - X_{-j} beta_{-j}) / n, lam) / (X_j'X_j / n),
    computed from the Gram matrix. Zero columns keep a zero coefficient. Iteration stops
    when no coefficient moves by tol or more within a sweep, or after max_sweeps sweeps.

    Parameters
    ----------
    X : np.ndarray
        n x p design.
    y : np.ndarray
        Target of length n.
    lam : float
        Non-negative penalty.
    tol : float
        Convergence threshold on the largest coefficient change of a sweep.
    max_sweeps : int
        Sweep budget.
    strict : bool
        Raise LassoConvergenceError when the budget runs out; otherwise return the last
        iterate with converged=False.

    Returns
    -------
    fit : LassoFit
    """

    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)

    if lam < 0:
        raise InvalidInputError(f"Penalty must be non-negative, got {lam}")
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise InvalidInputError(f"Incompatible shapes for lasso: X {X.shape}, y {y.shape}")

    n, p = X.shape
    gram = X.T @ X / n
    correlation = X.T @ y / n
    curvature = np.diag(gram)

    beta = np.zeros(p)
    history = [lasso_objective(X, y, beta, lam)]
    max_change = np.inf

    for sweep in range(1, max_sweeps + 1):
        max_change = 0.0

        for j in range(p):
            if curvature[j] == 0.0:
                continue
            old = beta[j]
            partial = correlation[j] - gram[j] @ beta + curvature[j] * old
            new = soft_threshold(partial, lam) / curvature[j]
            if new != old:
                beta[j] = new
                max_change = max(max_change, abs(new - old))

        history.append(lasso_objective(X, y, beta, lam))

        if max_change < tol:
            return LassoFit(beta=beta, sweeps=sweep, objective_history=np.array(history), max_change=max_change)

    if strict:
        raise LassoConvergenceError(max_sweeps, max_change)
    return LassoFit(
        beta=beta,
        sweeps=max_sweeps,
        objective_history=np.array(history),
        converged=False,
        max_change=max_change)


def lasso_kkt_residual(
        X: np.ndarray,
        y: np.ndarray,
        beta: np.ndarray,
        lam: float) -> float:
    """
    Largest violation of the lasso subgradient conditions: g_j = lam sign(beta_j) on the
    support and |g_j| <= lam elsewhere, with g = X'(y - X beta) / n.
    """
    gradient = X.T @ (y - X @ beta) / X.shape[0]
    active = beta != 0
    violation = np.where(
        active,
        np.abs(gradient - lam * np.sign(beta)),
        np.maximum(np.abs(gradient) - lam, 0.0))
    return float(violation.max(initial=0.0))


def lasso_granger(
        X: TimeSeriesMatrix,
        cfg: MethodConfig) -> MethodResult:
    """
    Lasso regression of every target on its lag design; scores are the largest absolute
    coefficients over lags on the standardized scale.
    """

    design = build_lag_design(X, cfg.tau_max, standardize=cfg.standardize)
    design.require_fittable()

    predictors = design.predictors - design.predictors.mean(axis=0)
    targets = design.targets - design.targets.mean(axis=0)

    coefficients = np.empty((predictors.shape[1], design.d))
    fits = []

    for target in range(design.d):
        fit = lasso_coordinate_descent(
            predictors, targets[:, target], cfg.lam, max_sweeps=LASSO_MAX_SWEEPS, strict=False)
        coefficients[:, target] = fit.beta
        fits.append(fit)

    sweeps = [fit.sweeps for fit in fits]
    unconverged = [target for target, fit in enumerate(fits) if not fit.converged]
    if unconverged:
        worst = max(fits[target].max_change for target in unconverged)
        log.warning(
            f"Lasso fits for targets {unconverged} stopped at {LASSO_MAX_SWEEPS} sweeps "
            f"(lambda={cfg.lam:g}, largest last change {worst:.3e})")
    else:
        log.debug(f"Lasso fits converged in {min(sweeps)}-{max(sweeps)} sweeps (lambda={cfg.lam:g})")

    window_scores = design.window(coefficients)
    scores = collapse_window(window_scores)

    return MethodResult(
        scores=scores,
        graph=threshold_scores(scores, cfg.threshold),
        window_scores=window_scores,
        diagnostics={
            "sweeps": sweeps,
            "converged": [fit.converged for fit in fits],
            "max_change": [fit.max_change for fit in fits],
            "coefficients": coefficients})
