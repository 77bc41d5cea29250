"""
Lagged regression design shared by the regression-based methods.
"""
from dataclasses import dataclass

import numpy as np

from tscd_bench.data import TimeSeriesMatrix
from tscd_bench.errors import InsufficientLengthError, InvalidInputError


@dataclass
class LagDesign:
    """
    Row r holds the predictors x_{t-l, j} of time t = r + tau_max, columns ordered
    (lag 1 var 0, lag 1 var 1, ..., lag tau_max var d-1), and the targets x_t.

    Attributes:
    - **predictors** (np.ndarray): (T - tau_max) x (d * tau_max).
    - **targets** (np.ndarray): (T - tau_max) x d.
    - **tau_max** (int): Maximum lag.
    - **d** (int): Number of variables.
    - **standardized** (bool): Whether columns were z-scored.
    """
    predictors: np.ndarray
    targets: np.ndarray
    tau_max: int
    d: int
    standardized: bool = False

    @property
    def rows(self) -> int:
        return self.predictors.shape[0]

    def column_index(
            self,
            lag: int,
            var: int) -> int:
        if not 1 <= lag <= self.tau_max or not 0 <= var < self.d:
            raise InvalidInputError(f"No design column for lag {lag}, variable {var}")
        return (lag - 1) * self.d + var

    def require_fittable(self) -> None:
        """
        A full-lag regression needs more rows than predictors, i.e. T > tau_max + d * tau_max.
        """
        if self.rows <= self.predictors.shape[1]:
            raise InsufficientLengthError(
                f"Lag design has {self.rows} rows for {self.predictors.shape[1]} predictors; "
                f"need T > tau_max + d * tau_max = {self.tau_max + self.d * self.tau_max}")

    def window(self, coefficients: np.ndarray) -> np.ndarray:
        """
        Reshapes a (d * tau_max) x d coefficient matrix (one column per target) into
        absolute window scores of shape (tau_max, d, d) indexed [lag - 1, source, target].
        """
        return np.abs(coefficients).reshape(self.tau_max, self.d, self.d)


def _zscore_columns(values: np.ndarray) -> np.ndarray:
    centred = values - values.mean(axis=0)
    std = values.std(axis=0)
    # constant columns carry no signal; keep them at zero
    std[std == 0] = 1.0
    return centred / std


def build_lag_design(
        X: TimeSeriesMatrix,
        tau_max: int,
        standardize: bool = False) -> LagDesign:
    """
    Builds the lagged design of a fully observed series.

    Parameters
    ----------
    X : TimeSeriesMatrix
        T x d observations without missing entries.
    tau_max : int
        Maximum lag, at least 1.
    standardize : bool
        z-score predictor and target columns (population std); constant columns become zero.

    Returns
    -------
    design : LagDesign
    """

    values = X.require_complete("Lag design")
    T, d = values.shape

    if tau_max < 1:
        raise InvalidInputError(f"tau_max must be at least 1, got {tau_max}")
    if T <= tau_max:
        raise InsufficientLengthError(f"Series of length {T} has no rows at tau_max={tau_max}")

    predictors = np.hstack([values[tau_max - lag:T - lag] for lag in range(1, tau_max + 1)])
    targets = values[tau_max:].copy()

    if standardize:
        predictors = _zscore_columns(predictors)
        targets = _zscore_columns(targets)

    return LagDesign(
        predictors=predictors,
        targets=targets,
        tau_max=tau_max,
        d=d,
        standardized=standardize)
