"""
Shared numerical kernels: factorizations, least squares, Gaussian-process paths,
ODE stepping and the partial-correlation test.

All functions are pure given their inputs. Random sources are numpy Generators passed in
by the caller.
"""
import logging
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy import linalg
from scipy.stats import norm

from tscd_bench.errors import (
    DeterministicRelationError,
    InsufficientLengthError,
    InvalidInputError,
    NotPositiveDefiniteError,
    NumericalError,
    RankDeficientError)


log = logging.getLogger("tscd_bench.numerics")

SYMMETRY_TOLERANCE = 1e-10
JITTER_START = 1e-10
JITTER_ESCALATIONS = 4
RANK_TOLERANCE = 1e-10
P_VALUE_FLOOR = 1e-300

# kernel is constant to machine precision below this spread of squared distances
CONSTANT_KERNEL_SPREAD = 1e-12


class GpSpec(BaseModel):
    """
    Gaussian process prior over a log-scale path.

    Attributes:
    - **mean_log_scale** (float): Constant prior mean m of the log path.
    - **amplitude** (float): Standard deviation multiplier ν of the kernel.
    - **kernel_width** (float): Squared-exponential width ℓ in time steps.
    - **length** (int): Number of time steps T.
    """
    mean_log_scale: float = 0.0
    amplitude: float = Field(default=1.0, ge=0.0)
    kernel_width: float = Field(default=20.0, gt=0.0)
    length: int = Field(default=1, ge=1)


def cholesky(
        S: np.ndarray,
        jitter: float = 0.0) -> np.ndarray:
    """
    Lower Cholesky factor of a symmetric positive-semidefinite matrix.

    When the plain factorization fails, a diagonal jitter starting at
    1e-10 * trace(S) / n is added on top of `jitter` and multiplied by 10 up to
    four times before giving up.

    Parameters
    ----------
    S : np.ndarray
        Square, symmetric matrix.
    jitter : float
        Non-negative value added to the diagonal before factorizing.

    Returns
    -------
    L : np.ndarray
        Lower-triangular matrix with L @ L.T == S + jitter * I.
    """

    S = np.asarray(S, dtype=float)

    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise InvalidInputError(f"Cholesky needs a square matrix, got shape {S.shape}")
    if jitter < 0:
        raise InvalidInputError(f"Jitter must be non-negative, got {jitter}")
    if not np.all(np.isfinite(S)):
        raise InvalidInputError("Cholesky input contains non-finite entries")

    scale = 1.0 + np.max(np.abs(S), initial=0.0)
    if np.max(np.abs(S - S.T), initial=0.0) > SYMMETRY_TOLERANCE * scale:
        raise InvalidInputError("Cholesky input is not symmetric")

    n = S.shape[0]
    eye = np.eye(n)

    try:
        return linalg.cholesky(S + jitter * eye, lower=True)
    except linalg.LinAlgError:
        pass

    extra = JITTER_START * np.trace(S) / n
    if extra <= 0:
        extra = JITTER_START

    for _ in range(JITTER_ESCALATIONS + 1):
        try:
            L = linalg.cholesky(S + (jitter + extra) * eye, lower=True)
            log.warning(f"Cholesky needed extra diagonal jitter {extra:.1e} (n={n})")
            return L
        except linalg.LinAlgError:
            extra *= 10.0

    raise NotPositiveDefiniteError(
        f"Cholesky failed after jitter escalation up to {extra / 10.0:.1e}; "
        "input is not positive semidefinite")


def ols_fit(
        X: np.ndarray,
        y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Least-squares fit through a column-pivoted QR decomposition.

    Parameters
    ----------
    X : np.ndarray
        Design matrix with n rows and p <= n columns.
    y : np.ndarray
        Target vector of length n.

    Returns
    -------
    coefficients : np.ndarray
        Minimizer of ||y - X b||^2.
    residuals : np.ndarray
        y - X @ coefficients.
    """

    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)

    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise InvalidInputError(f"Incompatible shapes for OLS: X {X.shape}, y {y.shape}")

    n, p = X.shape
    if n < p:
        raise InsufficientLengthError(f"OLS needs at least as many rows as columns ({n} < {p})")
    if p == 0:
        return np.zeros(0), y.copy()

    Q, R, pivots = linalg.qr(X, mode="economic", pivoting=True)
    diagonal = np.abs(np.diag(R))

    dependent = np.nonzero(diagonal <= RANK_TOLERANCE * diagonal[0])[0]
    if diagonal[0] == 0.0 or dependent.size:
        position = 0 if diagonal[0] == 0.0 else dependent[0]
        raise RankDeficientError(int(pivots[position]))

    solution = linalg.solve_triangular(R, Q.T @ y, lower=False)

    coefficients = np.empty(p)
    coefficients[pivots] = solution
    residuals = y - X @ coefficients

    return coefficients, residuals


def rbf_kernel(
        times: np.ndarray,
        kernel_width: float) -> np.ndarray:
    """
    Squared-exponential kernel matrix exp(-(t_i - t_j)^2 / (2 l^2)).
    """
    diff = times[:, None] - times[None, :]
    return np.exp(-diff ** 2 / (2.0 * kernel_width ** 2))


@lru_cache(maxsize=32)
def _gp_factor(
        length: int,
        kernel_width: float) -> np.ndarray:

    # constant kernel: rank one, every step shares a single deviate
    if (length - 1) ** 2 / (2.0 * kernel_width ** 2) < CONSTANT_KERNEL_SPREAD:
        factor = np.ones((length, 1))
    else:
        times = np.arange(length, dtype=float)
        factor = cholesky(rbf_kernel(times, kernel_width))

    factor.setflags(write=False)
    return factor


def sample_gp_path(
        spec: GpSpec,
        rng: np.random.Generator) -> np.ndarray:
    """
    Draws a log path g ~ GP(m, v^2 K) over t = 0..T-1.

    Parameters
    ----------
    spec : GpSpec
        Mean log scale, amplitude, kernel width and length.
    rng : np.random.Generator
        Random source; consumed only when the amplitude is positive.

    Returns
    -------
    path : np.ndarray
        Vector of length spec.length.
    """

    if spec.amplitude == 0.0:
        return np.full(spec.length, float(spec.mean_log_scale))

    factor = _gp_factor(spec.length, float(spec.kernel_width))
    deviates = rng.standard_normal(factor.shape[1])

    return spec.mean_log_scale + spec.amplitude * (factor @ deviates)


def sample_gp_scales(
        spec: GpSpec,
        rng: np.random.Generator) -> np.ndarray:
    """
    Strictly positive scale path w_t = exp(g_t), see `sample_gp_path`.
    """
    return np.exp(sample_gp_path(spec, rng))


def partial_correlation(
        x: np.ndarray,
        y: np.ndarray,
        Z: np.ndarray | None = None) -> Tuple[float, float]:
    """
    Partial correlation of x and y given Z with a two-sided Fisher-z p-value.

    Both variables are regressed on an intercept and the columns of Z; r is the
    Pearson correlation of the two residual vectors. The test uses n - k - 3
    effective samples, k being the number of conditioning columns.

    Parameters
    ----------
    x, y : np.ndarray
        Vectors of length n.
    Z : np.ndarray | None
        Conditioning matrix with n rows and k columns; None or zero columns means
        plain Pearson correlation.

    Returns
    -------
    r : float
        Partial correlation in [-1, 1].
    p_value : float
        Two-sided p-value in [1e-300, 1].
    """

    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]

    if Z is None:
        Z = np.empty((n, 0))
    Z = np.asarray(Z, dtype=float).reshape(n, -1)
    k = Z.shape[1]

    if y.shape[0] != n:
        raise InvalidInputError(f"x and y lengths differ ({n} != {y.shape[0]})")
    if n <= k + 3:
        raise InsufficientLengthError(
            f"Partial correlation needs n > k + 3 samples (n={n}, k={k})")

    design = np.column_stack([np.ones(n), Z])
    targets = np.column_stack([x, y])
    coefficients, *_ = np.linalg.lstsq(design, targets, rcond=None)
    residuals = targets - design @ coefficients

    spread = np.linalg.norm(residuals, axis=0)
    reference = np.linalg.norm(targets, axis=0)
    if np.any(spread <= RANK_TOLERANCE * np.maximum(reference, np.finfo(float).tiny)):
        raise DeterministicRelationError(
            "Residuals have zero variance; the variables are deterministically related "
            "to the conditioning set")

    r = float(residuals[:, 0] @ residuals[:, 1] / (spread[0] * spread[1]))
    r = min(1.0, max(-1.0, r))

    with np.errstate(divide="ignore"):
        statistic = np.arctanh(r) * np.sqrt(n - k - 3)
    p_value = float(2.0 * norm.sf(abs(statistic)))
    p_value = min(1.0, max(P_VALUE_FLOOR, p_value))

    return r, p_value


def rk4_step(
        f: Callable[[np.ndarray], np.ndarray],
        x: np.ndarray,
        dt: float) -> np.ndarray:
    """
    One classical fourth-order Runge-Kutta step of the autonomous field f.
    """

    if dt <= 0:
        raise InvalidInputError(f"Step size must be positive, got {dt}")

    x = np.asarray(x, dtype=float)

    k1 = _checked(f(x))
    k2 = _checked(f(x + 0.5 * dt * k1))
    k3 = _checked(f(x + 0.5 * dt * k2))
    k4 = _checked(f(x + dt * k3))

    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _checked(derivative: np.ndarray) -> np.ndarray:
    derivative = np.asarray(derivative, dtype=float)
    if not np.all(np.isfinite(derivative)):
        raise NumericalError("Vector field returned a non-finite derivative")
    return derivative


def soft_threshold(
        z: float | np.ndarray,
        lam: float) -> float | np.ndarray:
    """
    Soft-thresholding operator sign(z) * max(|z| - lam, 0).
    """
    if lam < 0:
        raise InvalidInputError(f"Threshold must be non-negative, got {lam}")
    return np.sign(z) * np.maximum(np.abs(z) - lam, 0.0)


def spectral_radius(
        M: np.ndarray,
        squarings: int = 40) -> float:
    """
    Spectral radius by power iteration on M^(2^k), using Gelfand's formula
    rho = lim ||M^N||^(1/N).

    The matrix is squared and renormalized `squarings` times; the accumulated log
    norm divided by 2^k is the log of the estimate.
    """

    B = np.asarray(M, dtype=float)
    if B.size == 0:
        return 0.0

    size = np.linalg.norm(B)
    if size == 0.0:
        return 0.0

    B = B / size
    log_norm = np.log(size)
    power = 1.0

    for _ in range(squarings):
        B = B @ B
        size = np.linalg.norm(B)
        if size == 0.0:
            return 0.0
        B = B / size
        log_norm = 2.0 * log_norm + np.log(size)
        power *= 2.0

    return float(np.exp(log_norm / power))
