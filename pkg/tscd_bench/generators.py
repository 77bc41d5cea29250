"""
Vanilla data-generating models: a sparse stationary VAR and the Lorenz-96 system, with
their ground-truth causal graphs.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import networkx as nx
import numpy as np

from tscd_bench.data import CausalGraph, TimeSeriesMatrix
from tscd_bench.errors import DivergenceError, InsufficientLengthError, InvalidInputError, SparsityError
from tscd_bench.numerics import GpSpec, rk4_step, sample_gp_path, spectral_radius
from tscd_bench.schemas.model import Lorenz96Spec, NoiseSpec


log = logging.getLogger("tscd_bench.generators")

DIVERGENCE_LIMIT = 1e9
VAR_BURN_IN = 200
TV_KERNEL_WIDTH = 50.0


@dataclass
class VarSystem:
    """
    Linear VAR(tau_max) system x_t = sum_l A_l x_{t-l} + u_t.

    Attributes:
    - **coeffs** (np.ndarray): (tau_max, d, d) tensor; coeffs[l - 1][q, p] is the effect of
      x_{t-l, p} on x_{t, q}.
    - **noise** (List[NoiseSpec]): Noise law of every variable.
    - **spectral_radius_cap** (float): Cap applied to the companion spectral radius.
    - **n_observed** (int | None): When set, only the first n_observed variables are
      returned by `simulate_var`; the rest are latent.
    """
    coeffs: np.ndarray
    noise: List[NoiseSpec]
    spectral_radius_cap: float = 0.95
    n_observed: Optional[int] = field(default=None)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)

        if self.coeffs.ndim != 3 or self.coeffs.shape[1] != self.coeffs.shape[2]:
            raise InvalidInputError(f"Coefficient tensor must be (tau_max, d, d), got {self.coeffs.shape}")
        if self.coeffs.shape[0] < 1:
            raise InvalidInputError("VAR system needs tau_max >= 1")
        if not np.all(np.isfinite(self.coeffs)):
            raise InvalidInputError("Coefficients must be finite")
        if len(self.noise) != self.d:
            raise InvalidInputError(f"Expected {self.d} noise laws, got {len(self.noise)}")
        if self.n_observed is not None and not 1 <= self.n_observed <= self.d:
            raise InvalidInputError(f"n_observed must lie in [1, {self.d}], got {self.n_observed}")

    @property
    def d(self) -> int:
        return self.coeffs.shape[1]

    @property
    def tau_max(self) -> int:
        return self.coeffs.shape[0]

    @property
    def observed_d(self) -> int:
        return self.d if self.n_observed is None else self.n_observed


def companion_matrix(coeffs: np.ndarray) -> np.ndarray:
    """
    VAR(1) form of a VAR(tau_max): first block row [A_1 ... A_tau], identity below.
    """
    tau_max, d, _ = coeffs.shape
    companion = np.zeros((d * tau_max, d * tau_max))
    companion[:d, :] = np.concatenate(list(coeffs), axis=1)
    companion[d:, :-d] = np.eye(d * (tau_max - 1))
    return companion


def cap_spectral_radius(
        coeffs: np.ndarray,
        cap: float) -> np.ndarray:
    """
    Rescales A_l by c^l, c = cap / rho, which multiplies every companion eigenvalue by c.
    Systems already inside the cap are returned unchanged.
    """
    radius = spectral_radius(companion_matrix(coeffs))
    if radius <= cap:
        return coeffs

    factor = cap / radius
    lags = np.arange(1, coeffs.shape[0] + 1)
    log.debug(f"Rescaling coefficients from spectral radius {radius:.4f} to {cap}")
    return coeffs * (factor ** lags)[:, None, None]


def sample_var_system(
        d: int,
        tau_max: int,
        parents_per_var: int,
        coeff_range: Tuple[float, float],
        noise: NoiseSpec,
        rng: np.random.Generator,
        spectral_radius_cap: float = 0.95) -> VarSystem:
    """
    Samples a sparse stationary VAR system.

    Every variable gets itself plus parents_per_var - 1 distinct other parents. Each
    (parent, child) pair is active at one uniformly drawn lag with a coefficient of random
    sign and magnitude uniform in coeff_range.

    Parameters
    ----------
    d : int
        Number of variables, at least 2.
    tau_max : int
        Maximum lag.
    parents_per_var : int
        Parents per variable, self included; at most d.
    coeff_range : Tuple[float, float]
        Magnitude range (lo, hi) with 0 < lo < hi.
    noise : NoiseSpec
        Noise law shared by all variables.
    rng : np.random.Generator
        Random source.
    spectral_radius_cap : float
        Companion spectral radius after rescaling is min(original, cap).

    Returns
    -------
    system : VarSystem
    """

    if d < 2:
        raise SparsityError(f"VAR system needs at least 2 variables, got {d}")
    if not 1 <= parents_per_var <= d:
        raise SparsityError(f"Cannot give {parents_per_var} parents to each of {d} variables")
    if tau_max < 1:
        raise InvalidInputError(f"tau_max must be at least 1, got {tau_max}")

    lo, hi = coeff_range
    if not 0 < lo < hi:
        raise InvalidInputError(f"Coefficient range must satisfy 0 < lo < hi, got {coeff_range}")

    coeffs = np.zeros((tau_max, d, d))

    for target in range(d):
        others = np.delete(np.arange(d), target)
        chosen = rng.choice(others, size=parents_per_var - 1, replace=False)
        for source in [target, *chosen.tolist()]:
            lag = rng.integers(1, tau_max + 1)
            magnitude = rng.uniform(lo, hi)
            sign = rng.choice((-1.0, 1.0))
            coeffs[lag - 1, target, source] = sign * magnitude

    coeffs = cap_spectral_radius(coeffs, spectral_radius_cap)

    return VarSystem(
        coeffs=coeffs,
        noise=[noise] * d,
        spectral_radius_cap=spectral_radius_cap)


def var_ground_truth(system: VarSystem) -> CausalGraph:
    """
    Window graph window[l][p][q] = (A_l[q][p] != 0) over the observed variables, with an
    empty contemporaneous layer, and its lag-OR summary.
    """
    n = system.observed_d
    window = np.zeros((system.tau_max + 1, n, n), dtype=bool)
    window[1:] = np.transpose(system.coeffs[:, :n, :n] != 0, (0, 2, 1))
    return CausalGraph(summary=window.any(axis=0), window=window)


def _check_scale_path(
        scale_path: Optional[np.ndarray],
        d: int,
        T: int) -> Optional[np.ndarray]:
    if scale_path is None:
        return None
    scale_path = np.asarray(scale_path, dtype=float)
    if scale_path.shape != (d, T):
        raise InvalidInputError(f"Scale path must have shape {(d, T)}, got {scale_path.shape}")
    if not np.all(np.isfinite(scale_path)) or np.any(scale_path < 0):
        raise InvalidInputError("Scale path must be finite and non-negative")
    return scale_path


def _guard(
        state: np.ndarray,
        step: int) -> None:
    if not np.all(np.abs(state) <= DIVERGENCE_LIMIT):
        raise DivergenceError(f"State left the stability bound {DIVERGENCE_LIMIT:g} at step {step}")


def simulate_var(
        system: VarSystem,
        T: int,
        rng: np.random.Generator,
        scale_path: Optional[np.ndarray] = None,
        coeff_path: Optional[np.ndarray] = None,
        burn_in: int = VAR_BURN_IN,
        initial: Optional[np.ndarray] = None) -> TimeSeriesMatrix:
    """
    Simulates a VAR system.

    The first tau_max states are noise draws (or `initial`), then burn_in steps are run
    and discarded before T retained steps. Noise is multiplied by the scale path column of
    the retained step; burn-in steps use column 0. The coefficient path works the same way.

    Parameters
    ----------
    system : VarSystem
        System to simulate.
    T : int
        Retained length, at least tau_max + 1.
    rng : np.random.Generator
        Random source.
    scale_path : np.ndarray | None
        observed_d x T non-negative noise multipliers; latent variables are never scaled.
    coeff_path : np.ndarray | None
        (T, tau_max, d, d) coefficient tensors replacing system.coeffs step by step.
    burn_in : int
        Discarded steps.
    initial : np.ndarray | None
        (tau_max, d) starting states, oldest first.

    Returns
    -------
    data : TimeSeriesMatrix
        T x observed_d observations.
    """

    d, tau_max = system.d, system.tau_max

    if T < tau_max + 1:
        raise InsufficientLengthError(f"Need T >= tau_max + 1 = {tau_max + 1}, got {T}")
    if burn_in < 0:
        raise InvalidInputError(f"Burn-in must be non-negative, got {burn_in}")

    scale_path = _check_scale_path(scale_path, system.observed_d, T)
    if scale_path is not None and system.observed_d < d:
        scale_path = np.vstack([scale_path, np.ones((d - system.observed_d, T))])

    if coeff_path is not None:
        coeff_path = np.asarray(coeff_path, dtype=float)
        if coeff_path.shape != (T,) + system.coeffs.shape:
            raise InvalidInputError(
                f"Coefficient path must have shape {(T,) + system.coeffs.shape}, got {coeff_path.shape}")
        # (T, d, tau_max * d) with columns ordered lag-major
        flat_path = coeff_path.transpose(0, 2, 1, 3).reshape(T, d, tau_max * d)
    flat = system.coeffs.transpose(1, 0, 2).reshape(d, tau_max * d)

    total = burn_in + T
    noise = np.column_stack([spec.sample(rng, tau_max + total) for spec in system.noise])

    x = np.empty((tau_max + total, d))
    if initial is not None:
        initial = np.asarray(initial, dtype=float)
        if initial.shape != (tau_max, d):
            raise InvalidInputError(f"Initial states must have shape {(tau_max, d)}, got {initial.shape}")
        x[:tau_max] = initial
    else:
        x[:tau_max] = noise[:tau_max]

    for step in range(total):
        t = tau_max + step
        k = max(step - burn_in, 0)

        A = flat if coeff_path is None else flat_path[k]
        u = noise[t] if scale_path is None else noise[t] * scale_path[:, k]

        # rows t-1, t-2, ..., t-tau_max
        lagged = x[t - tau_max:t][::-1].ravel()
        x[t] = A @ lagged + u
        _guard(x[t], step)

    return TimeSeriesMatrix(values=x[tau_max + burn_in:, :system.observed_d].copy())


def make_coefficient_path(
        system: VarSystem,
        T: int,
        sigma_tv: float,
        rng: np.random.Generator,
        kernel_width: float = TV_KERNEL_WIDTH) -> np.ndarray:
    """
    Time-varying coefficients: every nonzero entry a becomes a * (1 + sigma_tv * g_t) with
    an independent GP path g (m = 0, v = 1). Zero entries stay zero.

    Returns
    -------
    coeff_path : np.ndarray
        (T, tau_max, d, d) tensor.
    """

    if sigma_tv < 0:
        raise InvalidInputError(f"sigma_tv must be non-negative, got {sigma_tv}")

    spec = GpSpec(mean_log_scale=0.0, amplitude=1.0, kernel_width=kernel_width, length=T)
    coeff_path = np.repeat(system.coeffs[None], T, axis=0)

    if sigma_tv == 0:
        return coeff_path

    for lag, target, source in zip(*np.nonzero(system.coeffs)):
        modulation = 1.0 + sigma_tv * sample_gp_path(spec, rng)
        coeff_path[:, lag, target, source] *= modulation

    return coeff_path


def lorenz96_field(
        forcing: float,
        mixing: Optional[np.ndarray] = None) -> Callable[[np.ndarray], np.ndarray]:
    """
    Lorenz-96 vector field dx_i/dt = (x_{i+1} - x_{i-2}) x_{i-1} - x_i + F with wraparound.

    With a d x d `mixing` matrix the state is [x; L] of length 2d: L follows its own
    Lorenz-96 dynamics and enters the derivative of x through mixing @ L.
    """

    def derivative(x: np.ndarray) -> np.ndarray:
        return (np.roll(x, -1) - np.roll(x, 2)) * np.roll(x, 1) - x + forcing

    if mixing is None:
        return derivative

    d = mixing.shape[0]

    def coupled(state: np.ndarray) -> np.ndarray:
        observed, latent = state[:d], state[d:]
        return np.concatenate([derivative(observed) + mixing @ latent, derivative(latent)])

    return coupled


def integrate(
        f: Callable[[np.ndarray], np.ndarray],
        x0: np.ndarray,
        dt: float,
        n_steps: int) -> np.ndarray:
    """
    Advances x0 by n_steps RK4 steps of size dt with the divergence guard.
    """
    state = np.asarray(x0, dtype=float)
    for step in range(n_steps):
        state = rk4_step(f, state, dt)
        _guard(state, step)
    return state


def simulate_lorenz96(
        spec: Lorenz96Spec,
        T: int,
        rng: np.random.Generator,
        scale_path: Optional[np.ndarray] = None,
        initial: Optional[np.ndarray] = None,
        mixing: Optional[np.ndarray] = None,
        latent_initial: Optional[np.ndarray] = None) -> TimeSeriesMatrix:
    """
    Simulates Lorenz-96 with observation noise.

    The state starts at F with entry 0 offset by 0.01 (or at `initial`), is integrated with
    RK4 at dt_sample / substeps, and burn_in samples are discarded. Noise (times the scale
    path when given) is added to the recorded values only.

    Parameters
    ----------
    spec : Lorenz96Spec
        System and sampling setup.
    T : int
        Retained samples.
    rng : np.random.Generator
        Random source for the observation noise.
    scale_path : np.ndarray | None
        d x T non-negative noise multipliers.
    initial : np.ndarray | None
        Starting state of the observed variables.
    mixing : np.ndarray | None
        d x d latent-to-observed coupling; enables the latent Lorenz-96 block.
    latent_initial : np.ndarray | None
        Starting state of the latent block; defaults to F with entry 0 offset by 0.01.

    Returns
    -------
    data : TimeSeriesMatrix
        T x d observations.
    """

    d = spec.d

    if T < 1:
        raise InsufficientLengthError(f"Need at least one retained sample, got T={T}")

    scale_path = _check_scale_path(scale_path, d, T)

    if initial is None:
        state = np.full(d, float(spec.forcing))
        state[0] += 0.01
    else:
        state = np.asarray(initial, dtype=float).copy()
        if state.shape != (d,):
            raise InvalidInputError(f"Initial state must have shape {(d,)}, got {state.shape}")

    if mixing is not None:
        mixing = np.asarray(mixing, dtype=float)
        if mixing.shape != (d, d):
            raise InvalidInputError(f"Mixing matrix must have shape {(d, d)}, got {mixing.shape}")
        if latent_initial is None:
            latent_initial = np.full(d, float(spec.forcing))
            latent_initial[0] += 0.01
        state = np.concatenate([state, np.asarray(latent_initial, dtype=float)])

    f = lorenz96_field(spec.forcing, mixing)
    total = spec.burn_in + T
    recorded = np.empty((T, d))

    for sample in range(total):
        if sample >= spec.burn_in:
            recorded[sample - spec.burn_in] = state[:d]
        if sample < total - 1:
            state = integrate(f, state, spec.step, spec.substeps)

    noise = spec.noise.sample(rng, (T, d))
    if scale_path is not None:
        noise = noise * scale_path.T

    return TimeSeriesMatrix(values=recorded + noise)


def lorenz96_ground_truth(d: int) -> CausalGraph:
    """
    Summary graph of Lorenz-96: i receives edges from i-2, i-1, i+1 (mod d) and itself.
    The window layer is not populated.
    """

    if d < 4:
        raise InvalidInputError(f"Lorenz-96 needs at least 4 variables, got {d}")

    graph = nx.DiGraph()
    graph.add_nodes_from(range(d))
    for target in range(d):
        for source in ((target - 2) % d, (target - 1) % d, (target + 1) % d, target):
            graph.add_edge(source, target)

    summary = nx.to_numpy_array(graph, nodelist=list(range(d))) > 0
    return CausalGraph(summary=summary)
