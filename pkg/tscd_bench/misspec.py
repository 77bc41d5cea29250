"""
Assumption-violation scenarios.

Each transform maps a vanilla dataset (or generation setup) to a misspecified one; the
evaluation ground truth is always the vanilla graph of the same seed.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from tscd_bench.data import CausalGraph, TimeSeriesMatrix
from tscd_bench.errors import DegenerateColumnError, InvalidInputError, ScenarioError
from tscd_bench.generators import (
    VarSystem,
    lorenz96_ground_truth,
    make_coefficient_path,
    sample_var_system,
    simulate_lorenz96,
    simulate_var,
    var_ground_truth)
from tscd_bench.numerics import GpSpec, sample_gp_scales
from tscd_bench.schemas.model import BaseModelSpec, Lorenz96Spec, NoiseSpec
from tscd_bench.schemas.scenario import ScenarioSpec


log = logging.getLogger("tscd_bench.misspec")

# (m, nu) per level; nonlinear entries are keyed by forcing
NONSTATIONARY_PRESETS = {
    "moderate": {
        "linear": (1.0, 1.0),
        "nonlinear": {10.0: (2.5, 2.0), 40.0: (3.5, 2.0)}},
    "strong": {
        "linear": (1.8, 1.5),
        "nonlinear": {10.0: (4.2, 0.3), 40.0: (5.2, 0.3)}}}

# latent VAR block of the linear confounder setup
LATENT_PARENTS = 3
LATENT_COEFF_RANGE = (0.1, 0.5)
LATENT_INITIAL_SPREAD = 0.01


def _complete_values(
        X: TimeSeriesMatrix,
        operation: str) -> np.ndarray:
    return X.require_complete(operation).copy()


def add_measurement_error(
        X: TimeSeriesMatrix,
        alpha: float,
        rng: np.random.Generator) -> TimeSeriesMatrix:
    """
    Adds independent Gaussian noise with variance alpha * Var(X_i) to every column,
    Var being the population variance.
    """

    if alpha < 0:
        raise InvalidInputError(f"alpha must be non-negative, got {alpha}")

    values = _complete_values(X, "Measurement error")
    if alpha == 0:
        return TimeSeriesMatrix(values=values)

    variances = values.var(axis=0)
    flat = np.nonzero(variances == 0)[0]
    if flat.size:
        raise DegenerateColumnError(int(flat[0]))

    noise = rng.standard_normal(values.shape) * np.sqrt(alpha * variances)
    return TimeSeriesMatrix(values=values + noise)


def make_nonstationary_scales(
        d: int,
        T: int,
        m: float,
        nu: float,
        ell: float,
        rng: np.random.Generator) -> np.ndarray:
    """
    d x T matrix whose rows are independent GP scale paths exp(g), g ~ GP(m, nu^2 K),
    each drawn from its own child stream of rng.
    """
    spec = GpSpec(mean_log_scale=m, amplitude=nu, kernel_width=ell, length=T)
    return np.vstack([sample_gp_scales(spec, child) for child in rng.spawn(d)])


def default_nonstationary_params(
        model: str,
        forcing: Optional[float] = None,
        level: str = "moderate") -> Tuple[float, float]:
    """
    Tabulated (m, nu) of a nonstationarity level. Forcings without an entry use the
    nearest tabulated forcing.
    """

    if level not in NONSTATIONARY_PRESETS:
        raise ScenarioError(f"Unknown nonstationarity level {level}")

    preset = NONSTATIONARY_PRESETS[level][model]
    if model == "linear":
        return preset

    if forcing is None:
        raise ScenarioError("Nonlinear nonstationarity defaults need a forcing constant")
    nearest = min(preset, key=lambda tabulated: abs(tabulated - forcing))
    return preset[nearest]


@dataclass
class ConfoundedSetup:
    """
    Generation setup extended with latent common causes.

    Attributes:
    - **system** (VarSystem | None): Augmented linear system (observed block first).
    - **spec** (Lorenz96Spec | None): Nonlinear setup.
    - **mixing** (np.ndarray | None): Latent-to-observed contemporaneous links (nonlinear).
    - **latent_initial** (np.ndarray | None): Starting state of the latent Lorenz-96 block.
    - **assignments** (List[Tuple[int, int, int]]): (p, q, latent) for every confounded pair p < q.
    - **graph** (CausalGraph): Ground truth over the observed variables only.
    """
    graph: CausalGraph
    system: Optional[VarSystem] = None
    spec: Optional[Lorenz96Spec] = None
    mixing: Optional[np.ndarray] = None
    latent_initial: Optional[np.ndarray] = None
    assignments: List[Tuple[int, int, int]] = field(default_factory=list)


def attach_confounders(
        base: VarSystem | Lorenz96Spec,
        zeta: float,
        strength: float,
        rng: np.random.Generator) -> ConfoundedSetup:
    """
    Adds d latent variables and wires each unordered observed pair, with probability zeta,
    to one uniformly chosen latent.

    Linear bases get a latent VAR block and cross-lagged links with lags in [1, tau_max];
    Lorenz-96 bases get a latent Lorenz-96 block and contemporaneous additive links. Link
    magnitudes equal `strength` with random sign.

    Parameters
    ----------
    base : VarSystem | Lorenz96Spec
        Vanilla setup.
    zeta : float
        Pair confounding probability in [0, 1].
    strength : float
        Link magnitude.
    rng : np.random.Generator
        Random source.

    Returns
    -------
    setup : ConfoundedSetup
        With zeta = 0 the base setup is returned unchanged.
    """

    if not 0 <= zeta <= 1:
        raise InvalidInputError(f"zeta must lie in [0, 1], got {zeta}")

    linear = isinstance(base, VarSystem)
    d = base.d
    graph = var_ground_truth(base) if linear else lorenz96_ground_truth(d)

    pairs = [(p, q) for p in range(d) for q in range(p + 1, d)]
    confounded = rng.random(len(pairs)) < zeta
    assignments = [(p, q, int(rng.integers(d))) for (p, q), hit in zip(pairs, confounded) if hit]

    if not assignments:
        return ConfoundedSetup(
            graph=graph,
            system=base if linear else None,
            spec=None if linear else base)

    log.debug(f"Confounding {len(assignments)} of {len(pairs)} observed pairs")

    if linear:
        tau_max = base.tau_max
        latent = sample_var_system(
            d=d,
            tau_max=tau_max,
            parents_per_var=min(LATENT_PARENTS, d),
            coeff_range=LATENT_COEFF_RANGE,
            noise=base.noise[0],
            rng=rng,
            spectral_radius_cap=base.spectral_radius_cap)

        # block upper-triangular: latents never depend on observed variables
        coeffs = np.zeros((tau_max, 2 * d, 2 * d))
        coeffs[:, :d, :d] = base.coeffs
        coeffs[:, d:, d:] = latent.coeffs
        for p, q, j in assignments:
            for member in (p, q):
                lag = rng.integers(1, tau_max + 1)
                sign = rng.choice((-1.0, 1.0))
                coeffs[lag - 1, member, d + j] += sign * strength

        system = VarSystem(
            coeffs=coeffs,
            noise=list(base.noise) + list(latent.noise),
            spectral_radius_cap=base.spectral_radius_cap,
            n_observed=d)

        return ConfoundedSetup(graph=graph, system=system, assignments=assignments)

    mixing = np.zeros((d, d))
    for p, q, j in assignments:
        for member in (p, q):
            mixing[member, j] += rng.choice((-1.0, 1.0)) * strength
    latent_initial = base.forcing + LATENT_INITIAL_SPREAD * rng.standard_normal(d)

    return ConfoundedSetup(
        graph=graph,
        spec=base,
        mixing=mixing,
        latent_initial=latent_initial,
        assignments=assignments)


def zscore(X: TimeSeriesMatrix) -> TimeSeriesMatrix:
    """
    Per-column (x - mean) / population std.
    """

    values = _complete_values(X, "Standardization")
    std = values.std(axis=0)
    flat = np.nonzero(std == 0)[0]
    if flat.size:
        raise DegenerateColumnError(int(flat[0]), "zero variance")

    return TimeSeriesMatrix(values=(values - values.mean(axis=0)) / std)


def minmax(X: TimeSeriesMatrix) -> TimeSeriesMatrix:
    """
    Per-column (x - min) / (max - min); every column spans exactly [0, 1].
    """

    values = _complete_values(X, "Min-max normalization")
    low = values.min(axis=0)
    spread = values.max(axis=0) - low
    flat = np.nonzero(spread == 0)[0]
    if flat.size:
        raise DegenerateColumnError(int(flat[0]), "zero range")

    return TimeSeriesMatrix(values=(values - low) / spread)


def discretize_mixed(
        X: TimeSeriesMatrix,
        beta: float,
        rng: np.random.Generator) -> TimeSeriesMatrix:
    """
    Min-max normalizes X, then binarizes floor(d * beta) random columns (1 where > 0.5).
    """

    if not 0 <= beta <= 1:
        raise InvalidInputError(f"beta must lie in [0, 1], got {beta}")

    values = minmax(X).values
    d = values.shape[1]

    # tolerance keeps products such as 0.57 * 100 on the intended integer
    n_discrete = min(d, math.floor(d * beta + 1e-9))
    columns = rng.choice(d, size=n_discrete, replace=False)
    values[:, columns] = (values[:, columns] > 0.5).astype(float)

    return TimeSeriesMatrix(values=values)


def apply_mcar(
        X: TimeSeriesMatrix,
        gamma: float,
        rng: np.random.Generator) -> TimeSeriesMatrix:
    """
    Marks every cell missing independently with probability gamma.
    """

    if not 0 <= gamma < 1:
        raise InvalidInputError(f"gamma must lie in [0, 1), got {gamma}")

    values = _complete_values(X, "MCAR masking")
    mask = rng.random(values.shape) < gamma
    values[mask] = np.nan

    return TimeSeriesMatrix(values=values, missing_mask=mask)


def zero_order_hold(X: TimeSeriesMatrix) -> TimeSeriesMatrix:
    """
    Carries the last observed value forward; leading gaps take the first observed value.
    """

    frame = X.to_frame()

    empty = frame.columns[frame.isna().all()]
    if len(empty):
        raise InvalidInputError(f"Column {empty[0]} has no observed entry to hold")

    return TimeSeriesMatrix(values=frame.ffill().bfill().to_numpy(dtype=float))


def add_trend_season(
        X: TimeSeriesMatrix,
        rho: float,
        eta: float,
        period: int) -> TimeSeriesMatrix:
    """
    Adds rho * t * i / 2 + eta * sin(2 pi t / P + phi_i) + eta / 2 * cos(4 pi t / P + phi_i)
    with phi_i = 2 pi i / d and t, i counted from 0.
    """

    if period < 2:
        raise InvalidInputError(f"Period must be at least 2, got {period}")

    T, d = X.T, X.d
    t = np.arange(T, dtype=float)[:, None]
    i = np.arange(d, dtype=float)[None, :]
    phase = 2.0 * np.pi * i / d

    trend = rho * t * i / 2.0
    season = (eta * np.sin(2.0 * np.pi * t / period + phase)
              + eta / 2.0 * np.cos(4.0 * np.pi * t / period + phase))

    return TimeSeriesMatrix(values=X.values + trend + season, missing_mask=X.missing_mask)


def resolve_nonstationary(spec: ScenarioSpec) -> Tuple[float, float]:
    m_default, nu_default = default_nonstationary_params(spec.base.model, spec.base.f, spec.level)
    m = spec.m if spec.m is not None else m_default
    nu = spec.nu if spec.nu is not None else nu_default
    return m, nu


def _noise_spec(
        base: BaseModelSpec,
        kind: str) -> NoiseSpec:
    noise_kind = "exponential" if kind == "exponential_noise" else "gaussian"
    return NoiseSpec(kind=noise_kind, scale=base.noise_scale)


def build_dataset(
        spec: ScenarioSpec,
        rng: Optional[np.random.Generator] = None) -> Tuple[TimeSeriesMatrix, CausalGraph]:
    """
    Generates one trial's data: the vanilla model with the single requested violation.

    The random source is split into three child streams (structure, simulation noise,
    scenario), so that the vanilla structure and noise draws are shared by every kind
    built from the same seed.

    Parameters
    ----------
    spec : ScenarioSpec
        Scenario kind, parameters, vanilla setting and seed.
    rng : np.random.Generator | None
        Random source; defaults to a generator seeded with spec.seed.

    Returns
    -------
    data : TimeSeriesMatrix
        Misspecified observations, always fully observed.
    truth : CausalGraph
        Vanilla ground truth.
    """

    if rng is None:
        rng = np.random.default_rng(spec.seed)
    structure_rng, noise_rng, scenario_rng = rng.spawn(3)

    base = spec.base
    kind = spec.kind
    noise = _noise_spec(base, kind)

    scale_path = None
    if kind == "nonstationary":
        m, nu = resolve_nonstationary(spec)
        scale_path = make_nonstationary_scales(base.d, base.t, m, nu, spec.ell, scenario_rng)

    if base.model == "linear":
        system = sample_var_system(
            d=base.d,
            tau_max=base.tau_max,
            parents_per_var=base.parents_per_var,
            coeff_range=base.coeff_range,
            noise=noise,
            rng=structure_rng,
            spectral_radius_cap=base.spectral_radius_cap)
        truth = var_ground_truth(system)

        if kind == "confounders":
            setup = attach_confounders(system, spec.zeta, spec.strength, scenario_rng)
            data = simulate_var(setup.system, base.t, noise_rng)
        elif kind == "tv_coefficients":
            coeff_path = make_coefficient_path(system, base.t, spec.sigma_tv, scenario_rng)
            data = simulate_var(system, base.t, noise_rng, coeff_path=coeff_path)
        else:
            data = simulate_var(system, base.t, noise_rng, scale_path=scale_path)

    else:
        if kind == "tv_coefficients":
            raise ScenarioError("Time-varying coefficients are only defined for the linear model")

        lorenz = Lorenz96Spec(d=base.d, forcing=base.f, noise=noise)
        truth = lorenz96_ground_truth(base.d)

        if kind == "confounders":
            setup = attach_confounders(lorenz, spec.zeta, spec.strength, scenario_rng)
            data = simulate_lorenz96(
                lorenz, base.t, noise_rng,
                mixing=setup.mixing,
                latent_initial=setup.latent_initial)
        else:
            data = simulate_lorenz96(lorenz, base.t, noise_rng, scale_path=scale_path)

    if kind == "measurement_error":
        data = add_measurement_error(data, spec.alpha, scenario_rng)
    elif kind == "standardized":
        data = zscore(data)
    elif kind == "mixed":
        data = discretize_mixed(data, spec.beta, scenario_rng)
    elif kind == "minmax":
        data = minmax(data)
    elif kind == "missing":
        data = zero_order_hold(apply_mcar(data, spec.gamma, scenario_rng))
    elif kind == "trend_season":
        data = add_trend_season(data, spec.rho, spec.eta, spec.period)

    return data, truth
