import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tscd_bench.data import TimeSeriesMatrix
from tscd_bench.errors import InsufficientLengthError, InvalidInputError, LassoConvergenceError
from tscd_bench.generators import VarSystem, simulate_var
from tscd_bench.methods import (
    MethodResult,
    build_lag_design,
    collapse_window,
    graph_for_config,
    lasso_coordinate_descent,
    lasso_granger,
    lasso_kkt_residual,
    pcmci,
    run_method,
    var_granger)
from tscd_bench.methods.lasso import lasso_objective
from tscd_bench.misspec import build_dataset
from tscd_bench.numerics import ols_fit
from tscd_bench.schemas import MethodConfig, NoiseSpec


def _lagged_pair(seed: int, coefficient: float = 0.8, T: int = 1000) -> TimeSeriesMatrix:
    coeffs = np.zeros((1, 2, 2))
    coeffs[0, 1, 0] = coefficient
    system = VarSystem(coeffs=coeffs, noise=[NoiseSpec(scale=1.0)] * 2)
    return simulate_var(system, T, np.random.default_rng(seed))


def _lasso_problem(seed: int, n: int = 200, p: int = 12):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    X[:, 1] += 0.5 * X[:, 0]
    beta = np.zeros(p)
    beta[:3] = rng.uniform(-1.0, 1.0, 3)
    y = X @ beta + 0.3 * rng.standard_normal(n)
    X = (X - X.mean(axis=0)) / X.std(axis=0)
    return X, y - y.mean()


def test_lag_design_counts():
    X = TimeSeriesMatrix(values=np.arange(10, dtype=float).reshape(5, 2))
    design = build_lag_design(X, 2)
    assert design.predictors.shape == (3, 4)
    assert design.targets.shape == (3, 2)
    assert design.column_index(2, 1) == 3
    with pytest.raises(InsufficientLengthError):
        design.require_fittable()


def test_lag_design_matches_naive_loop(rng):
    values = rng.standard_normal((20, 3))
    design = build_lag_design(TimeSeriesMatrix(values=values), 3)
    for row in range(design.rows):
        t = row + 3
        for lag in range(1, 4):
            for var in range(3):
                assert design.predictors[row, design.column_index(lag, var)] == values[t - lag, var]
        assert np.array_equal(design.targets[row], values[t])


def test_lag_design_rejects_missing_entries():
    values = np.ones((10, 2))
    values[3, 1] = np.nan
    with pytest.raises(InvalidInputError):
        build_lag_design(TimeSeriesMatrix(values=values, missing_mask=np.isnan(values)), 1)


def test_lag_design_standardizes_columns(rng):
    design = build_lag_design(TimeSeriesMatrix(values=rng.standard_normal((50, 2)) * 5.0 + 3.0), 2, standardize=True)
    assert np.allclose(design.predictors.std(axis=0), 1.0)
    assert np.allclose(design.targets.mean(axis=0), 0.0)


def test_var_recovers_noiseless_system():
    A = np.array([[0.9, 0.0], [0.5, 0.9]])
    system = VarSystem(coeffs=A[None], noise=[NoiseSpec()] * 2)
    X = simulate_var(system, 40, np.random.default_rng(0), scale_path=np.zeros((2, 40)),
                     burn_in=0, initial=np.array([[1.0, 0.0]]))
    result = var_granger(X, MethodConfig(method="var", tau_max=1))
    assert np.allclose(result.diagnostics["coefficients"].T, A, atol=1e-6)
    assert np.allclose(result.scores, np.abs(A).T, atol=1e-6)


def test_var_scores_stay_small_under_independence():
    large = 0
    total = 0
    for seed in range(20):
        X = TimeSeriesMatrix(values=np.random.default_rng(seed).standard_normal((1000, 4)))
        scores = var_granger(X, MethodConfig(method="var", tau_max=3)).scores
        off = scores[~np.eye(4, dtype=bool)]
        large += int(np.sum(off > 0.3))
        total += off.size
    assert large <= 0.05 * total


def test_var_threshold_is_post_hoc(white_noise):
    low = var_granger(white_noise, MethodConfig(method="var", tau_max=2, threshold=0.0))
    high = var_granger(white_noise, MethodConfig(method="var", tau_max=2, threshold=1e300))
    assert np.array_equal(low.scores, high.scores)
    assert not high.graph.any()
    assert np.array_equal(graph_for_config(low, MethodConfig(method="var", tau_max=2, threshold=1e300)), high.graph)


def test_var_falls_back_to_ridge_on_duplicate_columns(rng):
    column = rng.standard_normal(200)
    X = TimeSeriesMatrix(values=np.column_stack([column, column, rng.standard_normal(200)]))
    result = var_granger(X, MethodConfig(method="var", tau_max=1))
    assert result.diagnostics["ridge_fallback"] == [0, 1, 2]
    assert np.all(np.isfinite(result.scores))


def test_var_needs_enough_rows():
    X = TimeSeriesMatrix(values=np.random.default_rng(0).standard_normal((8, 3)))
    with pytest.raises(InsufficientLengthError):
        var_granger(X, MethodConfig(method="var", tau_max=2))


def test_lasso_without_penalty_is_ols():
    X, y = _lasso_problem(0)
    fit = lasso_coordinate_descent(X, y, 0.0, tol=1e-10)
    beta, _ = ols_fit(X, y)
    assert np.allclose(fit.beta, beta, atol=1e-6)


def test_lasso_shutdown_threshold():
    X, y = _lasso_problem(1)
    lam = np.max(np.abs(X.T @ y)) / X.shape[0]
    fit = lasso_coordinate_descent(X, y, lam)
    assert np.all(fit.beta == 0.0)
    assert fit.sweeps == 1


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), lam=st.floats(0.0, 0.5))
def test_lasso_solution_satisfies_kkt(seed, lam):
    X, y = _lasso_problem(seed)
    fit = lasso_coordinate_descent(X, y, lam, tol=1e-9)
    assert lasso_kkt_residual(X, y, fit.beta, lam) <= 1e-5
    assert np.all(np.diff(fit.objective_history) <= 1e-12 * (1.0 + fit.objective_history[0]))


def test_lasso_objective_history_starts_at_zero_model():
    X, y = _lasso_problem(2)
    fit = lasso_coordinate_descent(X, y, 0.05)
    assert fit.objective_history[0] == pytest.approx(lasso_objective(X, y, np.zeros(X.shape[1]), 0.05))
    assert fit.objective_history[-1] == pytest.approx(lasso_objective(X, y, fit.beta, 0.05))


def test_lasso_reports_non_convergence():
    X, y = _lasso_problem(3)
    with pytest.raises(LassoConvergenceError) as error:
        lasso_coordinate_descent(X, y, 0.0, max_sweeps=1)
    assert error.value.sweeps == 1


def test_lasso_skips_zero_columns(rng):
    X = np.column_stack([rng.standard_normal(50), np.zeros(50)])
    fit = lasso_coordinate_descent(X, X[:, 0] * 2.0, 0.01)
    assert fit.beta[1] == 0.0


def test_lasso_granger_matches_var_without_penalty():
    X = _lagged_pair(4)
    var = var_granger(X, MethodConfig(method="var", tau_max=2, standardize=True))
    lgc = lasso_granger(X, MethodConfig(method="lgc", tau_max=2, lam=0.0))
    assert np.allclose(var.scores, lgc.scores, atol=1e-4)


def test_lasso_granger_finds_link():
    result = lasso_granger(_lagged_pair(5), MethodConfig(method="lgc", tau_max=2, lam=0.01, threshold=0.1))
    assert result.graph[0, 1]
    assert not result.graph[1, 0]


def test_lasso_budget_without_strict_returns_last_iterate():
    X, y = _lasso_problem(3)
    fit = lasso_coordinate_descent(X, y, 0.0, max_sweeps=1, strict=False)
    assert not fit.converged
    assert fit.sweeps == 1
    assert fit.max_change > 0.0
    assert len(fit.objective_history) == 2


@pytest.mark.parametrize("lam", [0.001, 0.1])
def test_lasso_granger_scores_trend_and_season(scenario, lam):
    data, _ = build_dataset(scenario("trend_season", seed=2))
    result = lasso_granger(data, MethodConfig(method="lgc", tau_max=5, lam=lam))
    assert np.all(np.isfinite(result.scores))
    assert result.scores.shape == (4, 4)
    assert len(result.diagnostics["converged"]) == 4


def test_lasso_granger_stops_at_sweep_budget(monkeypatch, caplog):
    monkeypatch.setattr("tscd_bench.methods.lasso.LASSO_MAX_SWEEPS", 2)
    result = lasso_granger(_lagged_pair(6), MethodConfig(method="lgc", tau_max=2, lam=0.0))
    assert not any(result.diagnostics["converged"])
    assert result.diagnostics["sweeps"] == [2, 2]
    assert np.all(np.isfinite(result.scores))
    assert "stopped at 2 sweeps" in caplog.text


def test_collapse_window_examples():
    window = np.zeros((3, 2, 2))
    window[1, 0, 1] = 0.4
    assert collapse_window(window)[0, 1] == 0.4
    assert not collapse_window(np.zeros((2, 3, 3))).any()
    window[0, 0, 1] = 0.2
    window[2, 0, 1] = 0.7
    assert collapse_window(window)[0, 1] == 0.7


def test_method_result_rejects_negative_scores():
    with pytest.raises(InvalidInputError):
        MethodResult(scores=np.array([[0.0, -0.1], [0.0, 0.0]]), graph=np.zeros((2, 2), dtype=bool))


def test_pcmci_detects_lagged_link():
    detected = reverse = 0
    for seed in range(5):
        result = pcmci(_lagged_pair(seed), MethodConfig(method="pcmci", tau_max=2, alpha_sig=0.05))
        detected += int(result.graph[0, 1])
        reverse += int(result.graph[1, 0])
    assert detected == 5
    assert reverse <= 2


@pytest.mark.slow
def test_pcmci_detection_rate():
    detected = reverse = 0
    for seed in range(50):
        result = pcmci(_lagged_pair(seed), MethodConfig(method="pcmci", tau_max=2, alpha_sig=0.05))
        detected += int(result.graph[0, 1])
        reverse += int(result.graph[1, 0])
    assert detected >= 48
    assert reverse <= 10


def test_pcmci_is_affine_invariant(rng):
    data = _lagged_pair(7, T=400)
    scales = rng.uniform(0.5, 5.0, 2) * rng.choice([-1.0, 1.0], 2)
    shifted = TimeSeriesMatrix(values=data.values * scales + rng.uniform(-10.0, 10.0, 2))
    cfg = MethodConfig(method="pcmci", tau_max=2, alpha_sig=0.1)
    assert np.allclose(pcmci(data, cfg).scores, pcmci(shifted, cfg).scores, atol=1e-10, rtol=0.0)


def test_pcmci_is_invariant_to_minmax(scenario):
    cfg = MethodConfig(method="pcmci", tau_max=2, alpha_sig=0.05)
    vanilla, _ = build_dataset(scenario("vanilla", seed=3))
    normalized, _ = build_dataset(scenario("minmax", seed=3))
    assert np.allclose(pcmci(vanilla, cfg).scores, pcmci(normalized, cfg).scores, atol=1e-10, rtol=0.0)


def test_pcmci_removed_links_score_zero(white_noise):
    result = pcmci(white_noise, MethodConfig(method="pcmci", tau_max=1, alpha_sig=0.01))
    removed = result.window_pvalues == 1.0
    assert np.all(result.window_scores[removed] == 0.0)
    assert set(result.diagnostics["parents"]) == set(range(4))


def test_pcmci_needs_samples():
    X = TimeSeriesMatrix(values=np.random.default_rng(0).standard_normal((20, 4)))
    with pytest.raises(InsufficientLengthError):
        pcmci(X, MethodConfig(method="pcmci", tau_max=2))


@pytest.mark.slow
@pytest.mark.parametrize("tau_max", [3, 5])
def test_pcmci_false_positive_rate(tau_max):
    off = ~np.eye(5, dtype=bool)
    rejections = []
    for seed in range(50):
        X = TimeSeriesMatrix(values=np.random.default_rng(seed).standard_normal((1000, 5)))
        pvalues = pcmci(X, MethodConfig(method="pcmci", tau_max=tau_max, alpha_sig=0.05)).window_pvalues
        # removed links carry p = 1
        rejections.append(np.mean(pvalues[:, off] <= 0.05))
    assert np.mean(rejections) == pytest.approx(0.05, abs=0.025)


@pytest.mark.parametrize("method", ["var", "lgc", "pcmci"])
def test_scores_are_finite_and_non_negative(method, scenario):
    data, _ = build_dataset(scenario("mixed", seed=1, beta=0.5))
    result = run_method(data, MethodConfig(method=method, tau_max=2))
    assert np.all(np.isfinite(result.scores))
    assert np.all(result.scores >= 0)
    assert result.scores.shape == (4, 4)


def test_graph_for_config_uses_p_values(white_noise):
    result = pcmci(white_noise, MethodConfig(method="pcmci", tau_max=1, alpha_sig=0.1))
    strict = graph_for_config(result, MethodConfig(method="pcmci", tau_max=1, alpha_sig=1e-12))
    assert np.array_equal(strict, (result.window_pvalues <= 1e-12).any(axis=0))
    assert np.array_equal(graph_for_config(result, MethodConfig(method="pcmci", tau_max=1, alpha_sig=0.1)), result.graph)
