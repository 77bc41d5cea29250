import numpy as np
import pytest

from tscd_bench.data import CausalGraph, TimeSeriesMatrix
from tscd_bench.schemas import BaseModelSpec, ScenarioSpec


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def white_noise(rng):
    return TimeSeriesMatrix(values=rng.standard_normal((400, 4)))


@pytest.fixture
def small_linear():
    return BaseModelSpec(model="linear", d=4, t=300, tau_max=2)


@pytest.fixture
def small_nonlinear():
    return BaseModelSpec(model="nonlinear", d=5, t=200, f=10.0)


@pytest.fixture
def scenario(small_linear):
    def make(kind="vanilla", base=None, seed=0, **params):
        return ScenarioSpec(kind=kind, base=base or small_linear, seed=seed, **params)
    return make


def graph_from_labels(labels: np.ndarray, d: int) -> CausalGraph:
    """
    Summary graph whose off-diagonal entries, in row-major order, are `labels`.
    """
    summary = np.zeros((d, d), dtype=bool)
    summary[~np.eye(d, dtype=bool)] = labels
    return CausalGraph(summary=summary)


def scores_from_values(values: np.ndarray, d: int) -> np.ndarray:
    scores = np.zeros((d, d))
    scores[~np.eye(d, dtype=bool)] = values
    return scores


def experiment_document(**overrides) -> dict:
    document = {
        "name": "test",
        "master_seed": 7,
        "settings": [{"model": "linear", "d": 3, "t": 150, "tau_max": 2, "parents_per_var": 2}],
        "scenarios": [{"kind": "vanilla"}, {"kind": "measurement_error", "alpha": 1.2}],
        "seeds": [0, 1, 2, 3, 4],
        "methods": [{"method": "var", "tau_max": 2, "threshold": [0.0, 0.1, 0.3]}],
        "modes": ["best_per_dataset", "best_avg_scenarios", "all_hyper_aggregate"]}
    document.update(overrides)
    return document
