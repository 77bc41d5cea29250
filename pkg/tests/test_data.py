import json

import numpy as np
import pytest

from tscd_bench.data import CausalGraph, TimeSeriesMatrix, load_scores, save_scores
from tscd_bench.errors import InvalidInputError


def test_time_series_rejects_non_finite_observed_entries():
    with pytest.raises(InvalidInputError):
        TimeSeriesMatrix(values=np.array([[1.0, np.inf]]))


def test_time_series_allows_nan_under_mask():
    values = np.array([[1.0, np.nan], [2.0, 3.0]])
    X = TimeSeriesMatrix(values=values, missing_mask=np.isnan(values))
    assert X.has_missing
    with pytest.raises(InvalidInputError):
        X.require_complete("Test")


def test_time_series_mask_shape_must_match():
    with pytest.raises(InvalidInputError):
        TimeSeriesMatrix(values=np.zeros((3, 2)), missing_mask=np.zeros((2, 3), dtype=bool))


def test_time_series_csv_layout(tmp_path, rng):
    values = rng.standard_normal((6, 3))
    mask = np.zeros_like(values, dtype=bool)
    mask[2, 1] = True
    values[mask] = np.nan
    X = TimeSeriesMatrix(values=values, missing_mask=mask)

    path = tmp_path / "data.csv"
    X.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "var_0,var_1,var_2"
    assert lines[3].split(",")[1] == ""

    loaded = TimeSeriesMatrix.from_csv(path)
    assert np.array_equal(loaded.missing_mask, mask)
    assert np.array_equal(loaded.values[~mask], values[~mask])


def test_graph_summary_must_match_window():
    window = np.zeros((2, 2, 2), dtype=bool)
    window[1, 0, 1] = True
    with pytest.raises(InvalidInputError):
        CausalGraph(summary=np.zeros((2, 2), dtype=bool), window=window)


def test_graph_rejects_contemporaneous_self_edge():
    window = np.zeros((2, 2, 2), dtype=bool)
    window[0, 1, 1] = True
    with pytest.raises(InvalidInputError):
        CausalGraph(summary=window.any(axis=0), window=window)


def test_graph_json_document(tmp_path):
    window = np.zeros((3, 2, 2), dtype=bool)
    window[2, 0, 1] = True
    window[1, 1, 1] = True
    graph = CausalGraph(summary=window.any(axis=0), window=window)

    path = tmp_path / "graph.json"
    graph.to_json(path)
    document = json.loads(path.read_text())
    assert document["d"] == 2
    assert document["tau_max"] == 2
    assert document["summary"] == [[0, 1], [0, 1]]
    assert CausalGraph.from_json(path) == graph


def test_graph_without_window_has_null_tau_max():
    graph = CausalGraph(summary=np.array([[True, True], [False, False]]))
    assert graph.to_dict()["window"] is None
    assert graph.tau_max is None
    assert CausalGraph.from_dict(graph.to_dict()) == graph


def test_graph_document_with_wrong_d():
    with pytest.raises(InvalidInputError):
        CausalGraph.from_dict({"d": 3, "tau_max": None, "summary": [[0, 1], [0, 0]], "window": None})


def test_graph_to_networkx():
    graph = CausalGraph(summary=np.array([[False, True, False], [False, False, True], [False, False, False]]))
    nx_graph = graph.to_networkx()
    assert sorted(nx_graph.edges) == [(0, 1), (1, 2)]
    assert nx_graph.number_of_nodes() == 3


def test_scores_round_trip_exactly(tmp_path, rng):
    scores = np.abs(rng.standard_normal((4, 4)))
    path = tmp_path / "scores.csv"
    save_scores(scores, path)
    assert np.array_equal(load_scores(path), scores)
    assert "," in path.read_text().splitlines()[0]


def test_load_scores_rejects_negative_entries(tmp_path):
    path = tmp_path / "scores.csv"
    save_scores(np.array([[0.0, -1.0], [0.5, 0.0]]), path)
    with pytest.raises(InvalidInputError):
        load_scores(path)
