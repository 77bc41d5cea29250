import json

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
import pytest

from tscd_bench import __version__
from tscd_bench.data import CausalGraph, TimeSeriesMatrix
from tscd_bench.errors import ConfigError, CoverageError
from tscd_bench.main import main
from tscd_bench.misspec import build_dataset
from tscd_bench.radar import axis_labels, radar_table, render_radar
from tscd_bench.report import aggregate_file, filter_setting, load_aggregate, load_results
from tscd_bench.runner import (
    DATASET_DIR,
    MANIFEST_FILE,
    SCORE_DIR,
    TRIAL_FILE,
    generate_datasets,
    plan_trials,
    rescore_run,
    run_experiment,
    run_trial,
    score_pair,
    trial_seed)
from tscd_bench.schemas import BaseModelSpec
from tscd_bench.schemas.experiment import SELECTION_MODES, load_config, parse_config
from tscd_bench.schemas.record import AGGREGATE_COLUMNS
from tscd_bench.settings import Settings, load_settings

from tests.conftest import experiment_document


def _aggregate_rows(values):
    """
    Aggregate rows of one linear setting from {(method, scenario): mean_auprc}.
    """
    return pd.DataFrame([
        {"scenario": scenario, "d": 10, "t": 500, "f": np.nan, "method": method, "mode": "best_per_dataset",
         "mean_auroc": value, "std_auroc": 0.0, "mean_auprc": value, "std_auprc": 0.0, "n": 5}
        for (method, scenario), value in values.items()], columns=AGGREGATE_COLUMNS)


def test_grid_row_count():
    config = parse_config(experiment_document())
    plans = plan_trials(config)
    assert len(plans) == 10
    records = [record for plan in plans for record in run_trial(plan)]
    assert len(records) == 30
    assert {record.config_id for record in records} == {
        "var|tau_max=2|threshold=0", "var|tau_max=2|threshold=0.1", "var|tau_max=2|threshold=0.3"}


def test_threshold_configs_share_one_fit():
    config = parse_config(experiment_document(seeds=[0], scenarios=[{"kind": "vanilla"}]))
    records = run_trial(plan_trials(config)[0])
    assert len({(record.auroc, record.auprc) for record in records}) == 1


def test_empty_method_list():
    with pytest.raises(ConfigError) as error:
        parse_config(experiment_document(methods=[]))
    assert any(message.startswith("methods") for message in error.value.messages)


def test_invalid_fields_are_named():
    document = experiment_document(seeds=[0, 0])
    document["settings"][0]["d"] = 0
    with pytest.raises(ConfigError) as error:
        parse_config(document)
    locations = " ".join(error.value.messages)
    assert "seeds" in locations
    assert "settings.0" in locations


def test_unknown_scenario_parameter():
    with pytest.raises(ConfigError):
        parse_config(experiment_document(scenarios=[{"kind": "vanilla", "alpha": 1.0}]))


@pytest.mark.parametrize("overrides", [
    {"scenarios": [{"kind": "measurement_error", "alpha": []}]},
    {"settings": [{"model": "nonlinear", "d": 5, "t": 100, "f": []}]},
    {"methods": [{"method": "var", "threshold": []}]}])
def test_empty_grid_lists_are_rejected(overrides):
    with pytest.raises(ConfigError):
        parse_config(experiment_document(**overrides))


@pytest.mark.parametrize("scenario", [
    {"kind": "trend_season", "rho": float("nan")},
    {"kind": "trend_season", "eta": float("inf")},
    {"kind": "nonstationary", "m": float("-inf")},
    {"kind": "confounders", "strength": float("nan")}])
def test_non_finite_scenario_parameters_are_rejected(scenario):
    with pytest.raises(ConfigError):
        parse_config(experiment_document(scenarios=[scenario]))


def test_non_finite_settings_and_configs_are_rejected():
    with pytest.raises(ConfigError):
        parse_config(experiment_document(methods=[{"method": "lgc", "tau_max": 2, "lambda": float("inf")}]))
    document = experiment_document()
    document["settings"][0]["noise_scale"] = float("nan")
    with pytest.raises(ConfigError):
        parse_config(document)


def test_standardize_variants_stay_distinct():
    config = parse_config(experiment_document(methods=[
        {"method": "var", "tau_max": 2, "threshold": 0.0},
        {"method": "var", "tau_max": 2, "threshold": 0.0, "standardize": True}]))
    configs = config.expand_methods()
    assert [cfg.config_id() for cfg in configs] == [
        "var|tau_max=2|threshold=0", "var|tau_max=2|threshold=0|standardize=True"]
    assert [json.loads(cfg.config_json())["standardize"] for cfg in configs] == [False, True]
    assert configs[0].fit_key() != configs[1].fit_key()


def test_reruns_are_byte_identical(tmp_path):
    config = parse_config(experiment_document())
    first = run_experiment(config, tmp_path / "a")
    second = run_experiment(config, tmp_path / "b")
    for name in ["results.csv", MANIFEST_FILE] + [aggregate_file(mode) for mode in SELECTION_MODES]:
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_parallel_run_matches_serial(tmp_path):
    config = parse_config(experiment_document(seeds=[0, 1]))
    serial = run_experiment(config, tmp_path / "serial", jobs=1)
    parallel = run_experiment(config, tmp_path / "parallel", jobs=2)
    assert (serial / "results.csv").read_bytes() == (parallel / "results.csv").read_bytes()


def test_results_layout(tmp_path):
    out = run_experiment(parse_config(experiment_document()), tmp_path)
    lines = (out / "results.csv").read_text().splitlines()
    assert lines[0] == "scenario,param,d,t,f,seed,method,config_id,config_json,auroc,auprc"
    assert len(lines) == 31
    results = load_results(out / "results.csv")
    assert results["auprc"].between(0.0, 1.0).all()
    assert set(results["param"]) == {"", "alpha=1.2"}


def test_config_hash_tracks_semantics():
    base = parse_config(experiment_document())
    assert base.config_hash() == parse_config(experiment_document(name="other", jobs=4)).config_hash()
    assert base.config_hash() != parse_config(experiment_document(master_seed=8)).config_hash()
    assert base.config_hash() != parse_config(experiment_document(seeds=[0, 1, 2])).config_hash()


def test_trial_seed_is_shared_across_levels():
    config = parse_config(experiment_document(scenarios=[{"kind": "measurement_error", "alpha": [0.5, 1.0]}]))
    plans = [plan for plan in plan_trials(config) if plan.seed == 0]
    assert len(plans) == 2
    assert plans[0].spec.seed == plans[1].spec.seed
    assert plans[0].name != plans[1].name


def test_trial_seed_is_stable():
    base = BaseModelSpec(model="linear", d=3, t=150, tau_max=2, parents_per_var=2)
    assert trial_seed(7, "vanilla", base, 0) == trial_seed(7, "vanilla", base, 0)
    assert trial_seed(7, "vanilla", base, 0) != trial_seed(7, "minmax", base, 0)
    assert trial_seed(7, "vanilla", base, 0) != trial_seed(8, "vanilla", base, 0)
    assert 0 <= trial_seed(7, "vanilla", base, 0) < 2 ** 63


def test_adding_a_scenario_keeps_existing_data():
    small = parse_config(experiment_document(scenarios=[{"kind": "vanilla"}]))
    large = parse_config(experiment_document(scenarios=[{"kind": "minmax"}, {"kind": "vanilla"}]))
    seeds = {plan.seed: plan.spec.seed for plan in plan_trials(small)}
    for plan in plan_trials(large):
        if plan.spec.kind == "vanilla":
            assert plan.spec.seed == seeds[plan.seed]


def test_manifest(tmp_path):
    config = parse_config(experiment_document())
    out = run_experiment(config, tmp_path)
    manifest = json.loads((out / MANIFEST_FILE).read_text())
    assert manifest["config_hash"] == config.config_hash()
    assert manifest["tool_version"] == __version__
    assert manifest["trials"] == 10
    assert manifest["records"] == 30
    assert manifest["config"]["modes"] == SELECTION_MODES


def test_undefined_metrics_become_sentinel_rows(tmp_path):
    document = experiment_document(seeds=[0, 1])
    document["settings"].append({"model": "linear", "d": 2, "t": 150, "tau_max": 2, "parents_per_var": 1})
    out = run_experiment(parse_config(document), tmp_path)

    results = load_results(out / "results.csv")
    degenerate = results[results["d"] == 2]
    assert len(degenerate) == 12
    assert degenerate["auroc"].isna().all()
    assert results.loc[results["d"] == 3, "auroc"].notna().all()

    aggregate = load_aggregate(out / aggregate_file("best_per_dataset"))
    assert set(aggregate["d"]) == {3}


def test_unfittable_trial_gives_sentinel_rows(tmp_path):
    document = experiment_document(seeds=[0], scenarios=[{"kind": "vanilla"}])
    document["settings"] = [{"model": "linear", "d": 3, "t": 5, "tau_max": 2, "parents_per_var": 2}]
    out = run_experiment(parse_config(document), tmp_path)
    results = load_results(out / "results.csv")
    assert len(results) == 3
    assert results["auprc"].isna().all()
    assert not (out / aggregate_file("best_per_dataset")).exists()


def test_persisted_scores_rescore_to_the_same_results(tmp_path):
    config = parse_config(experiment_document(seeds=[0, 1], persist_datasets=True))
    out = run_experiment(config, tmp_path)

    trial_dirs = sorted((out / DATASET_DIR).iterdir())
    assert len(trial_dirs) == 4
    trial = json.loads((trial_dirs[0] / TRIAL_FILE).read_text())
    assert len(trial["fits"]) == 1
    assert len(trial["fits"][0]["configs"]) == 3

    rescored = rescore_run(out)
    assert rescored.read_bytes() == (out / "results.csv").read_bytes()


def test_score_pair(tmp_path):
    config = parse_config(experiment_document(seeds=[0], scenarios=[{"kind": "vanilla"}], persist_datasets=True))
    out = run_experiment(config, tmp_path)
    trial_dir = next((out / DATASET_DIR).iterdir())
    metrics = score_pair(out / SCORE_DIR / trial_dir.name / "fit_0.csv", trial_dir / "graph.json")
    results = load_results(out / "results.csv")
    assert metrics["auprc"] == pytest.approx(results.loc[0, "auprc"], abs=1e-6)
    assert metrics["auroc"] == pytest.approx(results.loc[0, "auroc"], abs=1e-6)


def test_generated_datasets_match_the_builder(tmp_path):
    config = parse_config(experiment_document(seeds=[3]))
    written = generate_datasets(config, tmp_path)
    plans = {plan.name: plan for plan in plan_trials(config)}
    assert len(written) == 2
    for directory in written:
        data, truth = build_dataset(plans[directory.name].spec)
        loaded = TimeSeriesMatrix.from_csv(directory / "data.csv")
        assert np.allclose(loaded.values, data.values, rtol=0.0, atol=1e-12)
        assert CausalGraph.from_json(directory / "graph.json") == truth
        assert json.loads((directory / TRIAL_FILE).read_text())["fits"] == []


def test_axis_order_groups_levels():
    labels = ["missing", "vanilla", "measurement_error[alpha=1.2]", "measurement_error[alpha=0.4]", "mixed[beta=0.5]"]
    assert axis_labels(labels) == [
        "vanilla", "mixed[beta=0.5]",
        "measurement_error[alpha=0.4]", "measurement_error[alpha=1.2]", "missing"]


def test_radar_full_scale(tmp_path):
    frame = _aggregate_rows({("var", "vanilla"): 100.0, ("var", "minmax"): 100.0, ("var", "missing"): 100.0})
    path = tmp_path / "radar.svg"
    figure = render_radar(frame, "auprc", output_path=path)
    ax = figure.axes[0]
    assert ax.get_ylim() == (0.0, 100.0)
    assert np.allclose(ax.get_lines()[0].get_ydata(), 100.0)
    assert path.read_text().lstrip().startswith("<?xml")


def test_radar_draws_one_polygon_per_method():
    frame = _aggregate_rows({
        (method, scenario): value
        for method, value in (("var", 40.0), ("pcmci", 60.0))
        for scenario in ("vanilla", "minmax", "missing", "mixed")})
    ax = render_radar(frame, "auprc").axes[0]
    assert len(ax.get_lines()) == 2
    assert [text.get_text() for text in ax.get_legend().get_texts()] == ["pcmci", "var"]
    # closed polygon: four axes and the repeated first vertex
    assert len(ax.get_lines()[0].get_xdata()) == 5


def test_radar_gap_names_method_and_scenario():
    values = {(m, s): 50.0 for m in ("var", "lgc") for s in ("vanilla", "minmax", "missing")}
    del values[("lgc", "minmax")]
    with pytest.raises(CoverageError, match="lgc.*minmax"):
        radar_table(_aggregate_rows(values), "auprc")


def test_radar_needs_three_scenarios():
    with pytest.raises(CoverageError):
        radar_table(_aggregate_rows({("var", "vanilla"): 50.0, ("var", "minmax"): 60.0}), "auprc")


def test_radar_averages_remaining_settings():
    frame = _aggregate_rows({("var", s): 40.0 for s in ("vanilla", "minmax", "missing")})
    other = frame.assign(d=20, mean_auprc=80.0)
    table = radar_table(pd.concat([frame, other]), "auprc")
    assert np.allclose(table.to_numpy(), 60.0)
    assert np.allclose(radar_table(filter_setting(pd.concat([frame, other]), d=20), "auprc").to_numpy(), 80.0)


def test_filter_by_model():
    linear = _aggregate_rows({("var", "vanilla"): 50.0})
    nonlinear = linear.assign(f=10.0)
    frame = pd.concat([linear, nonlinear], ignore_index=True)
    assert filter_setting(frame, model="linear")["f"].isna().all()
    assert filter_setting(frame, model="nonlinear")["f"].tolist() == [10.0]
    assert len(filter_setting(frame, f=10.0)) == 1


def _write_config(tmp_path, **overrides):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(experiment_document(**overrides)))
    return path


def test_cli_run_report_radar(tmp_path, capsys):
    config = _write_config(tmp_path, scenarios=[{"kind": "vanilla"}, {"kind": "minmax"}, {"kind": "missing"}])
    out = tmp_path / "run"
    assert main(["run", "--config", str(config), "--out", str(out)]) == 0
    assert (out / "results.csv").exists()

    (out / "summary.csv").unlink()
    assert main(["report", "--out", str(out)]) == 0
    assert (out / "summary.csv").exists()

    open_figures = plt.get_fignums()
    assert main(["radar", "--out", str(out), "--metric", "auroc"]) == 0
    assert (out / "radar_best_per_dataset_auroc.svg").exists()
    assert plt.get_fignums() == open_figures


def test_cli_radar_gap_is_an_error(tmp_path, capsys):
    config = _write_config(tmp_path, seeds=[0])
    out = tmp_path / "run"
    assert main(["run", "--config", str(config), "--out", str(out)]) == 0
    # two scenarios are not enough for a chart
    assert main(["radar", "--out", str(out)]) == 1
    assert "error:" in capsys.readouterr().err


def test_cli_evaluate(tmp_path, capsys):
    config = _write_config(tmp_path, seeds=[0], scenarios=[{"kind": "vanilla"}], persist_datasets=True)
    out = tmp_path / "run"
    assert main(["run", "--config", str(config), "--out", str(out)]) == 0
    capsys.readouterr()

    trial_dir = next((out / DATASET_DIR).iterdir())
    scores = out / SCORE_DIR / trial_dir.name / "fit_0.csv"
    assert main(["evaluate", "--scores", str(scores), "--graph", str(trial_dir / "graph.json")]) == 0
    assert set(json.loads(capsys.readouterr().out)) == {"auroc", "auprc"}

    assert main(["evaluate", "--out", str(out)]) == 0
    assert (out / "rescored.csv").exists()
    assert main(["evaluate"]) == 1


def test_cli_seed_override_changes_data(tmp_path):
    config = _write_config(tmp_path, seeds=[0], scenarios=[{"kind": "vanilla"}])
    assert main(["generate", "--config", str(config), "--out", str(tmp_path / "a")]) == 0
    assert main(["generate", "--config", str(config), "--out", str(tmp_path / "b"), "--seed", "99"]) == 0
    first = next((tmp_path / "a" / DATASET_DIR).iterdir()) / "data.csv"
    second = next((tmp_path / "b" / DATASET_DIR).iterdir()) / "data.csv"
    assert first.read_bytes() != second.read_bytes()


def test_cli_bad_config(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(experiment_document(methods=[])))
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "run")]) == 1
    assert "methods" in capsys.readouterr().err


@pytest.mark.parametrize("preset", ["default", "graded", "smoke"])
def test_presets_load(preset):
    config = load_config(preset)
    assert config.expand_methods()
    assert config.expand_settings()


def test_unknown_preset():
    with pytest.raises(ConfigError):
        load_config("no_such_preset")


def test_smoke_preset_grid():
    config = load_config("smoke")
    assert len(plan_trials(config)) == 12
    assert len(config.expand_methods()) == 4


def test_settings_precedence(monkeypatch):
    monkeypatch.delenv("TSCD_OUTPUT_DIR", raising=False)
    monkeypatch.delenv("TSCD_JOBS", raising=False)
    settings = load_settings()
    assert settings.resolve_output_dir(None, None) == "results"
    assert settings.resolve_output_dir(None, "from_config") == "from_config"
    assert settings.resolve_jobs(None, 3) == 3

    monkeypatch.setenv("TSCD_OUTPUT_DIR", "from_env")
    monkeypatch.setenv("TSCD_JOBS", "2")
    settings = load_settings()
    assert settings.resolve_output_dir(None, "from_config") == "from_env"
    assert settings.resolve_output_dir("from_cli", "from_config") == "from_cli"
    assert settings.resolve_jobs(None, 3) == 2
    assert settings.resolve_jobs(4, 3) == 4


def test_settings_reject_zero_jobs():
    with pytest.raises(ValueError):
        Settings(jobs=0)
