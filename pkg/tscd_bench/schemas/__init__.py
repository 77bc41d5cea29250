from .model import NoiseSpec, Lorenz96Spec, BaseModelSpec
from .scenario import ScenarioKind, ScenarioSpec, SCENARIO_KINDS, LINEAR_ONLY_KINDS, KIND_PARAMS
from .method import MethodName, MethodConfig, METHOD_NAMES
from .record import EvalRecord, AggregateRow, SummaryRow, RESULT_COLUMNS, AGGREGATE_COLUMNS, SUMMARY_COLUMNS
from .experiment import (
    SettingGrid, ScenarioGrid, MethodGrid, ExperimentConfig, SelectionMode, SELECTION_MODES,
    DEFAULT_METHOD_GRIDS, parse_config, load_config)

__all__ = [
    "NoiseSpec", "Lorenz96Spec", "BaseModelSpec",
    "ScenarioKind", "ScenarioSpec", "SCENARIO_KINDS", "LINEAR_ONLY_KINDS", "KIND_PARAMS",
    "MethodName", "MethodConfig", "METHOD_NAMES",
    "EvalRecord", "AggregateRow", "SummaryRow", "RESULT_COLUMNS", "AGGREGATE_COLUMNS", "SUMMARY_COLUMNS",
    "SettingGrid", "ScenarioGrid", "MethodGrid", "ExperimentConfig", "SelectionMode", "SELECTION_MODES",
    "DEFAULT_METHOD_GRIDS", "parse_config", "load_config"
]
