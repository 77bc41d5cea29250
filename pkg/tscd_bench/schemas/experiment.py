"""
Declarative experiment configuration.

Every scenario parameter and every method hyperparameter accepts a scalar or a list;
lists expand by Cartesian product.
"""
import hashlib
import itertools
import json
from pathlib import Path
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from tscd_bench.errors import ConfigError
from tscd_bench.schemas.method import METHOD_NAMES, RELEVANT_PARAMS, MethodConfig, MethodName
from tscd_bench.schemas.model import BaseModelSpec
from tscd_bench.schemas.scenario import KIND_PARAMS, LINEAR_ONLY_KINDS, ScenarioKind, ScenarioSpec


SelectionMode = Literal["best_per_dataset", "best_avg_scenarios", "all_hyper_aggregate"]

SELECTION_MODES = list(SelectionMode.__args__)

PRESET_DIR = Path(__file__).resolve().parent.parent / "presets"

# fields that change where or how fast a run happens, never what it computes
NON_SEMANTIC_FIELDS = {"name", "output_dir", "jobs", "persist_datasets"}

# hyperparameter grids used when a method entry leaves a parameter out
DEFAULT_METHOD_GRIDS = {
    "var": {
        "tau_max": [3, 5],
        "threshold": [0.0, 0.01, 0.05, 0.1, 0.3]},
    "lgc": {
        "tau_max": [3, 5],
        "threshold": [0.0, 0.01, 0.05, 0.1, 0.3],
        "lam": [0.001, 0.005, 0.01, 0.05, 0.1]},
    "pcmci": {
        "tau_max": [3, 5],
        "alpha_sig": [0.01, 0.05, 0.1]}}


def _as_list(value):
    if value is None or isinstance(value, list):
        return value
    return [value]


class SettingGrid(BaseModel):
    """
    Grid of vanilla settings of one model class.

    Attributes:
    - **model** (str): "linear" or "nonlinear".
    - **d**, **t** (List[int]): Widths and lengths.
    - **f** (List[float] | None): Lorenz-96 forcings; required for nonlinear, absent for linear.
    - remaining fields are passed to every BaseModelSpec unchanged.
    """
    model_config = ConfigDict(allow_inf_nan=False)

    model: Literal["linear", "nonlinear"] = "linear"
    d: List[int] = Field(min_length=1)
    t: List[int] = Field(min_length=1)
    f: Optional[List[float]] = Field(default=None, min_length=1)
    tau_max: int = 3
    parents_per_var: int = 3
    coeff_range: Tuple[float, float] = (0.1, 0.5)
    spectral_radius_cap: float = 0.95
    noise_scale: float = 0.1

    @field_validator("d", "t", "f", mode="before")
    @classmethod
    def coerce_lists(cls, value):
        return _as_list(value)

    @model_validator(mode="after")
    def validate_settings(self):
        # building every spec surfaces range errors at load time
        self.expand()
        return self

    def expand(self) -> List[BaseModelSpec]:
        forcings = self.f if self.f is not None else [None]
        shared = self.model_dump(exclude={"d", "t", "f"})
        return [BaseModelSpec(d=d, t=t, f=f, **shared)
                for d, t, f in itertools.product(self.d, self.t, forcings)]


class ScenarioGrid(BaseModel):
    """
    One scenario kind with a grid over its parameters; unset parameters keep their defaults.
    """
    model_config = ConfigDict(allow_inf_nan=False)

    kind: ScenarioKind
    alpha: Optional[List[float]] = Field(default=None, min_length=1)
    m: Optional[List[float]] = Field(default=None, min_length=1)
    nu: Optional[List[float]] = Field(default=None, min_length=1)
    ell: Optional[List[float]] = Field(default=None, min_length=1)
    level: Optional[List[Literal["moderate", "strong"]]] = Field(default=None, min_length=1)
    zeta: Optional[List[float]] = Field(default=None, min_length=1)
    strength: Optional[List[float]] = Field(default=None, min_length=1)
    beta: Optional[List[float]] = Field(default=None, min_length=1)
    gamma: Optional[List[float]] = Field(default=None, min_length=1)
    rho: Optional[List[float]] = Field(default=None, min_length=1)
    eta: Optional[List[float]] = Field(default=None, min_length=1)
    period: Optional[List[int]] = Field(default=None, min_length=1)
    sigma_tv: Optional[List[float]] = Field(default=None, min_length=1)

    @field_validator(
        "alpha", "m", "nu", "ell", "level", "zeta", "strength",
        "beta", "gamma", "rho", "eta", "period", "sigma_tv",
        mode="before")
    @classmethod
    def coerce_lists(cls, value):
        return _as_list(value)

    @model_validator(mode="after")
    def validate_grid(self):
        allowed = set(KIND_PARAMS[self.kind])
        for name in self.grid_params():
            if name not in allowed:
                raise ValueError(f"Parameter {name} does not apply to scenario {self.kind}")
        for params in self.combinations():
            ScenarioSpec(kind=self.kind, **params)
        return self

    def grid_params(self) -> List[str]:
        return [name for name in type(self).model_fields if name != "kind" and getattr(self, name) is not None]

    def combinations(self) -> List[dict]:
        names = self.grid_params()
        values = [getattr(self, name) for name in names]
        return [dict(zip(names, combo)) for combo in itertools.product(*values)]

    def expand(
            self,
            base: BaseModelSpec,
            seed: int) -> List[ScenarioSpec]:
        if self.kind in LINEAR_ONLY_KINDS and base.model != "linear":
            return []
        return [ScenarioSpec(kind=self.kind, base=base, seed=seed, **params)
                for params in self.combinations()]


class MethodGrid(BaseModel):
    """
    One method with a grid over its hyperparameters; omitted parameters use the default grid.
    """
    model_config = ConfigDict(populate_by_name=True, allow_inf_nan=False)

    method: MethodName
    tau_max: Optional[List[int]] = Field(default=None, min_length=1)
    threshold: Optional[List[float]] = Field(default=None, min_length=1)
    lam: Optional[List[float]] = Field(default=None, min_length=1, alias="lambda")
    alpha_sig: Optional[List[float]] = Field(default=None, min_length=1)
    standardize: Optional[bool] = None

    @field_validator("tau_max", "threshold", "lam", "alpha_sig", mode="before")
    @classmethod
    def coerce_lists(cls, value):
        return _as_list(value)

    @model_validator(mode="after")
    def validate_grid(self):
        relevant = set(RELEVANT_PARAMS[self.method])
        for name in ("tau_max", "threshold", "lam", "alpha_sig"):
            if getattr(self, name) is not None and name not in relevant:
                raise ValueError(f"Hyperparameter {name} does not apply to method {self.method}")
        if not self.expand():
            raise ValueError(f"Method {self.method} has an empty grid")
        return self

    def expand(self) -> List[MethodConfig]:
        names = list(RELEVANT_PARAMS[self.method])
        values = []
        for name in names:
            grid = getattr(self, name)
            values.append(grid if grid is not None else DEFAULT_METHOD_GRIDS[self.method][name])
        return [MethodConfig(method=self.method, standardize=self.standardize, **dict(zip(names, combo)))
                for combo in itertools.product(*values)]


class ExperimentConfig(BaseModel):
    """
    Full description of one benchmark run.

    Attributes:
    - **name** (str): Free-form label.
    - **master_seed** (int): Root of every per-trial seed.
    - **settings** (List[SettingGrid]): Vanilla settings.
    - **scenarios** (List[ScenarioGrid]): Scenario kinds with parameter grids.
    - **seeds** (List[int]): Distinct trial seeds.
    - **methods** (List[MethodGrid]): Methods with hyperparameter grids.
    - **output_dir** (str | None): Results directory; None defers to the environment.
    - **jobs** (int): Worker processes.
    - **modes** (List[str]): Selection modes reported after the run.
    - **persist_datasets** (bool): Write every dataset, graph and score matrix.
    """
    name: str = "experiment"
    master_seed: int = Field(default=0, ge=0)
    settings: List[SettingGrid] = Field(min_length=1)
    scenarios: List[ScenarioGrid] = Field(min_length=1)
    seeds: List[int] = Field(min_length=1)
    methods: List[MethodGrid] = Field(min_length=1)
    output_dir: Optional[str] = None
    jobs: int = Field(default=1, ge=1)
    modes: List[SelectionMode] = Field(default_factory=lambda: list(SELECTION_MODES), min_length=1)
    persist_datasets: bool = False

    @field_validator("seeds")
    @classmethod
    def validate_seeds(cls, seeds):
        if any(seed < 0 for seed in seeds):
            raise ValueError("Seeds must be non-negative")
        if len(set(seeds)) != len(seeds):
            raise ValueError(f"Seeds must be distinct, got {seeds}")
        return seeds

    def expand_settings(self) -> List[BaseModelSpec]:
        return [base for grid in self.settings for base in grid.expand()]

    def expand_scenarios(
            self,
            base: BaseModelSpec,
            seed: int) -> List[ScenarioSpec]:
        return [spec for grid in self.scenarios for spec in grid.expand(base, seed)]

    def expand_methods(self) -> List[MethodConfig]:
        configs = [config for grid in self.methods for config in grid.expand()]
        # repeated grid entries would duplicate rows
        unique = {}
        for config in configs:
            unique.setdefault(config.config_id(), config)
        return list(unique.values())

    def method_names(self) -> List[str]:
        return [name for name in METHOD_NAMES if any(grid.method == name for grid in self.methods)]

    def config_hash(self) -> str:
        """
        SHA-256 over the semantically meaningful fields in canonical JSON.
        """
        document = self.model_dump(mode="json", exclude=NON_SEMANTIC_FIELDS, by_alias=False)
        payload = json.dumps(document, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _error_messages(error: ValidationError) -> List[str]:
    return [f"{'.'.join(str(part) for part in item['loc']) or '<root>'}: {item['msg']}"
            for item in error.errors()]


def parse_config(document: dict) -> ExperimentConfig:
    """
    Validates a configuration document, raising ConfigError with one message per invalid field.
    """
    try:
        return ExperimentConfig.model_validate(document)
    except ValidationError as error:
        raise ConfigError(_error_messages(error)) from error


def load_config(path_or_preset: str | Path) -> ExperimentConfig:
    """
    Loads a configuration from a JSON file, or from a shipped preset by name
    ("default", "graded", "smoke").
    """
    path = Path(path_or_preset)
    if not path.exists():
        preset = PRESET_DIR / f"{path_or_preset}.json"
        if not preset.exists():
            raise ConfigError([f"config: no file or preset named {path_or_preset}"])
        path = preset

    try:
        document = json.loads(path.read_text())
    except json.JSONDecodeError as error:
        raise ConfigError([f"config: {path} is not valid JSON ({error})"]) from error

    return parse_config(document)
