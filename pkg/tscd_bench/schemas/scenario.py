from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from tscd_bench.schemas.model import BaseModelSpec


ScenarioKind = Literal[
    "vanilla",
    "measurement_error",
    "nonstationary",
    "confounders",
    "standardized",
    "mixed",
    "minmax",
    "missing",
    "trend_season",
    "tv_coefficients",
    "exponential_noise"]

SCENARIO_KINDS = list(ScenarioKind.__args__)

# kinds that only exist for the linear vanilla model
LINEAR_ONLY_KINDS = {"tv_coefficients"}

# parameters each kind reads, in label order
KIND_PARAMS = {
    "vanilla": (),
    "measurement_error": ("alpha",),
    "nonstationary": ("m", "nu", "ell", "level"),
    "confounders": ("zeta", "strength"),
    "standardized": (),
    "mixed": ("beta",),
    "minmax": (),
    "missing": ("gamma",),
    "trend_season": ("rho", "eta", "period"),
    "tv_coefficients": ("sigma_tv",),
    "exponential_noise": ()}


class ScenarioSpec(BaseModel):
    """
    One dataset recipe: a vanilla setting, a single assumption violation and a seed.

    Only the parameters of the selected kind are used; the others keep their defaults.

    Attributes:
    - **kind** (str): Scenario kind.
    - **base** (BaseModelSpec): Vanilla setting.
    - **seed** (int): Seed of the dataset.
    - **alpha** (float): Measurement-error variance ratio.
    - **m**, **nu** (float | None): Nonstationary GP mean log scale and amplitude;
      None resolves to the setting's moderate defaults.
    - **ell** (float): Nonstationary GP kernel width in time steps.
    - **level** (str): Preset used to resolve unset m / nu ("moderate" or "strong").
    - **zeta** (float): Probability that an observed pair shares a latent confounder.
    - **strength** (float): Confounder link magnitude.
    - **beta** (float): Fraction of discretized variables in mixed data.
    - **gamma** (float): MCAR missing probability.
    - **rho**, **eta**, **period**: Trend slope, seasonal magnitude and period.
    - **sigma_tv** (float): Strength of time-varying coefficients.
    """
    model_config = ConfigDict(allow_inf_nan=False)

    kind: ScenarioKind = "vanilla"
    base: BaseModelSpec = BaseModelSpec()
    seed: int = Field(default=0, ge=0)

    alpha: float = Field(default=1.2, ge=0.0)

    m: Optional[float] = None
    nu: Optional[float] = Field(default=None, ge=0.0)
    ell: float = Field(default=20.0, gt=0.0)
    level: Literal["moderate", "strong"] = "moderate"

    zeta: float = Field(default=0.5, ge=0.0, le=1.0)
    strength: float = 0.5

    beta: float = Field(default=0.5, ge=0.0, le=1.0)

    gamma: float = Field(default=0.4, ge=0.0, lt=1.0)

    rho: float = 0.01
    eta: float = 0.5
    period: int = Field(default=12, ge=2)

    sigma_tv: float = Field(default=0.3, ge=0.0)

    @model_validator(mode="after")
    def validate_kind(self):
        if self.kind in LINEAR_ONLY_KINDS and self.base.model != "linear":
            raise ValueError(f"Scenario {self.kind} is only defined for the linear model")
        return self

    def param_label(self) -> str:
        """
        Canonical label of the kind's parameters, e.g. "alpha=1.2" or "zeta=0.5;strength=0.5".

        Unset nonstationary m / nu are left out so the label names the level instead.
        """
        parts = []
        for name in KIND_PARAMS[self.kind]:
            value = getattr(self, name)
            if value is None:
                continue
            if name == "level" and self.m is not None and self.nu is not None:
                continue
            parts.append(f"{name}={value:g}" if isinstance(value, float) else f"{name}={value}")
        return ";".join(parts)
