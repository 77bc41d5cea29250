from typing import Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class NoiseSpec(BaseModel):
    """
    Additive noise law.

    Attributes:
    - **kind** (str): "gaussian" (scale is the standard deviation) or "exponential"
      (scale is the mean of the exponential; draws are centred by subtracting it).
    - **scale** (float): Positive scale.
    """
    model_config = ConfigDict(allow_inf_nan=False)

    kind: Literal["gaussian", "exponential"] = "gaussian"
    scale: float = Field(default=0.1, gt=0.0)

    def sample(
            self,
            rng: np.random.Generator,
            size: int | Tuple[int, ...]) -> np.ndarray:
        """
        Draws zero-mean noise of the given shape.
        """
        if self.kind == "gaussian":
            return rng.normal(0.0, self.scale, size=size)
        return rng.exponential(self.scale, size=size) - self.scale


class Lorenz96Spec(BaseModel):
    """
    Lorenz-96 generation setup.

    Attributes:
    - **d** (int): Number of variables, at least 4.
    - **forcing** (float): Forcing constant F.
    - **dt_sample** (float): Time between recorded samples.
    - **substeps** (int): RK4 steps per recorded sample.
    - **burn_in** (int): Recorded samples discarded before retention.
    - **noise** (NoiseSpec): Observation-stage noise added to recorded values.
    """
    model_config = ConfigDict(allow_inf_nan=False)

    d: int = Field(ge=4)
    forcing: float = 10.0
    dt_sample: float = Field(default=0.05, gt=0.0)
    substeps: int = Field(default=5, ge=1)
    burn_in: int = Field(default=1000, ge=0)
    noise: NoiseSpec = NoiseSpec()

    @property
    def step(self) -> float:
        return self.dt_sample / self.substeps


class BaseModelSpec(BaseModel):
    """
    Vanilla data-generating setting.

    Attributes:
    - **model** (str): "linear" (VAR) or "nonlinear" (Lorenz-96).
    - **d** (int): Number of observed variables.
    - **t** (int): Number of retained time steps.
    - **f** (float | None): Lorenz-96 forcing; must be None for the linear model.
    - **tau_max** (int): Maximum lag of the generating VAR.
    - **parents_per_var** (int): Parents per variable in the VAR, self included.
    - **coeff_range** (Tuple[float, float]): Coefficient magnitude range (lo, hi).
    - **spectral_radius_cap** (float): Stationarity cap on the companion matrix.
    - **noise_scale** (float): Noise scale of the vanilla model.
    """
    model_config = ConfigDict(allow_inf_nan=False)

    model: Literal["linear", "nonlinear"] = "linear"
    d: int = Field(default=10, ge=2)
    t: int = Field(default=1000, ge=1)
    f: Optional[float] = None
    tau_max: int = Field(default=3, ge=1)
    parents_per_var: int = Field(default=3, ge=1)
    coeff_range: Tuple[float, float] = (0.1, 0.5)
    spectral_radius_cap: float = Field(default=0.95, gt=0.0, lt=1.0)
    noise_scale: float = Field(default=0.1, gt=0.0)

    @field_validator("coeff_range")
    @classmethod
    def validate_coeff_range(cls, coeff_range):
        lo, hi = coeff_range
        if not 0 < lo < hi:
            raise ValueError(f"Coefficient range must satisfy 0 < lo < hi, got {coeff_range}")
        return coeff_range

    @model_validator(mode="after")
    def validate_model(self):
        if self.model == "nonlinear":
            if self.f is None:
                raise ValueError("Nonlinear setting needs a forcing constant f")
            if self.d < 4:
                raise ValueError("Lorenz-96 needs at least 4 variables")
        elif self.f is not None:
            raise ValueError("Linear setting must not set a forcing constant")
        if self.parents_per_var > self.d:
            raise ValueError(f"parents_per_var ({self.parents_per_var}) exceeds d ({self.d})")
        return self
