import json
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


MethodName = Literal["var", "lgc", "pcmci"]

METHOD_NAMES = list(MethodName.__args__)

# hyperparameters that only act on the binary graph, not on the scores
POST_HOC_PARAMS = {
    "var": {"threshold"},
    "lgc": {"threshold"},
    "pcmci": set()}

RELEVANT_PARAMS = {
    "var": ("tau_max", "threshold"),
    "lgc": ("tau_max", "threshold", "lam"),
    "pcmci": ("tau_max", "alpha_sig")}


def default_standardize(method: str) -> bool:
    return method == "lgc"


class MethodConfig(BaseModel):
    """
    One hyperparameter configuration of a discovery method.

    Attributes:
    - **method** (str): "var", "lgc" or "pcmci".
    - **tau_max** (int): Maximum lag of the fitted model.
    - **threshold** (float): Score threshold of the binary graph (var, lgc).
    - **lam** (float): Lasso penalty on the standardized design (lgc), alias "lambda".
    - **alpha_sig** (float): Significance level of the CI tests (pcmci).
    - **standardize** (bool | None): z-score predictors internally; None means
      True for lgc and False otherwise.
    """
    model_config = ConfigDict(populate_by_name=True, allow_inf_nan=False)

    method: MethodName
    tau_max: int = Field(default=3, ge=1)
    threshold: float = Field(default=0.0, ge=0.0)
    lam: float = Field(default=0.01, ge=0.0, alias="lambda")
    alpha_sig: float = Field(default=0.05, gt=0.0, lt=1.0)
    standardize: Optional[bool] = None

    @model_validator(mode="after")
    def resolve_standardize(self):
        if self.standardize is None:
            self.standardize = default_standardize(self.method)
        return self

    def params(self) -> dict:
        """
        Hyperparameters that apply to this method, in canonical order. `standardize` comes
        last and only when it departs from the method's default.
        """
        params = {name: getattr(self, name) for name in RELEVANT_PARAMS[self.method]}
        if self.standardize != default_standardize(self.method):
            params["standardize"] = self.standardize
        return params

    def config_id(self) -> str:
        parts = [f"{name}={value:g}" if isinstance(value, float) else f"{name}={value}"
                 for name, value in self.params().items()]
        return "|".join([self.method] + parts)

    def config_json(self) -> str:
        return json.dumps(self.params() | {"standardize": self.standardize}, sort_keys=True)

    def fit_key(self) -> tuple:
        """
        Identifies configurations that share one score matrix.
        """
        post_hoc = POST_HOC_PARAMS[self.method]
        fit_params = tuple((name, value) for name, value in self.params().items() if name not in post_hoc)
        return (self.method, self.standardize) + fit_params
