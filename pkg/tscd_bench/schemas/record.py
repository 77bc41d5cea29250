from typing import Optional

from pydantic import BaseModel, Field


RESULT_COLUMNS = [
    "scenario", "param", "d", "t", "f", "seed",
    "method", "config_id", "config_json", "auroc", "auprc"]

AGGREGATE_COLUMNS = [
    "scenario", "d", "t", "f", "method", "mode",
    "mean_auroc", "std_auroc", "mean_auprc", "std_auprc", "n"]

SUMMARY_COLUMNS = ["method", "d", "mean_auroc", "std_auroc", "mean_auprc", "std_auprc", "n"]


class EvalRecord(BaseModel):
    """
    Score of one method configuration on one trial.

    Metrics are stored on the [0, 1] scale; None marks a sentinel row for a trial or fit
    whose metric is undefined or failed.

    Attributes:
    - **scenario** (str): Scenario kind.
    - **param** (str): Scenario parameter label, empty for parameterless kinds.
    - **d**, **t** (int): Setting width and length.
    - **f** (float | None): Lorenz-96 forcing, None for linear settings.
    - **seed** (int): Trial seed.
    - **method** (str): Method name.
    - **config_id** (str): Canonical configuration identifier.
    - **config_json** (str): Configuration values as JSON.
    - **auroc**, **auprc** (float | None): Metrics in [0, 1].
    """
    scenario: str
    param: str = ""
    d: int
    t: int
    f: Optional[float] = None
    seed: int
    method: str
    config_id: str
    config_json: str
    auroc: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    auprc: Optional[float] = Field(default=None, ge=0.0, le=1.0)

    @property
    def is_sentinel(self) -> bool:
        return self.auroc is None or self.auprc is None


class AggregateRow(BaseModel):
    """
    Mean and sample standard deviation of one group of records, reported x100.
    """
    scenario: str
    d: int
    t: int
    f: Optional[float] = None
    method: str
    mode: str
    mean_auroc: float
    std_auroc: float = Field(ge=0.0)
    mean_auprc: float
    std_auprc: float = Field(ge=0.0)
    n: int = Field(ge=1)


class SummaryRow(BaseModel):
    """
    Study-wide summary of one method at one width, reported x100.
    """
    method: str
    d: int
    mean_auroc: float
    std_auroc: float = Field(ge=0.0)
    mean_auprc: float
    std_auprc: float = Field(ge=0.0)
    n: int = Field(ge=1)
