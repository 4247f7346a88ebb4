from typing import Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.operator_models import FockTruncation, GridAxis, JCParams

DEFAULT_TOLERANCES: Dict[str, float] = {"tol_residual": 1e-10, "tol_grid": 1e-5}


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    delta: float = 3.0
    lam: float = Field(1.25, alias="lambda")
    n_max: int = Field(40, ge=2)
    x_min: float = -6.0
    x_max: float = 6.0
    points: int = Field(2001, ge=3)
    tolerances: Dict[str, float] = Field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output_format: Literal["csv", "json"] = "csv"
    output: Optional[str] = None

    @model_validator(mode="after")
    def check_window(self) -> "RunConfig":
        if not self.x_min < self.x_max:
            raise ValueError("x_min must be smaller than x_max.")
        return self

    @property
    def params(self) -> JCParams:
        return JCParams(delta=self.delta, lam=self.lam)

    @property
    def trunc(self) -> FockTruncation:
        return FockTruncation(n_max=self.n_max)

    @property
    def grid(self) -> GridAxis:
        return GridAxis(x_min=self.x_min, x_max=self.x_max, points=self.points)

    @property
    def tol_residual(self) -> float:
        return self.tolerances.get("tol_residual", DEFAULT_TOLERANCES["tol_residual"])

    @property
    def tol_grid(self) -> float:
        return self.tolerances.get("tol_grid", DEFAULT_TOLERANCES["tol_grid"])
