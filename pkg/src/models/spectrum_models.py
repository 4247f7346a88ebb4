from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.operator_models import SpinorFockState

Sign = Literal["+", "-", "single"]
Physicality = Literal["physical", "nonphysical"]


class BranchLabel(BaseModel):
    """
    Label of one analytic level.

    Physical levels are indexed by the block n of V_n; nonphysical ones by n
    for the subspace built on phi_{-n-1}, phi_{-n}.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=0)
    sign: Sign
    physicality: Physicality = "physical"

    @model_validator(mode="after")
    def check_ground(self) -> "BranchLabel":
        if self.n == 0 and self.sign != "single":
            raise ValueError("The n=0 level has a single branch.")
        return self

    def __str__(self) -> str:
        prefix = "Psi" if self.physicality == "physical" else "Phi"
        index = self.n if self.physicality == "physical" else -self.n
        return f"{prefix}[{index},{self.sign}]"


class EigenPair(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    label: BranchLabel
    energy: float
    coeffs: Tuple[float, float]
    state: Optional[SpinorFockState] = None
    double_root: bool = False


class MatchedLevel(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: BranchLabel
    energy: float
    numeric_index: int
    delta_abs: float


class SpectrumReport(BaseModel):
    """Outcome of pairing analytic levels with the eigenvalues of a truncated matrix."""

    model_config = ConfigDict(frozen=True)

    matched: List[MatchedLevel] = Field(default_factory=list)
    spurious: List[float] = Field(default_factory=list)
    missing: List[EigenPair] = Field(default_factory=list)
    unmatched: List[float] = Field(default_factory=list)
    predicted_spurious: float
    tol: float

    @property
    def ok(self) -> bool:
        return not self.missing and not self.unmatched and len(self.spurious) == 1
