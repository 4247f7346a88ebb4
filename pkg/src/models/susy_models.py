from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.operator_models import JCParams

KindTag = Literal["L0", "L1", "L2", "L3", "L4", "Lk"]
Ladder = Literal["plus", "minus"]


class IntertwinerKind(BaseModel):
    model_config = ConfigDict(frozen=True)

    tag: KindTag
    k: int = 0

    @model_validator(mode="after")
    def check_k(self) -> "IntertwinerKind":
        if self.tag == "Lk" and self.k < 1:
            raise ValueError("Lk requires k >= 1.")
        return self

    def __str__(self) -> str:
        return f"L{self.k}" if self.tag == "Lk" else self.tag


class OperatorForm(BaseModel):
    """
    Symbolic first-order form [[cu*a^su, c12], [c21, cl*a^sl]] of an intertwiner.

    Shared by the Fock-matrix assembly and the grid realization.
    """

    model_config = ConfigDict(frozen=True)

    upper: Tuple[float, Ladder]
    lower: Tuple[float, Ladder]
    c12: float = 0.0
    c21: float = 0.0

    @property
    def grid_sign(self) -> float:
        """Sign s with L = s*(d/dx - W)/sqrt(2) in the differential realization."""
        coef, ladder = self.upper
        return coef * (-1.0 if ladder == "plus" else 1.0)


class Intertwiner(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: IntertwinerKind
    K: Optional[float]
    form: OperatorForm
    matrix: np.ndarray
    n_max: int
    source: JCParams
    source_shift: float = 0.0
    target: JCParams
    shift: float
    target_model: Literal["JC", "AntiJC"] = "JC"
    direction: int = Field(..., ge=-1, le=1)


class SymmetryOp(BaseModel):
    """L^+ L (or L L^+) together with its split a*N_e + b*H + c, when known."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray
    decomposition: Optional[Tuple[float, float, float]] = None
    hamiltonian: np.ndarray
    excitation: np.ndarray


class HierarchyNode(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int
    params: JCParams
    shift: float
    kind: Literal["JC", "aJC"] = "JC"


class HierarchyStep(BaseModel):
    model_config = ConfigDict(frozen=True)

    source_index: int
    target_index: int
    kind: IntertwinerKind
    source_params: JCParams


class HierarchySequence(BaseModel):
    model_config = ConfigDict(frozen=True)

    nodes: List[HierarchyNode]
    steps: List[HierarchyStep]
    boundary_index: Optional[int] = None

    @property
    def boundary_reached(self) -> bool:
        return self.boundary_index is not None

    def node(self, index: int) -> HierarchyNode:
        for node in self.nodes:
            if node.index == index:
                return node
        raise KeyError(index)


class ResonantChain(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    nodes: List[HierarchyNode]
    intertwiners: List[Intertwiner]
    residuals: List[float]
    guard: int

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)


class SpectralLedger(BaseModel):
    model_config = ConfigDict(frozen=True)

    step: Tuple[int, int]
    gained: List[float]
    lost: List[float]
    matched_count: int
    ceiling: float
