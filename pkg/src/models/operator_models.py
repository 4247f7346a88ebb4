from enum import Enum
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.models.errors import ParameterDomainError

# Dense complex matrix of dimension 2(n_max+1), upper atomic level first.
OperatorMatrix = np.ndarray


class AtomLevel(str, Enum):
    UPPER = "upper"
    LOWER = "lower"


class FockTruncation(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_max: int = Field(..., ge=2, description="Largest photon number kept in the basis.")

    @property
    def fock_dim(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)

    def index(self, level: AtomLevel, n: int) -> int:
        """Flat index of level ⊗ |n> in the block layout."""
        offset = 0 if AtomLevel(level) is AtomLevel.UPPER else self.fock_dim
        return offset + n


class GridAxis(BaseModel):
    model_config = ConfigDict(frozen=True)

    x_min: float = -6.0
    x_max: float = 6.0
    points: int = Field(2001, ge=3)

    @model_validator(mode="after")
    def check_order(self) -> "GridAxis":
        if not self.x_min < self.x_max:
            raise ValueError("x_min must be smaller than x_max.")
        return self

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.points)

    def window(self, half_width: Optional[float] = None) -> np.ndarray:
        """
        Boolean mask of interior points, optionally restricted to |x| <= half_width.

        :param half_width: Half width of the window around the origin.
        :return: Mask with endpoints always excluded.
        """
        mask = np.ones(self.points, dtype=bool)
        mask[0] = mask[-1] = False
        if half_width is not None:
            mask &= np.abs(self.x) <= half_width + 1e-12
        return mask


class SpinorFockState(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    upper: np.ndarray
    lower: np.ndarray

    @model_validator(mode="after")
    def check_shapes(self) -> "SpinorFockState":
        if self.upper.shape != self.lower.shape or self.upper.ndim != 1:
            raise ValueError("upper and lower coefficient arrays must be 1-D and equally long.")
        if not (np.all(np.isfinite(self.upper)) and np.all(np.isfinite(self.lower))):
            raise ValueError("Spinor coefficients must be finite.")
        return self

    @classmethod
    def from_vector(cls, vector: np.ndarray) -> "SpinorFockState":
        half = vector.shape[0] // 2
        return cls(upper=np.array(vector[:half], dtype=complex), lower=np.array(vector[half:], dtype=complex))

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.upper, self.lower]).astype(complex)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))


class RawParams(BaseModel):
    """Physical parameters of the atom-field Hamiltonian, in rad/s (hbar may be set to 1)."""

    model_config = ConfigDict(frozen=True)

    omega0: float
    omega: float
    mu: float
    hbar: float = 1.0

    @field_validator("omega")
    @classmethod
    def check_omega(cls, value: float) -> float:
        if value <= 0:
            raise ValueError("omega must be positive.")
        return value

    @property
    def alpha(self) -> float:
        return self.hbar * (self.omega0 - self.omega)

    @property
    def beta(self) -> float:
        return self.hbar * self.mu


class JCParams(BaseModel):
    """Dimensionless detuning and coupling in units of hbar*omega."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    delta: float
    lam: float = Field(..., alias="lambda")

    def require_coupling(self) -> None:
        if self.lam == 0:
            raise ParameterDomainError("lambda must be non-zero for this construction.")

    def with_delta(self, delta: float) -> "JCParams":
        return JCParams(delta=delta, lam=self.lam)


class ModelKind(BaseModel):
    model_config = ConfigDict(frozen=True)

    tag: Literal["JC", "AntiJC", "ResonantJC", "DiracHO"]
    k: int = Field(0, ge=0)
