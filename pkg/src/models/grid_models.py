from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from src.models.operator_models import GridAxis


class SpinorGridFn(BaseModel):
    """Two sampled components on a grid; exact derivative samples are kept when known."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: GridAxis
    upper: np.ndarray
    lower: np.ndarray
    d_upper: Optional[np.ndarray] = None
    d_lower: Optional[np.ndarray] = None

    @model_validator(mode="after")
    def check_samples(self) -> "SpinorGridFn":
        for name in ("upper", "lower", "d_upper", "d_lower"):
            values = getattr(self, name)
            if values is None:
                continue
            if values.shape != (self.grid.points,):
                raise ValueError(f"{name} must have one sample per grid point.")
            if not np.all(np.isfinite(values)):
                raise ValueError(f"{name} has non-finite samples.")
        return self

    @property
    def has_derivative(self) -> bool:
        return self.d_upper is not None and self.d_lower is not None

    @property
    def stacked(self) -> np.ndarray:
        """Samples as an array of shape (points, 2)."""
        return np.stack([self.upper, self.lower], axis=-1).astype(complex)


class MatrixField(BaseModel):
    """
    Pointwise 2x2 matrices on a grid, stored as values[i] = [[m11, m12], [m21, m22]].

    mask marks the points where the field is trusted.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: GridAxis
    values: np.ndarray
    mask: np.ndarray
    derivative: Optional[np.ndarray] = None
    det: Optional[np.ndarray] = None

    @model_validator(mode="after")
    def check_shape(self) -> "MatrixField":
        if self.values.shape != (self.grid.points, 2, 2):
            raise ValueError("values must have shape (points, 2, 2).")
        if self.mask.shape != (self.grid.points,):
            raise ValueError("mask must have one entry per grid point.")
        return self

    @property
    def m11(self) -> np.ndarray:
        return self.values[:, 0, 0]

    @property
    def m12(self) -> np.ndarray:
        return self.values[:, 0, 1]

    @property
    def m21(self) -> np.ndarray:
        return self.values[:, 1, 0]

    @property
    def m22(self) -> np.ndarray:
        return self.values[:, 1, 1]


class ShapeFit(BaseModel):
    model_config = ConfigDict(frozen=True)

    delta_fit: float
    lambda_fit: float
    const_fit: float
    residual: float
    threshold: float
    points_used: int

    @property
    def is_shape_invariant(self) -> bool:
        return self.residual <= self.threshold


class DarbouxResult(BaseModel):
    """One seed pair pushed through M, W, Delta V and the shape fit."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: str
    seeds: Tuple[str, str]
    M: MatrixField
    W: MatrixField
    delta_V: MatrixField
    V_tilde: MatrixField
    fit: ShapeFit
    predicted: Tuple[float, float, float]
    w_error: float
