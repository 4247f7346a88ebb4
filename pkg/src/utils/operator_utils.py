from typing import Optional

import numpy as np

from src.models.errors import DimensionMismatchError, ParameterDomainError
from src.models.operator_models import FockTruncation


class OperatorUtils:
    """
    Helpers shared by the Hamiltonian, intertwiner and hierarchy services.
    """

    @staticmethod
    def block(upper_left: np.ndarray, upper_right: np.ndarray, lower_left: np.ndarray, lower_right: np.ndarray) -> np.ndarray:
        """
        Assemble a 2x2 operator block matrix on the atom ⊗ Fock space.

        :param upper_left: Fock block acting upper -> upper.
        :param upper_right: Fock block acting lower -> upper.
        :param lower_left: Fock block acting upper -> lower.
        :param lower_right: Fock block acting lower -> lower.
        :return: Complex matrix of dimension 2(n_max+1).
        """
        return np.block([[upper_left, upper_right], [lower_left, lower_right]]).astype(complex)

    @staticmethod
    def atomic(pauli: np.ndarray, trunc: FockTruncation) -> np.ndarray:
        """Lift a 2x2 atomic matrix to the full space (tensored with the Fock identity)."""
        return np.kron(pauli, np.eye(trunc.fock_dim)).astype(complex)

    @staticmethod
    def guard_projector(trunc: FockTruncation, guard: int) -> np.ndarray:
        """
        Diagonal projector onto photon numbers <= n_max - guard on both atomic levels.

        :param trunc: Fock truncation.
        :param guard: Number of top photon levels excluded.
        :return: Real diagonal projector.
        """
        if guard < 0 or guard > trunc.n_max:
            raise ParameterDomainError(f"guard must lie in [0, {trunc.n_max}], got {guard}.")
        keep = (np.arange(trunc.fock_dim) <= trunc.n_max - guard).astype(float)
        return np.diag(np.concatenate([keep, keep]))

    @staticmethod
    def guarded_norm(matrix: np.ndarray, trunc: FockTruncation, guard: int) -> float:
        """Spectral norm of matrix restricted on the right to the guarded interior."""
        OperatorUtils.check_dim(matrix, trunc)
        return float(np.linalg.norm(matrix @ OperatorUtils.guard_projector(trunc, guard), 2))

    @staticmethod
    def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return a @ b - b @ a

    @staticmethod
    def check_dim(matrix: np.ndarray, trunc: FockTruncation, name: str = "matrix") -> None:
        if matrix.shape != (trunc.dim, trunc.dim):
            raise DimensionMismatchError(f"{name} has shape {matrix.shape}, expected ({trunc.dim}, {trunc.dim}).")

    @staticmethod
    def fix_phase(vector: np.ndarray, tol: float = 1e-14) -> np.ndarray:
        """
        Normalize to unit norm with the first non-negligible component real and positive.

        :param vector: Non-zero vector.
        :param tol: Relative size below which a component counts as zero.
        :return: Normalized copy.
        """
        norm = np.linalg.norm(vector)
        if norm == 0:
            raise ParameterDomainError("Cannot normalize a zero vector.")
        unit = vector / norm
        for value in unit:
            if abs(value) > tol:
                return unit * (abs(value) / value)
        return unit

    @staticmethod
    def central_difference(values: np.ndarray, spacing: float, axis: int = 0) -> np.ndarray:
        """
        Second-order central difference along axis; the two endpoints are left at zero.

        :param values: Samples on a uniform grid.
        :param spacing: Grid spacing.
        :param axis: Sampling axis.
        :return: Derivative samples, same shape as values.
        """
        values = np.asarray(values)
        moved = np.moveaxis(values, axis, 0)
        result = np.zeros_like(moved, dtype=np.result_type(moved, float))
        result[1:-1] = (moved[2:] - moved[:-2]) / (2.0 * spacing)
        return np.moveaxis(result, 0, axis)

    @staticmethod
    def second_difference(values: np.ndarray, spacing: float) -> np.ndarray:
        values = np.asarray(values)
        result = np.zeros_like(values, dtype=np.result_type(values, float))
        result[1:-1] = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / spacing**2
        return result

    @staticmethod
    def format_number(value: Optional[float]) -> str:
        """Fixed 12-significant-digit rendering used by every table writer."""
        if value is None:
            return ""
        value = float(value)
        if value == 0:
            value = 0.0
        return format(value, ".12g")
