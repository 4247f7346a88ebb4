import logging
import math
from typing import Tuple, Union

import numpy as np

from src.models.errors import OutOfEnvelopeError, ParameterDomainError
from src.models.operator_models import AtomLevel, FockTruncation, SpinorFockState

logger = logging.getLogger(__name__)

ArrayLike = Union[float, complex, np.ndarray]

# Scaled recurrences cannot overflow inside these bounds.
PSI_X_ENVELOPE = 30.0
PSI_N_ENVELOPE = 200
# e^(x^2/2) stays below the largest double for |x| below this bound.
PHI_X_ENVELOPE = math.sqrt(2.0 * math.log(np.finfo(float).max))

PI_QUARTER = math.pi ** -0.25


def make_ladder_ops(trunc: FockTruncation) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Ladder matrices on |0..n_max>.

    a_plus drops the component that would leave the space at |n_max>.

    :param trunc: Fock truncation.
    :return: (a_minus, a_plus, number) as real (n_max+1)-square matrices.
    """
    a_minus = np.diag(np.sqrt(np.arange(1, trunc.fock_dim, dtype=float)), 1)
    a_plus = a_minus.T.copy()
    number = a_plus @ a_minus
    return a_minus, a_plus, number


def anti_number(trunc: FockTruncation) -> np.ndarray:
    """Exact a^- a^+ = N + 1 on the kept levels, i.e. diag(1..n_max+1)."""
    return np.diag(np.arange(1, trunc.fock_dim + 1, dtype=float))


def _as_array(x: ArrayLike) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(x)
    return np.atleast_1d(arr), arr.ndim == 0


def _scalar_or_array(values: np.ndarray, scalar: bool) -> ArrayLike:
    if scalar:
        value = values[0]
        return complex(value) if np.iscomplexobj(values) else float(value)
    return values


def psi_table(n_max: int, x: ArrayLike) -> np.ndarray:
    """
    Normalized Hermite functions psi_0..psi_{n_max} by the scaled three-term recurrence.

    Complex arguments are accepted, which lets psi_n(ix) serve as an independent
    check of the nonphysical functions.

    :param n_max: Highest order.
    :param x: Evaluation points.
    :return: Array of shape (n_max+1,) + x.shape.
    """
    xs, _ = _as_array(x)
    if n_max < 0:
        raise ParameterDomainError("Hermite order must be non-negative.")
    if n_max > PSI_N_ENVELOPE or np.max(np.abs(xs)) > PSI_X_ENVELOPE:
        raise OutOfEnvelopeError(
            f"psi_n requested outside |x| <= {PSI_X_ENVELOPE}, n <= {PSI_N_ENVELOPE}."
        )
    dtype = complex if np.iscomplexobj(xs) else float
    table = np.zeros((n_max + 1,) + xs.shape, dtype=dtype)
    table[0] = PI_QUARTER * np.exp(-xs**2 / 2.0)
    if n_max >= 1:
        table[1] = math.sqrt(2.0) * xs * table[0]
    for n in range(1, n_max):
        table[n + 1] = math.sqrt(2.0 / (n + 1)) * xs * table[n] - math.sqrt(n / (n + 1)) * table[n - 1]
    return table


def psi_phys(n: int, x: ArrayLike) -> ArrayLike:
    """
    n-th normalized Hermite function psi_n(x).

    :param n: Order, n >= 0.
    :param x: Point or array of points (real or complex).
    :return: psi_n at x, scalar for scalar input.
    """
    xs, scalar = _as_array(x)
    return _scalar_or_array(psi_table(n, xs)[n], scalar)


def phi_table(m_max: int, x: ArrayLike) -> np.ndarray:
    """
    Nonphysical functions phi_{-1}..phi_{-m_max} in the real convention
    phi_{-1-n}(x) = i^(-n) psi_n(ix).

    Row m-1 holds phi_{-m}. The recurrence is the all-plus modified Hermite one,
    scaled by sqrt(2^n n!) at every step.

    :param m_max: Largest m, m_max >= 1.
    :param x: Real evaluation points.
    :return: Array of shape (m_max,) + x.shape.
    """
    xs, _ = _as_array(x)
    if m_max < 1:
        raise ParameterDomainError("Nonphysical index m must be >= 1.")
    if np.iscomplexobj(xs):
        raise ParameterDomainError("Nonphysical functions are evaluated on real points only.")
    if np.max(np.abs(xs)) > PHI_X_ENVELOPE:
        raise OutOfEnvelopeError(f"e^(x^2/2) overflows double precision beyond |x| = {PHI_X_ENVELOPE:.4f}.")
    table = np.zeros((m_max,) + xs.shape, dtype=float)
    table[0] = PI_QUARTER * np.exp(xs**2 / 2.0)
    if m_max >= 2:
        table[1] = math.sqrt(2.0) * xs * table[0]
    for n in range(1, m_max - 1):
        table[n + 1] = math.sqrt(2.0 / (n + 1)) * xs * table[n] + math.sqrt(n / (n + 1)) * table[n - 1]
    if not np.all(np.isfinite(table)):
        raise OutOfEnvelopeError(f"phi_-m overflowed for m <= {m_max} on the requested points.")
    return table


def phi_nonphys(m: int, x: ArrayLike) -> ArrayLike:
    """
    Real-convention nonphysical oscillator function phi_{-m}(x).

    :param m: Index, m >= 1.
    :param x: Point or array of real points.
    :return: phi_{-m} at x.
    """
    xs, scalar = _as_array(x)
    return _scalar_or_array(phi_table(m, xs)[m - 1], scalar)


def psi_derivative_table(n_max: int, x: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """
    psi_0..psi_{n_max} and their exact derivatives from d/dx = (a^- - a^+)/sqrt(2).

    :return: (values, derivatives), each of shape (n_max+1,) + x.shape.
    """
    table = psi_table(n_max + 1, x)
    derivative = np.zeros_like(table[:-1])
    for n in range(n_max + 1):
        lower = math.sqrt(n) * table[n - 1] if n >= 1 else 0.0
        derivative[n] = (lower - math.sqrt(n + 1) * table[n + 1]) / math.sqrt(2.0)
    return table[:-1], derivative


def phi_derivative_table(m_max: int, x: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """
    phi_{-1}..phi_{-m_max} and exact derivatives.

    In the real convention a^- phi_{-m} = sqrt(m) phi_{-m-1} and
    a^+ phi_{-m} = -sqrt(m-1) phi_{-m+1}.
    """
    table = phi_table(m_max + 1, x)
    derivative = np.zeros_like(table[:-1])
    for m in range(1, m_max + 1):
        upper = math.sqrt(m - 1) * table[m - 2] if m >= 2 else 0.0
        derivative[m - 1] = (math.sqrt(m) * table[m] + upper) / math.sqrt(2.0)
    return table[:-1], derivative


def embed_spinor(level: AtomLevel, n: int, trunc: FockTruncation) -> SpinorFockState:
    """
    Basis spinor level ⊗ |n>.

    :param level: Atomic level.
    :param n: Photon number, 0 <= n <= n_max.
    :param trunc: Fock truncation.
    :return: State with a single unit coefficient.
    """
    if not 0 <= n <= trunc.n_max:
        raise ParameterDomainError(f"Photon number {n} outside 0..{trunc.n_max}.")
    upper = np.zeros(trunc.fock_dim, dtype=complex)
    lower = np.zeros(trunc.fock_dim, dtype=complex)
    (upper if AtomLevel(level) is AtomLevel.UPPER else lower)[n] = 1.0
    return SpinorFockState(upper=upper, lower=lower)
