import logging
import math
from typing import Literal

import numpy as np

from src.core.fock_core import anti_number, make_ladder_ops
from src.models.errors import ParameterDomainError
from src.models.operator_models import FockTruncation, JCParams, ModelKind, RawParams
from src.utils.operator_utils import OperatorUtils

logger = logging.getLogger(__name__)

SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
EQUIVALENCES = {"sigma_z": SIGMA_Z, "sigma_y": SIGMA_Y}


def reduce_params(raw: RawParams) -> JCParams:
    """
    Dimensionless detuning and coupling in hbar*omega units.

    :param raw: Frequencies and coupling in rad/s.
    :return: delta = (omega0 - omega)/(2 omega), lambda = mu/omega.
    """
    if raw.omega <= 0:
        raise ParameterDomainError("omega must be positive.")
    delta = raw.alpha / (2.0 * raw.hbar * raw.omega)
    lam = raw.beta / (raw.hbar * raw.omega)
    return JCParams(delta=delta, lam=lam)


def build_jc(params: JCParams, trunc: FockTruncation) -> np.ndarray:
    """
    H_JC = [[a^-a^+ + delta, lambda a^-], [lambda a^+, a^+a^- - delta]], constant -1/2 dropped.

    The lone upper ⊗ |n_max> entry equals n_max + 1 + delta and decouples.
    """
    a_minus, a_plus, number = make_ladder_ops(trunc)
    identity = np.eye(trunc.fock_dim)
    return OperatorUtils.block(
        anti_number(trunc) + params.delta * identity,
        params.lam * a_minus,
        params.lam * a_plus,
        number - params.delta * identity,
    )


def build_ajc(params: JCParams, trunc: FockTruncation) -> np.ndarray:
    """H_aJC = [[a^+a^- + delta, -lambda a^+], [-lambda a^-, a^-a^+ - delta]]."""
    a_minus, a_plus, number = make_ladder_ops(trunc)
    identity = np.eye(trunc.fock_dim)
    return OperatorUtils.block(
        number + params.delta * identity,
        -params.lam * a_plus,
        -params.lam * a_minus,
        anti_number(trunc) - params.delta * identity,
    )


def equivalence_transform(H: np.ndarray, R: Literal["sigma_z", "sigma_y"]) -> np.ndarray:
    """
    Unitary presentation R H R^-1 with R acting on the atomic index.

    :param H: Operator matrix.
    :param R: "sigma_z" or "sigma_y".
    :return: Transformed matrix; the spectrum is unchanged.
    """
    if R not in EQUIVALENCES:
        raise ParameterDomainError(f"Unsupported equivalence {R!r}; expected one of {sorted(EQUIVALENCES)}.")
    fock_dim = H.shape[0] // 2
    lifted = np.kron(EQUIVALENCES[R], np.eye(fock_dim))
    return lifted @ H @ lifted.conj().T


def build_resonant(k: int, lam: float, trunc: FockTruncation) -> np.ndarray:
    """H_JC^k = H_JC(delta = lambda sqrt(k), lambda) + k I."""
    if k < 0:
        raise ParameterDomainError("Resonant index k must be non-negative.")
    H = build_jc(JCParams(delta=lam * math.sqrt(k), lam=lam), trunc)
    return H + k * np.eye(trunc.dim)


def build_dirac_ho(k: int, trunc: FockTruncation) -> np.ndarray:
    """First-order H_HO^k = [[sqrt(k), a^-], [a^+, -sqrt(k)]]."""
    if k < 0:
        raise ParameterDomainError("Dirac index k must be non-negative.")
    a_minus, a_plus, _ = make_ladder_ops(trunc)
    identity = np.eye(trunc.fock_dim)
    root = math.sqrt(k)
    return OperatorUtils.block(root * identity, a_minus, a_plus, -root * identity)


def build_model(kind: ModelKind, params: JCParams, trunc: FockTruncation) -> np.ndarray:
    """Dispatch on the model tag; resonant and Dirac models read only lambda and k."""
    if kind.tag == "JC":
        return build_jc(params, trunc)
    if kind.tag == "AntiJC":
        return build_ajc(params, trunc)
    if kind.tag == "ResonantJC":
        return build_resonant(kind.k, params.lam, trunc)
    return build_dirac_ho(kind.k, trunc)


def spurious_level(params: JCParams, trunc: FockTruncation, model: Literal["JC", "AntiJC"] = "JC") -> float:
    """
    Eigenvalue of the decoupled truncation-edge state.

    JC: upper ⊗ |n_max> at n_max + 1 + delta. Anti-JC: lower ⊗ |n_max> at n_max + 1 - delta.
    """
    if model == "JC":
        return trunc.n_max + 1 + params.delta
    return trunc.n_max + 1 - params.delta


def block_projector(n: int, trunc: FockTruncation) -> np.ndarray:
    """Projector onto V_n = span{upper ⊗ |n-1>, lower ⊗ |n>} (V_0 = lower ⊗ |0>)."""
    if not 0 <= n <= trunc.n_max:
        raise ParameterDomainError(f"Block index {n} outside 0..{trunc.n_max}.")
    diagonal = np.zeros(trunc.dim)
    diagonal[trunc.fock_dim + n] = 1.0
    if n >= 1:
        diagonal[n - 1] = 1.0
    return np.diag(diagonal)
