import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from src.core.fock_core import anti_number, make_ladder_ops
from src.core.hamiltonians import build_ajc, build_jc
from src.core.spectra import analytic_physical_spectrum, physical_state
from src.models.errors import (
    DeferredToGridError,
    DimensionMismatchError,
    ParameterDomainError,
    StateAnnihilatedError,
)
from src.models.operator_models import FockTruncation, JCParams, SpinorFockState
from src.models.spectrum_models import BranchLabel, EigenPair
from src.models.susy_models import Intertwiner, IntertwinerKind, OperatorForm, SymmetryOp
from src.utils.operator_utils import OperatorUtils

logger = logging.getLogger(__name__)

ANNIHILATION_TOL = 1e-12
DEFAULT_GUARD = 2
# delta^2 - lambda^2 this close to zero counts as the resonant boundary.
RADICAND_TOL = 1e-12

# Physical seeds annihilated by each kind, as (block n, branch sign).
FOCK_SEEDS = {
    "L0": [(0, "single")],
    "L3": [(0, "single"), (1, "+")],
    "L4": [(0, "single"), (1, "-")],
}


def k_constants(params: JCParams) -> Tuple[Optional[float], Optional[float], float, float]:
    """
    (K1, K2+, K3, K4) of the triangular intertwiners.

    K1 and K2+ exist only when delta^2 >= lambda^2; they are returned as None otherwise.
    Use require_detuned_constants when they are mandatory.

    :param params: Detuning and coupling, lambda != 0.
    :return: The four constants; K1*K2+ = -1 and K3*K4 = -1.
    """
    params.require_coupling()
    delta, lam = params.delta, params.lam
    up = math.sqrt(delta**2 + lam**2)
    # Each pair uses the cancellation-free form for the sign of delta.
    if delta >= 0:
        k3, k4 = -lam / (delta + up), (delta + up) / lam
    else:
        k3, k4 = (delta - up) / lam, lam / (up - delta)
    radicand = delta**2 - lam**2
    if radicand < -RADICAND_TOL * max(delta**2, lam**2):
        return None, None, k3, k4
    down = math.sqrt(max(radicand, 0.0))
    if delta >= 0:
        return -lam / (delta + down), (delta + down) / lam, k3, k4
    return (down - delta) / lam, -lam / (down - delta), k3, k4


def require_detuned_constants(params: JCParams) -> Tuple[float, float]:
    k1, k2plus, _, _ = k_constants(params)
    if k1 is None or k2plus is None:
        raise ParameterDomainError(
            f"L1/L2 are possible only if the parameters satisfy delta^2 >= lambda^2 "
            f"(delta={params.delta}, lambda={params.lam})."
        )
    return k1, k2plus


def operator_form(kind: IntertwinerKind, params: JCParams) -> Tuple[OperatorForm, Optional[float]]:
    """
    Symbolic form and K constant of an intertwiner kind at the given source parameters.

    For Lk the source is H_JC(lambda sqrt(k)) + k and params.delta is ignored.
    """
    if kind.tag == "L0":
        return OperatorForm(upper=(-1.0, "plus"), lower=(1.0, "minus")), None
    if kind.tag == "Lk":
        constant = math.sqrt(kind.k) - math.sqrt(kind.k - 1)
        return OperatorForm(upper=(-1.0, "plus"), lower=(-1.0, "plus"), c12=constant), constant
    if kind.tag in ("L1", "L2"):
        k1, k2plus = require_detuned_constants(params)
        constant = k1 if kind.tag == "L1" else -k2plus
        return OperatorForm(upper=(1.0, "plus"), lower=(1.0, "plus"), c12=constant), constant
    _, _, k3, k4 = k_constants(params)
    constant = k3 if kind.tag == "L3" else k4
    return OperatorForm(upper=(1.0, "minus"), lower=(1.0, "minus"), c21=constant), constant


def assemble(form: OperatorForm, trunc: FockTruncation) -> np.ndarray:
    """Fock matrix of a symbolic intertwiner form."""
    a_minus, a_plus, _ = make_ladder_ops(trunc)
    ladders = {"plus": a_plus, "minus": a_minus}
    identity = np.eye(trunc.fock_dim)
    return OperatorUtils.block(
        form.upper[0] * ladders[form.upper[1]],
        form.c12 * identity,
        form.c21 * identity,
        form.lower[0] * ladders[form.lower[1]],
    )


def build_intertwiner(kind: IntertwinerKind, params: JCParams, trunc: FockTruncation) -> Intertwiner:
    """
    Intertwiner of the given kind with its source and target models.

    :param kind: L0..L4 or Lk(k).
    :param params: Source parameters (for Lk only lambda is read).
    :param trunc: Fock truncation.
    :return: Intertwiner whose matrix satisfies L H_source = H_target L on the guarded interior.
    """
    form, constant = operator_form(kind, params)
    delta, lam = params.delta, params.lam
    source, source_shift = params, 0.0
    target_model = "JC"

    if kind.tag == "L0":
        target, shift, direction, target_model = params, 0.0, 0, "AntiJC"
    elif kind.tag == "L1":
        target, shift, direction = params.with_delta(math.sqrt(max(delta**2 - lam**2, 0.0))), -1.0, 1
    elif kind.tag == "L2":
        target, shift, direction = params.with_delta(-math.sqrt(max(delta**2 - lam**2, 0.0))), -1.0, 1
    elif kind.tag == "L3":
        target, shift, direction = params.with_delta(math.sqrt(delta**2 + lam**2)), 1.0, -1
    elif kind.tag == "L4":
        target, shift, direction = params.with_delta(-math.sqrt(delta**2 + lam**2)), 1.0, -1
    else:
        source = JCParams(delta=lam * math.sqrt(kind.k), lam=lam)
        source_shift = float(kind.k)
        target = JCParams(delta=lam * math.sqrt(kind.k - 1), lam=lam)
        shift, direction = float(kind.k - 1), 1

    logger.debug(f"Built {kind} with K={constant} -> target delta={target.delta:.10g}, shift={shift:+g}")
    return Intertwiner(
        kind=kind,
        K=constant,
        form=form,
        matrix=assemble(form, trunc),
        n_max=trunc.n_max,
        source=source,
        source_shift=source_shift,
        target=target,
        shift=shift,
        target_model=target_model,
        direction=direction,
    )


def source_hamiltonian(L: Intertwiner) -> np.ndarray:
    trunc = FockTruncation(n_max=L.n_max)
    return build_jc(L.source, trunc) + L.source_shift * np.eye(trunc.dim)


def target_hamiltonian(L: Intertwiner) -> np.ndarray:
    trunc = FockTruncation(n_max=L.n_max)
    if L.target_model == "AntiJC":
        return build_ajc(L.target, trunc) + L.shift * np.eye(trunc.dim)
    return build_jc(L.target, trunc) + L.shift * np.eye(trunc.dim)


def _check_guard(guard: int) -> None:
    if guard < 2:
        raise ParameterDomainError("guard must be >= 2: L shifts photon number by one and H couples neighbours.")


def intertwine_residual(L: Intertwiner, H_src: np.ndarray, H_tgt: np.ndarray, guard: int = DEFAULT_GUARD) -> float:
    """
    Spectral norm of (L H_src - H_tgt L) P with P the guarded-interior projector.

    :param L: Intertwiner.
    :param H_src: Source Hamiltonian matrix.
    :param H_tgt: Target Hamiltonian matrix.
    :param guard: Top photon levels excluded, >= 2.
    :return: Residual; rounding-level for a correct pair.
    """
    _check_guard(guard)
    trunc = FockTruncation(n_max=L.n_max)
    for name, matrix in (("H_src", H_src), ("H_tgt", H_tgt)):
        if matrix.shape != L.matrix.shape:
            raise DimensionMismatchError(f"{name} has shape {matrix.shape}, intertwiner has {L.matrix.shape}.")
    return OperatorUtils.guarded_norm(L.matrix @ H_src - H_tgt @ L.matrix, trunc, guard)


def adjoint_residual(L: Intertwiner, H_src: np.ndarray, H_tgt: np.ndarray, guard: int = DEFAULT_GUARD) -> float:
    """Guarded norm of (L^+ H_tgt - H_src L^+) P: the reverse correspondence."""
    _check_guard(guard)
    trunc = FockTruncation(n_max=L.n_max)
    adjoint = L.matrix.conj().T
    return OperatorUtils.guarded_norm(adjoint @ H_tgt - H_src @ adjoint, trunc, guard)


def _block_indices(n: int, model: str, trunc: FockTruncation) -> Tuple[Optional[int], Optional[int]]:
    """Flat indices (upper, lower) spanning block n of a JC or anti-JC model."""
    if model == "AntiJC":
        upper = n
        lower = trunc.fock_dim + n - 1 if n >= 1 else None
    else:
        upper = n - 1 if n >= 1 else None
        lower = trunc.fock_dim + n
    return upper, lower


def _branch(n: int, energy: float, center: float, fallback: str) -> str:
    if n == 0:
        return "single"
    if abs(energy - center) <= 1e-12 * max(1.0, abs(center)):
        return fallback if fallback != "single" else "-"
    return "+" if energy > center else "-"


def map_state(L: Intertwiner, e: EigenPair, adjoint: bool = False) -> EigenPair:
    """
    Image of a physical eigenstate under L (or L^+ with adjoint=True).

    Forward: e.energy is an eigenvalue of H_JC(source); the result carries the
    eigenvalue of the full target (JC part plus shift), equal to e.energy + source_shift.
    Adjoint: e.energy refers to the full target and the result to H_JC(source).

    :raises StateAnnihilatedError: when the image norm is below 1e-12 of the input norm.
    """
    if e.label.physicality != "physical":
        raise ParameterDomainError("map_state acts on physical eigenstates only.")
    trunc = FockTruncation(n_max=L.n_max)
    if adjoint:
        source_model, target_model = L.target_model, "JC"
    else:
        source_model, target_model = "JC", L.target_model

    if e.state is not None:
        vector = e.state.vector
    elif source_model == "JC":
        vector = physical_state(e, trunc).vector
    else:
        vector = np.zeros(trunc.dim, dtype=complex)
        upper, lower = _block_indices(e.label.n, source_model, trunc)
        vector[upper] = e.coeffs[0]
        if lower is not None:
            vector[lower] = e.coeffs[1]

    matrix = L.matrix.conj().T if adjoint else L.matrix
    image = matrix @ vector
    if np.linalg.norm(image) <= ANNIHILATION_TOL * np.linalg.norm(vector):
        raise StateAnnihilatedError(f"{L.kind} annihilates {e.label}.")
    image = OperatorUtils.fix_phase(image)

    n_new = e.label.n - L.direction if adjoint else e.label.n + L.direction
    if n_new < 0 or n_new > trunc.n_max:
        raise ParameterDomainError(f"Mapped block {n_new} falls outside the truncation.")
    if adjoint:
        energy = e.energy - L.source_shift
        center = float(n_new)
    else:
        energy = e.energy + L.source_shift
        center = n_new + L.shift
    upper, lower = _block_indices(n_new, target_model, trunc)
    c1 = float(image[upper].real) if upper is not None else 0.0
    c2 = float(image[lower].real) if lower is not None else 0.0
    return EigenPair(
        label=BranchLabel(n=n_new, sign=_branch(n_new, energy, center, e.label.sign)),
        energy=energy,
        coeffs=(c1, c2),
        state=SpinorFockState.from_vector(image),
    )


def seed_annihilation_check(L: Intertwiner, params: JCParams, trunc: FockTruncation) -> List[Tuple[BranchLabel, float]]:
    """
    Euclidean norms of L applied to its normalized physical seeds.

    :raises DeferredToGridError: for kinds whose seeds are nonphysical (L1, L2, Lk).
    """
    seeds = FOCK_SEEDS.get(L.kind.tag)
    if seeds is None:
        raise DeferredToGridError(
            f"{L.kind} is seeded by nonphysical states; check it with src.core.darboux_grid.grid_seed_annihilation."
        )
    spectrum = {(p.label.n, p.label.sign): p for p in analytic_physical_spectrum(params, 1, trunc)}
    results = []
    for key in seeds:
        seed = spectrum[key]
        residual = float(np.linalg.norm(L.matrix @ seed.state.vector))
        logger.debug(f"{L.kind} on {seed.label}: residual {residual:.3e}")
        results.append((seed.label, residual))
    return results


def excitation_number(trunc: FockTruncation) -> np.ndarray:
    """N_e = diag(a^-a^+, a^+a^-): upper entries n+1, lower entries n."""
    _, _, number = make_ladder_ops(trunc)
    zeros = np.zeros((trunc.fock_dim, trunc.fock_dim))
    return OperatorUtils.block(anti_number(trunc), zeros, zeros, number)


def symmetry_from(L: Intertwiner) -> SymmetryOp:
    """
    S = L^+ L with its split a*N_e + b*H + c over H = H_JC(source).

    L1/L2 (and Lk): S = N_e + (K/lambda)(H - N_e - delta), K in {K1, -K2+}.
    L3/L4: S = N_e + (K/lambda)(H - N_e + delta). L0: S = N_e.
    """
    trunc = FockTruncation(n_max=L.n_max)
    source = L.source
    if L.kind.tag == "L0":
        decomposition = (1.0, 0.0, 0.0)
    else:
        # Lk equals -L1 at delta = lambda sqrt(k), so S uses K1 there.
        k = L.K if L.kind.tag != "Lk" else -L.K
        ratio = k / source.lam
        sign = -1.0 if L.kind.tag in ("L1", "L2", "Lk") else 1.0
        decomposition = (1.0 - ratio, ratio, sign * ratio * source.delta)
    return SymmetryOp(
        matrix=L.matrix.conj().T @ L.matrix,
        decomposition=decomposition,
        hamiltonian=build_jc(source, trunc),
        excitation=excitation_number(trunc),
    )


def partner_symmetry(L: Intertwiner) -> SymmetryOp:
    """
    S~ = L L^+, a symmetry of the target. For L0 it is the anti-JC excitation number
    diag(a^+a^-, a^-a^+).
    """
    trunc = FockTruncation(n_max=L.n_max)
    _, _, number = make_ladder_ops(trunc)
    zeros = np.zeros((trunc.fock_dim, trunc.fock_dim))
    ajc_excitation = OperatorUtils.block(number, zeros, zeros, anti_number(trunc))
    return SymmetryOp(
        matrix=L.matrix @ L.matrix.conj().T,
        decomposition=(1.0, 0.0, 0.0) if L.kind.tag == "L0" else None,
        hamiltonian=target_hamiltonian(L) - L.shift * np.eye(trunc.dim),
        excitation=ajc_excitation if L.target_model == "AntiJC" else excitation_number(trunc),
    )


def symmetry_residuals(S: SymmetryOp, guard: int = DEFAULT_GUARD) -> Tuple[float, Optional[float]]:
    """
    (commutator residual, decomposition residual) on the guarded interior.

    :return: ||[S, H] P|| and ||(S - a N_e - b H - c) P|| (None without a decomposition).
    """
    trunc = FockTruncation(n_max=S.matrix.shape[0] // 2 - 1)
    commutator = OperatorUtils.guarded_norm(OperatorUtils.commutator(S.matrix, S.hamiltonian), trunc, guard)
    if S.decomposition is None:
        return commutator, None
    a, b, c = S.decomposition
    rebuilt = a * S.excitation + b * S.hamiltonian + c * np.eye(trunc.dim)
    return commutator, OperatorUtils.guarded_norm(S.matrix - rebuilt, trunc, guard)
