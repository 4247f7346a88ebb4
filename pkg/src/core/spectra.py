import logging
import math
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg

from src.core.fock_core import embed_spinor
from src.core.hamiltonians import spurious_level
from src.models.errors import NonHermitianError, ParameterDomainError
from src.models.operator_models import AtomLevel, FockTruncation, JCParams, SpinorFockState
from src.models.spectrum_models import BranchLabel, EigenPair, MatchedLevel, SpectrumReport
from src.utils.operator_utils import OperatorUtils

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
DEGENERACY_TOL = 1e-12


def _signed_vector(first: float, second: float) -> np.ndarray:
    return OperatorUtils.fix_phase(np.array([first, second], dtype=float)).real


def physical_coefficients(params: JCParams, n: int, sign: str) -> np.ndarray:
    """
    Unit coefficient pair of Psi_n^sign on (upper ⊗ |n-1>, lower ⊗ |n>).

    Falls back to the second eigenvector form, and to the bare basis vector,
    when the textbook form (delta ± root, sqrt(n) lambda) vanishes.
    """
    if n == 0:
        return np.array([0.0, 1.0])
    root = math.sqrt(params.delta**2 + n * params.lam**2)
    s = 1.0 if sign == "+" else -1.0
    off = math.sqrt(n) * params.lam
    first = np.array([params.delta + s * root, off])
    second = np.array([off, s * root - params.delta])
    for candidate in (first, second):
        if np.linalg.norm(candidate) > 1e-14 * max(1.0, root):
            return _signed_vector(*candidate)
    return np.array([1.0, 0.0]) if s > 0 else np.array([0.0, 1.0])


def nonphysical_coefficients(params: JCParams, n: int, sign: str) -> np.ndarray:
    """
    Coefficients on (phi_{-n-1}, phi_{-n}) in the real convention.

    The real-convention block is [[delta - n, lambda sqrt(n)], [-lambda sqrt(n), -n - delta]].
    """
    if n == 0:
        return np.array([1.0, 0.0])
    radicand = params.delta**2 - n * params.lam**2
    root = math.sqrt(max(radicand, 0.0))
    s = 0.0 if sign == "single" else (1.0 if sign == "+" else -1.0)
    ratio = (s * root - params.delta) / (params.lam * math.sqrt(n))
    return _signed_vector(1.0, ratio)


def physical_state(pair: EigenPair, trunc: FockTruncation) -> SpinorFockState:
    """Embed a physical block eigenvector into the truncated spinor space."""
    n = pair.label.n
    if n > trunc.n_max:
        raise ParameterDomainError(f"Block {n} does not fit in n_max = {trunc.n_max}.")
    c1, c2 = pair.coeffs
    lower = embed_spinor(AtomLevel.LOWER, n, trunc).vector * c2
    if n >= 1:
        lower = lower + embed_spinor(AtomLevel.UPPER, n - 1, trunc).vector * c1
    return SpinorFockState.from_vector(lower)


def analytic_physical_spectrum(params: JCParams, n_cut: int, trunc: Optional[FockTruncation] = None) -> List[EigenPair]:
    """
    Closed-form physical levels of H_JC up to block n_cut.

    :param params: Detuning and coupling.
    :param n_cut: Largest block index.
    :param trunc: When given, eigenstates are embedded for blocks that fit.
    :return: Psi_0^- followed by Psi_n^-, Psi_n^+ for 1 <= n <= n_cut.
    """
    if n_cut < 0:
        raise ParameterDomainError("n_cut must be non-negative.")
    pairs: List[EigenPair] = []
    ground = EigenPair(
        label=BranchLabel(n=0, sign="single"),
        energy=-params.delta,
        coeffs=(0.0, 1.0),
    )
    pairs.append(ground)
    for n in range(1, n_cut + 1):
        root = math.sqrt(params.delta**2 + n * params.lam**2)
        for sign, energy in (("-", n - root), ("+", n + root)):
            c = physical_coefficients(params, n, sign)
            pairs.append(
                EigenPair(label=BranchLabel(n=n, sign=sign), energy=energy, coeffs=(float(c[0]), float(c[1])))
            )
    if trunc is not None:
        pairs = [
            pair.model_copy(update={"state": physical_state(pair, trunc)}) if pair.label.n <= trunc.n_max else pair
            for pair in pairs
        ]
    return pairs


def analytic_nonphysical_spectrum(params: JCParams) -> List[EigenPair]:
    """
    Real nonphysical levels: Phi_0^+ at delta, then -n ± sqrt(delta^2 - n lambda^2)
    while the radicand stays non-negative.

    A radicand within the degeneracy tolerance yields one double-root entry at -n.
    """
    params.require_coupling()
    pairs = [EigenPair(label=BranchLabel(n=0, sign="single", physicality="nonphysical"), energy=params.delta, coeffs=(1.0, 0.0))]
    scale = DEGENERACY_TOL * max(params.delta**2, 1.0)
    n = 1
    while params.delta**2 - n * params.lam**2 >= -scale:
        radicand = params.delta**2 - n * params.lam**2
        if abs(radicand) <= scale:
            c = nonphysical_coefficients(params, n, "single")
            pairs.append(
                EigenPair(
                    label=BranchLabel(n=n, sign="single", physicality="nonphysical"),
                    energy=float(-n),
                    coeffs=(float(c[0]), float(c[1])),
                    double_root=True,
                )
            )
        else:
            root = math.sqrt(radicand)
            for sign, energy in (("-", -n - root), ("+", -n + root)):
                c = nonphysical_coefficients(params, n, sign)
                pairs.append(
                    EigenPair(
                        label=BranchLabel(n=n, sign=sign, physicality="nonphysical"),
                        energy=energy,
                        coeffs=(float(c[0]), float(c[1])),
                    )
                )
        n += 1
    return pairs


def numeric_spectrum(H: np.ndarray) -> np.ndarray:
    """
    All eigenvalues of a Hermitian operator matrix, ascending.

    :param H: Square matrix; Hermiticity is checked to 1e-12.
    :return: Sorted real eigenvalues.
    """
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise NonHermitianError(f"Expected a square matrix, got shape {H.shape}.")
    defect = float(np.max(np.abs(H - H.conj().T))) if H.size else 0.0
    if defect > HERMITIAN_TOL:
        raise NonHermitianError(f"Matrix is not Hermitian (max |H - H^+| = {defect:.3e}).")
    return np.sort(scipy.linalg.eigvalsh(H))


def reconcile(
    analytic: Sequence[EigenPair],
    numeric: Sequence[float],
    params: JCParams,
    trunc: FockTruncation,
    tol: float,
) -> SpectrumReport:
    """
    Pair analytic levels with numeric eigenvalues in one sorted pass.

    Numeric values left over are spurious when they sit at n_max + 1 + delta
    (only the first such value), otherwise unmatched.

    :param analytic: Levels generated with n_cut = n_max.
    :param numeric: Eigenvalues of the truncated matrix.
    :param params: Model parameters, for the predicted edge level.
    :param trunc: Truncation used for the numeric spectrum.
    :param tol: Absolute matching tolerance.
    :return: Structured report; report.ok tells whether reconciliation succeeded.
    """
    ordered = sorted(analytic, key=lambda pair: (pair.energy, pair.label.n))
    values = np.sort(np.asarray(numeric, dtype=float))
    predicted = spurious_level(params, trunc)

    matched: List[MatchedLevel] = []
    missing: List[EigenPair] = []
    leftovers: List[float] = []
    i = j = 0
    while i < len(ordered) and j < len(values):
        pair, value = ordered[i], values[j]
        gap = abs(pair.energy - value)
        if gap <= tol:
            matched.append(MatchedLevel(label=pair.label, energy=pair.energy, numeric_index=j, delta_abs=gap))
            i += 1
            j += 1
        elif value < pair.energy:
            leftovers.append(float(value))
            j += 1
        else:
            missing.append(pair)
            i += 1
    missing.extend(ordered[i:])
    leftovers.extend(float(v) for v in values[j:])

    spurious: List[float] = []
    unmatched: List[float] = []
    for value in leftovers:
        if not spurious and abs(value - predicted) <= tol:
            spurious.append(value)
        else:
            unmatched.append(value)

    report = SpectrumReport(
        matched=matched,
        spurious=spurious,
        missing=missing,
        unmatched=unmatched,
        predicted_spurious=predicted,
        tol=tol,
    )
    if report.ok:
        logger.info(f"Reconciled {len(matched)} levels; truncation level at {spurious[0]:.6f}")
    else:
        logger.error(
            f"Reconciliation failed: {len(missing)} missing, {len(unmatched)} unmatched, {len(spurious)} spurious"
        )
    return report


def level_energy(params: JCParams, label: BranchLabel) -> float:
    """Closed-form energy of one physical or real nonphysical level."""
    n, s = label.n, {"+": 1.0, "-": -1.0, "single": 0.0}[label.sign]
    if label.physicality == "physical":
        if n == 0:
            return -params.delta
        return n + s * math.sqrt(params.delta**2 + n * params.lam**2)
    if n == 0:
        return params.delta
    radicand = params.delta**2 - n * params.lam**2
    if radicand < -DEGENERACY_TOL * max(params.delta**2, 1.0):
        raise ParameterDomainError(f"{label} has no real energy at delta={params.delta}, lambda={params.lam}.")
    return -n + s * math.sqrt(max(radicand, 0.0))
