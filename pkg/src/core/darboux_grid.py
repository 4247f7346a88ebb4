import logging
import math
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np

from src.core.fock_core import phi_derivative_table, psi_derivative_table
from src.core.intertwiners import operator_form, require_detuned_constants
from src.core.spectra import nonphysical_coefficients, physical_coefficients
from src.models.errors import DimensionMismatchError, ParameterDomainError, SingularSeedMatrixError
from src.models.grid_models import DarbouxResult, MatrixField, ShapeFit, SpinorGridFn
from src.models.operator_models import GridAxis, JCParams, SpinorFockState
from src.models.spectrum_models import BranchLabel
from src.models.susy_models import IntertwinerKind, OperatorForm
from src.utils.operator_utils import OperatorUtils

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
GAMMA = np.array([[0.0, 1.0], [-1.0, 0.0]])

COARSE_SPACING = 0.1
SINGULAR_TOL = 1e-10
SINGULAR_RADIUS = 2
MAX_SINGULAR_FRACTION = 0.05
MIN_FIT_POINTS = 100
FIT_THRESHOLD = 1e-4

DerivativeMode = Literal["auto", "analytic", "central"]

PSI_0 = BranchLabel(n=0, sign="single")
PHI_0 = BranchLabel(n=0, sign="single", physicality="nonphysical")

# Seed pairs annihilated by each intertwiner kind; Lk reuses the L1 pair at delta = lambda sqrt(k).
SEED_PAIRS: Dict[str, Tuple[BranchLabel, BranchLabel]] = {
    "L0": (PSI_0, PHI_0),
    "L1": (PHI_0, BranchLabel(n=1, sign="-", physicality="nonphysical")),
    "L2": (PHI_0, BranchLabel(n=1, sign="+", physicality="nonphysical")),
    "L3": (PSI_0, BranchLabel(n=1, sign="+")),
    "L4": (PSI_0, BranchLabel(n=1, sign="-")),
    "Lk": (PHI_0, BranchLabel(n=1, sign="-", physicality="nonphysical")),
}


def source_params(kind: IntertwinerKind, params: JCParams) -> JCParams:
    if kind.tag == "Lk":
        return JCParams(delta=params.lam * math.sqrt(kind.k), lam=params.lam)
    return params


def sample_eigenfunction(label: BranchLabel, params: JCParams, grid: GridAxis) -> SpinorGridFn:
    """
    Closed-form eigenspinor sampled on the grid, with exact derivative samples.

    Physical block n lives on (psi_{n-1}, psi_n); nonphysical block n on (phi_{-n-1}, phi_{-n}).

    :param label: Level to sample.
    :param params: Detuning and coupling.
    :param grid: Sampling grid.
    :return: SpinorGridFn with d_upper/d_lower filled.
    """
    x = grid.x
    n = label.n
    if label.physicality == "physical":
        values, derivatives = psi_derivative_table(n, x)
        c1, c2 = physical_coefficients(params, n, label.sign)
        upper_idx, lower_idx = n - 1, n
    else:
        params.require_coupling()
        if params.delta**2 - n * params.lam**2 < -1e-12 * max(params.delta**2, 1.0):
            raise ParameterDomainError(
                f"{label} has a complex eigenvalue: delta^2 < {n} lambda^2 (delta={params.delta}, lambda={params.lam})."
            )
        values, derivatives = phi_derivative_table(n + 1, x)
        c1, c2 = nonphysical_coefficients(params, n, label.sign)
        # Row m-1 holds phi_{-m}.
        upper_idx, lower_idx = n, n - 1

    zeros = np.zeros(grid.points)
    upper = c1 * values[upper_idx] if upper_idx >= 0 else zeros
    d_upper = c1 * derivatives[upper_idx] if upper_idx >= 0 else zeros
    lower = c2 * values[lower_idx] if lower_idx >= 0 else zeros
    d_lower = c2 * derivatives[lower_idx] if lower_idx >= 0 else zeros
    return SpinorGridFn(
        grid=grid,
        upper=np.asarray(upper, dtype=complex),
        lower=np.asarray(lower, dtype=complex),
        d_upper=np.asarray(d_upper, dtype=complex),
        d_lower=np.asarray(d_lower, dtype=complex),
    )


def sample_fock_state(state: SpinorFockState, grid: GridAxis) -> SpinorGridFn:
    """Expand a Fock-space spinor in Hermite functions on the grid."""
    n_max = state.upper.shape[0] - 1
    values, derivatives = psi_derivative_table(n_max, grid.x)
    return SpinorGridFn(
        grid=grid,
        upper=state.upper @ values,
        lower=state.lower @ values,
        d_upper=state.upper @ derivatives,
        d_lower=state.lower @ derivatives,
    )


def _field(grid: GridAxis, values: np.ndarray, mask: Optional[np.ndarray] = None, **extra) -> MatrixField:
    mask = grid.window() if mask is None else mask
    return MatrixField(grid=grid, values=values.astype(complex), mask=mask, **extra)


def potential(params: JCParams, grid: GridAxis, model: Literal["JC", "AntiJC"] = "JC") -> MatrixField:
    """
    V(x) of H = -1/2 d^2 + V + (lambda/sqrt2) gamma d.

    JC: [[(x^2+1)/2 + delta, lambda x/sqrt2], [lambda x/sqrt2, (x^2-1)/2 - delta]].
    Anti-JC swaps the +-1/2 offsets and flips the coupling sign.
    """
    x = grid.x
    values = np.zeros((grid.points, 2, 2))
    offset = 1.0 if model == "JC" else -1.0
    coupling = params.lam / SQRT2 * x * (1.0 if model == "JC" else -1.0)
    values[:, 0, 0] = 0.5 * (x**2 + offset) + params.delta
    values[:, 1, 1] = 0.5 * (x**2 - offset) - params.delta
    values[:, 0, 1] = coupling
    values[:, 1, 0] = coupling
    return _field(grid, values, np.ones(grid.points, dtype=bool))


def h_diff_apply(params: JCParams, psi: SpinorGridFn, model: Literal["JC", "AntiJC"] = "JC") -> SpinorGridFn:
    """
    Finite-difference H psi; the two endpoint samples are zero and must be ignored.

    :param params: Detuning and coupling.
    :param psi: Sampled spinor.
    :param model: "JC" or "AntiJC" potential.
    :return: H psi sampled on the same grid.
    """
    grid = psi.grid
    h = grid.spacing
    if h > COARSE_SPACING:
        logger.warning(f"Grid spacing {h:.3g} exceeds {COARSE_SPACING}; finite-difference H is unreliable.")
    stacked = psi.stacked
    second = np.stack([OperatorUtils.second_difference(stacked[:, i], h) for i in range(2)], axis=-1)
    first = OperatorUtils.central_difference(stacked, h, axis=0)
    V = potential(params, grid, model).values
    result = -0.5 * second + np.einsum("pij,pj->pi", V, stacked) + params.lam / SQRT2 * first @ GAMMA.T
    result[0] = result[-1] = 0.0
    return SpinorGridFn(grid=grid, upper=result[:, 0], lower=result[:, 1])


def eigen_residual(
    params: JCParams,
    fn: SpinorGridFn,
    energy: float,
    half_width: Optional[float] = None,
    relative: bool = False,
    model: Literal["JC", "AntiJC"] = "JC",
) -> float:
    """
    Sup norm of H psi - E psi over the interior window.

    With relative=True each point is divided by |psi(x)|, which keeps e^(x^2/2) growth of
    nonphysical seeds from swamping the measure.
    """
    applied = h_diff_apply(params, fn, model).stacked
    stacked = fn.stacked
    residual = np.linalg.norm(applied - energy * stacked, axis=-1)
    mask = fn.grid.window(half_width)
    if relative:
        scale = np.linalg.norm(stacked, axis=-1)
        mask &= scale > 0
        residual = residual[mask] / scale[mask]
    else:
        residual = residual[mask]
    return float(np.max(residual))


def _derivative_samples(fn: SpinorGridFn, mode: DerivativeMode) -> np.ndarray:
    if mode == "analytic" and not fn.has_derivative:
        raise ParameterDomainError("Analytic derivatives requested for a spinor sampled without them.")
    if fn.has_derivative and mode != "central":
        return np.stack([fn.d_upper, fn.d_lower], axis=-1).astype(complex)
    return OperatorUtils.central_difference(fn.stacked, fn.grid.spacing, axis=0)


def _singular_mask(det: np.ndarray, scale: np.ndarray) -> np.ndarray:
    singular = np.abs(det) <= SINGULAR_TOL * scale
    grown = singular.copy()
    for offset in range(1, SINGULAR_RADIUS + 1):
        grown[offset:] |= singular[:-offset]
        grown[:-offset] |= singular[offset:]
    return grown


def build_M(seed1: SpinorGridFn, seed2: SpinorGridFn, derivative: DerivativeMode = "auto") -> MatrixField:
    """
    Seed matrix with seed1 and seed2 as columns.

    The derivative field follows the requested mode; det M is tracked pointwise and
    points with |det| <= 1e-10 |col1||col2| are masked together with two neighbours each side.

    :raises SingularSeedMatrixError: for proportional seeds.
    """
    if seed1.grid != seed2.grid:
        raise DimensionMismatchError("Seeds must be sampled on the same grid.")
    grid = seed1.grid
    values = np.stack([seed1.stacked, seed2.stacked], axis=-1)
    derivative = np.stack([_derivative_samples(seed1, derivative), _derivative_samples(seed2, derivative)], axis=-1)
    det = values[:, 0, 0] * values[:, 1, 1] - values[:, 0, 1] * values[:, 1, 0]
    scale = np.linalg.norm(values[:, :, 0], axis=-1) * np.linalg.norm(values[:, :, 1], axis=-1)
    singular = _singular_mask(det, scale)
    interior = grid.window()
    if np.all(singular[interior]):
        raise SingularSeedMatrixError("Seeds are proportional: det M vanishes on the whole grid.")
    mask = interior & ~singular
    return MatrixField(grid=grid, values=values, mask=mask, derivative=derivative, det=det)


def build_W(M: MatrixField) -> MatrixField:
    """
    W = M' M^-1 pointwise.

    :param M: Seed matrix from build_M (its derivative field is used).
    :return: W on the same grid; masked points carry zeros.
    :raises SingularSeedMatrixError: when more than 5% of interior points are singular.
    """
    interior = M.grid.window()
    singular = interior & ~M.mask
    fraction = np.count_nonzero(singular) / max(np.count_nonzero(interior), 1)
    if fraction > MAX_SINGULAR_FRACTION:
        raise SingularSeedMatrixError(f"det M is singular on {fraction:.1%} of the interior.")
    if fraction > 0:
        logger.warning(f"Masked {np.count_nonzero(singular)} near-singular points of det M.")

    safe = M.values.copy()
    safe[~M.mask] = np.eye(2)
    derivative = M.derivative if M.derivative is not None else OperatorUtils.central_difference(M.values, M.grid.spacing)
    W = derivative @ np.linalg.inv(safe)
    W[~M.mask] = 0.0
    return MatrixField(grid=M.grid, values=W, mask=M.mask.copy())


def delta_V(W: MatrixField, lam: float) -> MatrixField:
    """Delta V = -W' - (lambda/sqrt2)[W, gamma], with a central-difference W'."""
    W_prime = OperatorUtils.central_difference(W.values, W.grid.spacing, axis=0)
    commutator = W.values @ GAMMA - GAMMA @ W.values
    values = -W_prime - lam / SQRT2 * commutator
    mask = W.mask.copy()
    # W' at a point reads both neighbours.
    mask[1:-1] &= W.mask[:-2] & W.mask[2:]
    values[~mask] = 0.0
    return MatrixField(grid=W.grid, values=values, mask=mask)


def partner_potential(params: JCParams, W: MatrixField, model: Literal["JC", "AntiJC"] = "JC") -> MatrixField:
    dV = delta_V(W, params.lam)
    V = potential(params, W.grid, model)
    return MatrixField(grid=W.grid, values=V.values + dV.values, mask=dV.mask)


def fit_shape(V_tilde: MatrixField, half_width: Optional[float] = None, threshold: float = FIT_THRESHOLD) -> ShapeFit:
    """
    Least-squares fit of V~ to the JC template with parameters (delta~, lambda~, c).

    Template: [[(x^2+1)/2 + d + c, l x/sqrt2], [l x/sqrt2, (x^2-1)/2 - d + c]].

    :param V_tilde: Partner potential.
    :param half_width: Restrict the fit to |x| <= half_width.
    :param threshold: Max residual accepted as shape invariant.
    :return: ShapeFit with the max pointwise deviation.
    """
    mask = V_tilde.mask & V_tilde.grid.window(half_width)
    count = int(np.count_nonzero(mask))
    if count < MIN_FIT_POINTS:
        raise ParameterDomainError(f"Shape fit needs at least {MIN_FIT_POINTS} points, window has {count}.")
    x = V_tilde.grid.x[mask]
    V = V_tilde.values[mask]
    zeros, ones = np.zeros(count), np.ones(count)
    # Columns: delta~, lambda~, c.
    design = np.concatenate(
        [
            np.stack([ones, zeros, ones], axis=-1),
            np.stack([-ones, zeros, ones], axis=-1),
            np.stack([zeros, x / SQRT2, zeros], axis=-1),
            np.stack([zeros, x / SQRT2, zeros], axis=-1),
        ]
    )
    target = np.concatenate(
        [
            V[:, 0, 0].real - 0.5 * (x**2 + 1.0),
            V[:, 1, 1].real - 0.5 * (x**2 - 1.0),
            V[:, 0, 1].real,
            V[:, 1, 0].real,
        ]
    )
    solution, *_ = np.linalg.lstsq(design, target, rcond=None)
    deviation = np.abs(design @ solution - target)
    imaginary = np.abs(V.imag).max() if np.iscomplexobj(V) else 0.0
    residual = float(max(deviation.max(), imaginary))
    fit = ShapeFit(
        delta_fit=float(solution[0]),
        lambda_fit=float(solution[1]),
        const_fit=float(solution[2]),
        residual=residual,
        threshold=threshold,
        points_used=count,
    )
    if not fit.is_shape_invariant:
        logger.warning(f"Partner potential is not of JC shape (residual {residual:.3e} > {threshold:.1e}).")
    return fit


def apply_grid_intertwiner(W: MatrixField, psi: SpinorGridFn, sign: float = 1.0, derivative: DerivativeMode = "auto") -> SpinorGridFn:
    """sign*(d/dx - W) psi / sqrt2 on the grid; points outside W.mask are zero."""
    if W.grid != psi.grid:
        raise DimensionMismatchError("W and psi live on different grids.")
    d_psi = _derivative_samples(psi, derivative)
    result = sign * (d_psi - np.einsum("pij,pj->pi", W.values, psi.stacked)) / SQRT2
    result[~W.mask] = 0.0
    return SpinorGridFn(grid=psi.grid, upper=result[:, 0], lower=result[:, 1])


def _ladder(ladder: str, values: np.ndarray, d_values: np.ndarray, x: np.ndarray) -> np.ndarray:
    if ladder == "plus":
        return (-d_values + x * values) / SQRT2
    return (d_values + x * values) / SQRT2


def apply_fock_form_on_grid(form: OperatorForm, psi: SpinorGridFn, derivative: DerivativeMode = "auto") -> SpinorGridFn:
    """
    Symbolic intertwiner applied through a^(+-) = (-+d/dx + x)/sqrt2.

    The endpoint samples are zero when central differences are used.
    """
    x = psi.grid.x
    d_psi = _derivative_samples(psi, derivative)
    upper = form.upper[0] * _ladder(form.upper[1], psi.upper, d_psi[:, 0], x) + form.c12 * psi.lower
    lower = form.c21 * psi.upper + form.lower[0] * _ladder(form.lower[1], psi.lower, d_psi[:, 1], x)
    return SpinorGridFn(grid=psi.grid, upper=upper, lower=lower)


def seed_pair(kind: IntertwinerKind, params: JCParams, grid: GridAxis) -> Tuple[SpinorGridFn, SpinorGridFn]:
    first, second = SEED_PAIRS[kind.tag]
    source = source_params(kind, params)
    return sample_eigenfunction(first, source, grid), sample_eigenfunction(second, source, grid)


def grid_seed_annihilation(kind: IntertwinerKind, params: JCParams, grid: GridAxis, window: float = 4.0) -> List[Tuple[BranchLabel, float]]:
    """
    Sup norm of L applied to each seed on |x| <= window, using exact ladder derivatives.

    Covers the nonphysical seeds of L1, L2 and Lk as well as the physical ones.
    """
    source = source_params(kind, params)
    form, _ = operator_form(kind, source)
    mask = grid.window(window)
    results = []
    for label, seed in zip(SEED_PAIRS[kind.tag], seed_pair(kind, params, grid)):
        image = apply_fock_form_on_grid(form, seed, derivative="analytic").stacked
        residual = float(np.max(np.linalg.norm(image[mask], axis=-1)))
        logger.debug(f"{kind} on {label} (grid): residual {residual:.3e}")
        results.append((label, residual))
    return results


def expected_W(form: OperatorForm, grid: GridAxis) -> np.ndarray:
    """W of the differential realization of a symbolic form, L = s (d/dx - W)/sqrt2."""
    x = grid.x
    sign = form.grid_sign
    values = np.zeros((grid.points, 2, 2))
    values[:, 0, 0] = -sign * form.upper[0] * x
    values[:, 1, 1] = -sign * form.lower[0] * x
    values[:, 0, 1] = -sign * SQRT2 * form.c12
    values[:, 1, 0] = -sign * SQRT2 * form.c21
    return values


def predicted_fit(kind: IntertwinerKind, params: JCParams) -> Tuple[float, float, float]:
    """
    Closed-form (delta~, lambda~, c) of the partner potential relative to H_JC(source).

    L0 lands on the anti-JC potential, which reads as the JC template with delta - 1 and -lambda.
    """
    source = source_params(kind, params)
    delta, lam = source.delta, source.lam
    if kind.tag == "L0":
        return delta - 1.0, -lam, 0.0
    if kind.tag in ("L1", "L2", "Lk"):
        require_detuned_constants(source)
        root = math.sqrt(max(delta**2 - lam**2, 0.0))
        return (-root if kind.tag == "L2" else root), lam, -1.0
    root = math.sqrt(delta**2 + lam**2)
    return (-root if kind.tag == "L4" else root), lam, 1.0


def darboux_from_kind(
    kind: IntertwinerKind,
    params: JCParams,
    grid: GridAxis,
    derivative: DerivativeMode = "analytic",
    half_width: Optional[float] = 4.0,
    threshold: float = FIT_THRESHOLD,
) -> DarbouxResult:
    """
    Run the seed pair of an intertwiner kind through the full Darboux pipeline.

    :param kind: Intertwiner kind selecting the seed pair.
    :param params: Source parameters (only lambda for Lk).
    :param grid: Sampling grid.
    :param derivative: "analytic" or "central" seed derivatives.
    :param half_width: Window for the W error and the fit.
    :param threshold: Shape-invariance threshold.
    :return: DarbouxResult with the fit and the sup error of W against its closed form.
    """
    source = source_params(kind, params)
    form, _ = operator_form(kind, source)
    seed1, seed2 = seed_pair(kind, params, grid)
    M = build_M(seed1, seed2, derivative)
    W = build_W(M)
    dV = delta_V(W, source.lam)
    V_tilde = MatrixField(grid=grid, values=potential(source, grid).values + dV.values, mask=dV.mask)
    fit = fit_shape(V_tilde, half_width, threshold)
    window = W.mask & grid.window(half_width)
    w_error = float(np.max(np.abs(W.values[window] - expected_W(form, grid)[window])))
    logger.info(
        f"Darboux {kind}: W error {w_error:.3e}, fit delta~={fit.delta_fit:.8f}, "
        f"lambda~={fit.lambda_fit:.8f}, c={fit.const_fit:.8f}"
    )
    return DarbouxResult(
        kind=str(kind),
        seeds=tuple(str(label) for label in SEED_PAIRS[kind.tag]),
        M=M,
        W=W,
        delta_V=dV,
        V_tilde=V_tilde,
        fit=fit,
        predicted=predicted_fit(kind, params),
        w_error=w_error,
    )
