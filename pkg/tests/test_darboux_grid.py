import math

import numpy as np
import pytest

from src.core.darboux_grid import (
    PHI_0,
    PSI_0,
    apply_fock_form_on_grid,
    apply_grid_intertwiner,
    build_M,
    build_W,
    darboux_from_kind,
    delta_V,
    eigen_residual,
    expected_W,
    fit_shape,
    grid_seed_annihilation,
    partner_potential,
    potential,
    sample_eigenfunction,
    sample_fock_state,
)
from src.core.intertwiners import build_intertwiner, operator_form
from src.core.spectra import analytic_physical_spectrum
from src.models.errors import ParameterDomainError, SingularSeedMatrixError
from src.models.grid_models import SpinorGridFn
from src.models.operator_models import FockTruncation, GridAxis, JCParams
from src.models.spectrum_models import BranchLabel
from src.models.susy_models import IntertwinerKind

TOL = 1e-12
TOL_W = 1e-8
TOL_FIT = 1e-5
TOL_SEED = 1e-6

PARAMS = JCParams(delta=3.0, lam=1.25)
GRID = GridAxis()

KINDS = [IntertwinerKind(tag=tag) for tag in ("L0", "L1", "L2", "L3", "L4")] + [IntertwinerKind(tag="Lk", k=4)]


def assert_allclose(arr1, arr2, atol=TOL):
    np.testing.assert_allclose(arr1, arr2, rtol=0.0, atol=atol)


def test_seed_samples():
    ground = sample_eigenfunction(PSI_0, PARAMS, GRID)
    assert_allclose(ground.upper, 0.0)
    assert ground.lower[GRID.points // 2].real == pytest.approx(math.pi**-0.25)

    phi = sample_eigenfunction(PHI_0, PARAMS, GRID)
    assert_allclose(phi.lower, 0.0)
    np.testing.assert_allclose(phi.upper.real, math.pi**-0.25 * np.exp(GRID.x**2 / 2), rtol=1e-12)

    with pytest.raises(ParameterDomainError):
        sample_eigenfunction(BranchLabel(n=6, sign="+", physicality="nonphysical"), PARAMS, GRID)


def test_l0_seed_matrix_determinant():
    M = build_M(sample_eigenfunction(PSI_0, PARAMS, GRID), sample_eigenfunction(PHI_0, PARAMS, GRID))
    assert_allclose(M.det.real, -1.0 / math.sqrt(math.pi))
    assert M.mask.sum() == GRID.points - 2


def test_proportional_seeds_raise():
    seed = sample_eigenfunction(BranchLabel(n=1, sign="+"), PARAMS, GRID)
    doubled = SpinorGridFn(grid=GRID, upper=2 * seed.upper, lower=2 * seed.lower)
    with pytest.raises(SingularSeedMatrixError):
        build_M(seed, doubled)


def test_l0_superpotential_and_partner():
    result = darboux_from_kind(IntertwinerKind(tag="L0"), PARAMS, GRID)
    assert result.w_error <= TOL_W
    window = result.W.mask & GRID.window(4.0)
    x = GRID.x[window]
    assert_allclose(result.W.m11[window].real, x, atol=TOL_W)
    assert_allclose(result.W.m22[window].real, -x, atol=TOL_W)

    dV = delta_V(result.W, PARAMS.lam)
    inner = dV.mask & GRID.window(4.0)
    assert_allclose(dV.m11[inner].real, -1.0, atol=TOL_W)
    assert_allclose(dV.m22[inner].real, 1.0, atol=TOL_W)
    assert_allclose(dV.m12[inner].real, -math.sqrt(2) * PARAMS.lam * GRID.x[inner], atol=TOL_W)

    partner = partner_potential(PARAMS, result.W)
    anti = potential(PARAMS, GRID, "AntiJC")
    assert_allclose(partner.values[inner].real, anti.values[inner], atol=TOL_W)


@pytest.mark.parametrize("kind", KINDS, ids=str)
def test_darboux_fit_matches_closed_form(kind):
    result = darboux_from_kind(kind, PARAMS, GRID)
    assert result.w_error <= TOL_W
    assert result.fit.is_shape_invariant
    fitted = (result.fit.delta_fit, result.fit.lambda_fit, result.fit.const_fit)
    assert_allclose(fitted, result.predicted, atol=TOL_FIT)


def test_template_fit_of_jc_potential():
    fit = fit_shape(potential(PARAMS, GRID), half_width=4.0)
    assert_allclose([fit.delta_fit, fit.lambda_fit, fit.const_fit], [3.0, 1.25, 0.0], atol=1e-10)
    assert fit.residual <= 1e-10
    with pytest.raises(ParameterDomainError):
        fit_shape(potential(PARAMS, GRID), half_width=0.05)


@pytest.mark.parametrize("kind", KINDS, ids=str)
def test_grid_seed_annihilation(kind):
    results = grid_seed_annihilation(kind, PARAMS, GRID)
    assert len(results) == 2
    assert max(residual for _, residual in results) <= TOL_SEED


@pytest.mark.parametrize(
    "tag, half_width",
    [("L0", 3.0), ("L1", 4.0), ("L2", 4.0), ("L3", 3.0), ("L4", 3.0)],
)
def test_central_differences_converge_quadratically(tag, half_width):
    kind = IntertwinerKind(tag=tag)
    coarse = darboux_from_kind(kind, PARAMS, GridAxis(points=1001), derivative="central", half_width=half_width)
    fine = darboux_from_kind(kind, PARAMS, GridAxis(points=2001), derivative="central", half_width=half_width)
    assert 3.2 <= coarse.w_error / fine.w_error <= 4.8


def test_eigen_residuals():
    h2 = GRID.spacing**2
    ground = sample_eigenfunction(PSI_0, PARAMS, GRID)
    assert eigen_residual(PARAMS, ground, -PARAMS.delta, half_width=4.0) <= h2
    phi = sample_eigenfunction(PHI_0, PARAMS, GRID)
    assert eigen_residual(PARAMS, phi, PARAMS.delta, half_width=4.0, relative=True) <= 100 * h2


def test_coarse_grid_warns(caplog):
    grid = GridAxis(points=21)
    eigen_residual(PARAMS, sample_eigenfunction(PSI_0, PARAMS, grid), -PARAMS.delta)
    assert "exceeds" in caplog.text


def test_grid_intertwiner_matches_symbolic_form():
    kind = IntertwinerKind(tag="L1")
    form, _ = operator_form(kind, PARAMS)
    result = darboux_from_kind(kind, PARAMS, GRID)
    psi = sample_eigenfunction(BranchLabel(n=2, sign="+"), PARAMS, GRID)
    through_W = apply_grid_intertwiner(result.W, psi, form.grid_sign).stacked
    through_form = apply_fock_form_on_grid(form, psi).stacked
    window = result.W.mask & GRID.window(4.0)
    assert_allclose(result.W.values[window].real, expected_W(form, GRID)[window], atol=TOL_W)
    assert_allclose(through_W[window], through_form[window], atol=TOL_W)


def test_fock_matrix_agrees_with_grid_ladders():
    trunc = FockTruncation(n_max=20)
    L = build_intertwiner(IntertwinerKind(tag="L3"), PARAMS, trunc)
    state = {(p.label.n, p.label.sign): p for p in analytic_physical_spectrum(PARAMS, 5, trunc)}[(3, "+")].state
    image = state.from_vector(L.matrix @ state.vector)
    on_grid = apply_fock_form_on_grid(L.form, sample_fock_state(state, GRID)).stacked
    assert_allclose(on_grid, sample_fock_state(image, GRID).stacked, atol=1e-10)


def test_grid_mismatch_and_singular_fraction():
    seeds = (sample_eigenfunction(PSI_0, PARAMS, GRID), sample_eigenfunction(PHI_0, PARAMS, GRID))
    M = build_M(*seeds)
    broken = M.model_copy(update={"mask": np.zeros(GRID.points, dtype=bool)})
    with pytest.raises(SingularSeedMatrixError):
        build_W(broken)
