import math

import numpy as np
import pytest

from src.core.hamiltonians import (
    block_projector,
    build_ajc,
    build_dirac_ho,
    build_jc,
    build_model,
    build_resonant,
    equivalence_transform,
    reduce_params,
    spurious_level,
)
from src.core.spectra import numeric_spectrum
from src.models.errors import ParameterDomainError
from src.models.operator_models import FockTruncation, JCParams, ModelKind, RawParams

TOL = 1e-12

PARAMS = JCParams(delta=3.0, lam=1.25)
TRUNC = FockTruncation(n_max=12)


def assert_allclose(arr1, arr2, atol=TOL):
    np.testing.assert_allclose(arr1, arr2, rtol=0.0, atol=atol)


def test_reduce_params():
    params = reduce_params(RawParams(omega0=7.0, omega=1.0, mu=1.25))
    assert params.delta == pytest.approx(3.0)
    assert params.lam == pytest.approx(1.25)
    with pytest.raises(ValueError):
        RawParams(omega0=1.0, omega=0.0, mu=1.0)


@pytest.mark.parametrize("builder", [build_jc, build_ajc])
def test_hamiltonians_are_real_symmetric(builder):
    H = builder(PARAMS, TRUNC)
    assert H.shape == (TRUNC.dim, TRUNC.dim)
    assert_allclose(H, H.conj().T)


def test_truncation_edge_decouples():
    H = build_jc(PARAMS, TRUNC)
    edge = TRUNC.index("upper", TRUNC.n_max)
    assert H[edge, edge] == pytest.approx(TRUNC.n_max + 1 + PARAMS.delta)
    row = H[edge].copy()
    row[edge] = 0.0
    assert_allclose(row, 0.0)
    assert spurious_level(PARAMS, TRUNC) == pytest.approx(16.0)
    assert spurious_level(PARAMS, TRUNC, "AntiJC") == pytest.approx(10.0)


def test_sigma_y_maps_jc_to_anti_jc():
    mirrored = build_jc(PARAMS.with_delta(-PARAMS.delta), TRUNC)
    assert_allclose(equivalence_transform(mirrored, "sigma_y"), build_ajc(PARAMS, TRUNC))


def test_sigma_z_keeps_spectrum():
    H = build_jc(PARAMS, TRUNC)
    transformed = equivalence_transform(H, "sigma_z")
    assert_allclose(numeric_spectrum(transformed), numeric_spectrum(H), atol=1e-10)
    with pytest.raises(ParameterDomainError):
        equivalence_transform(H, "sigma_x")


def test_blocks_commute_with_jc():
    H = build_jc(PARAMS, TRUNC)
    for n in range(TRUNC.n_max + 1):
        P = block_projector(n, TRUNC)
        assert_allclose(P @ H - H @ P, 0.0)
    with pytest.raises(ParameterDomainError):
        block_projector(TRUNC.n_max + 1, TRUNC)


def test_resonant_ground_level():
    trunc = FockTruncation(n_max=30)
    H = build_resonant(9, 1.0, trunc)
    assert numeric_spectrum(H)[0] == pytest.approx(6.0, abs=1e-10)
    with pytest.raises(ParameterDomainError):
        build_resonant(-1, 1.0, trunc)


def test_dirac_ho_and_dispatch():
    H = build_dirac_ho(4, TRUNC)
    assert_allclose(H, H.T)
    assert H[0, 0] == pytest.approx(2.0)
    assert_allclose(build_model(ModelKind(tag="DiracHO", k=4), PARAMS, TRUNC), H)
    assert_allclose(build_model(ModelKind(tag="AntiJC"), PARAMS, TRUNC), build_ajc(PARAMS, TRUNC))
    resonant = build_model(ModelKind(tag="ResonantJC", k=4), PARAMS, TRUNC)
    expected = build_jc(JCParams(delta=2 * PARAMS.lam, lam=PARAMS.lam), TRUNC) + 4 * np.eye(TRUNC.dim)
    assert_allclose(resonant, expected)
    assert math.isclose(H[TRUNC.fock_dim, TRUNC.fock_dim].real, -2.0)
