import math

import numpy as np
import pytest

from src.core.hamiltonians import build_jc
from src.core.spectra import (
    analytic_nonphysical_spectrum,
    analytic_physical_spectrum,
    level_energy,
    nonphysical_coefficients,
    numeric_spectrum,
    reconcile,
)
from src.models.errors import NonHermitianError, ParameterDomainError
from src.models.operator_models import FockTruncation, JCParams
from src.models.spectrum_models import BranchLabel

TOL = 1e-12
TOL_RECONCILE = 1e-9

PARAMS = JCParams(delta=3.0, lam=1.25)


def assert_allclose(arr1, arr2, atol=TOL):
    np.testing.assert_allclose(arr1, arr2, rtol=0.0, atol=atol)


def test_first_physical_levels():
    pairs = analytic_physical_spectrum(PARAMS, 2)
    energies = {(p.label.n, p.label.sign): p.energy for p in pairs}
    assert energies[(0, "single")] == pytest.approx(-3.0)
    assert energies[(1, "+")] == pytest.approx(4.25)
    assert energies[(1, "-")] == pytest.approx(-2.25)
    assert energies[(2, "+")] == pytest.approx(2 + math.sqrt(9 + 2 * 1.5625))


def test_physical_states_are_eigenvectors():
    trunc = FockTruncation(n_max=10)
    H = build_jc(PARAMS, trunc)
    for pair in analytic_physical_spectrum(PARAMS, 8, trunc):
        vector = pair.state.vector
        assert np.linalg.norm(vector) == pytest.approx(1.0)
        assert_allclose(H @ vector, pair.energy * vector, atol=1e-12)


def test_reconcile_default_truncation():
    trunc = FockTruncation(n_max=40)
    numeric = numeric_spectrum(build_jc(PARAMS, trunc))
    report = reconcile(analytic_physical_spectrum(PARAMS, trunc.n_max), numeric, PARAMS, trunc, TOL_RECONCILE)
    assert report.ok
    assert len(report.matched) == 81
    assert report.spurious[0] == pytest.approx(44.0)
    assert max(level.delta_abs for level in report.matched) <= TOL_RECONCILE


def test_reconcile_reports_unmatched_and_missing():
    trunc = FockTruncation(n_max=6)
    numeric = list(numeric_spectrum(build_jc(PARAMS, trunc)))
    analytic = analytic_physical_spectrum(PARAMS, trunc.n_max)
    report = reconcile(analytic, numeric[1:] + [100.0], PARAMS, trunc, TOL_RECONCILE)
    assert not report.ok
    assert report.missing[0].label.n == 0
    assert report.unmatched == [100.0]


def test_uncoupled_degenerate_spectrum():
    params = JCParams(delta=0.0, lam=0.0)
    trunc = FockTruncation(n_max=3)
    numeric = numeric_spectrum(build_jc(params, trunc))
    report = reconcile(analytic_physical_spectrum(params, 3), numeric, params, trunc, TOL_RECONCILE)
    assert report.ok
    assert sorted(level.energy for level in report.matched) == [0, 1, 1, 2, 2, 3, 3]
    with pytest.raises(ParameterDomainError):
        analytic_nonphysical_spectrum(params)


def test_nonphysical_census():
    pairs = analytic_nonphysical_spectrum(PARAMS)
    assert len(pairs) == 11
    assert pairs[0].energy == pytest.approx(3.0)
    assert max(p.label.n for p in pairs) == 5
    assert all(p.label.physicality == "nonphysical" for p in pairs)


def test_nonphysical_double_root():
    pairs = analytic_nonphysical_spectrum(JCParams(delta=3.0, lam=1.0))
    assert len(pairs) == 18
    last = pairs[-1]
    assert last.double_root
    assert last.label.n == 9
    assert last.energy == pytest.approx(-9.0)


def test_nonphysical_coefficients_solve_block():
    for n in range(1, 6):
        block = np.array([[PARAMS.delta - n, PARAMS.lam * math.sqrt(n)], [-PARAMS.lam * math.sqrt(n), -n - PARAMS.delta]])
        for sign in ("+", "-"):
            c = nonphysical_coefficients(PARAMS, n, sign)
            energy = level_energy(PARAMS, BranchLabel(n=n, sign=sign, physicality="nonphysical"))
            assert_allclose(block @ c, energy * c)


def test_block_trace_and_determinant():
    rng = np.random.default_rng(7)
    for _ in range(200):
        params = JCParams(delta=rng.uniform(-5, 5), lam=rng.uniform(-3, 3))
        n = int(rng.integers(1, 21))
        plus = level_energy(params, BranchLabel(n=n, sign="+"))
        minus = level_energy(params, BranchLabel(n=n, sign="-"))
        assert plus + minus == pytest.approx(2 * n, abs=1e-10)
        determinant = n * n - params.delta**2 - n * params.lam**2
        assert plus * minus == pytest.approx(determinant, abs=1e-9)


def test_level_energy_domain():
    with pytest.raises(ParameterDomainError):
        level_energy(PARAMS, BranchLabel(n=6, sign="+", physicality="nonphysical"))
    assert level_energy(PARAMS, BranchLabel(n=0, sign="single", physicality="nonphysical")) == pytest.approx(3.0)


def test_numeric_spectrum_rejects_non_hermitian():
    with pytest.raises(NonHermitianError):
        numeric_spectrum(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(NonHermitianError):
        numeric_spectrum(np.zeros((2, 3)))
