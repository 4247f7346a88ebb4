import math

import numpy as np
import pytest

from src.core.hamiltonians import build_ajc, build_jc
from src.core.hierarchy import (
    branch_ordering,
    build_sequence,
    count_levels_below,
    dirac_square_check,
    ledger,
    node_hamiltonian,
    node_nonphysical_spectrum,
    node_params,
    present_ajc,
    reality_limit,
    resonant_node,
    resonant_sequence,
)
from src.core.intertwiners import build_intertwiner
from src.core.spectra import numeric_spectrum
from src.models.errors import ParameterDomainError
from src.models.operator_models import FockTruncation, JCParams
from src.models.susy_models import IntertwinerKind

TOL = 1e-12
TOL_LEDGER = 1e-9
TOL_CHAIN = 1e-12

PARAMS = JCParams(delta=3.0, lam=1.25)


def assert_allclose(arr1, arr2, atol=TOL):
    np.testing.assert_allclose(arr1, arr2, rtol=0.0, atol=atol)


def test_sequence_stops_at_reality_boundary(caplog):
    assert reality_limit(PARAMS) == 5
    sequence = build_sequence(PARAMS, steps_up=10)
    assert [node.index for node in sequence.nodes] == [0, 1, 2, 3, 4, 5]
    assert sequence.boundary_index == 6
    assert sequence.boundary_reached
    assert "complex detuning" in caplog.text
    assert len(sequence.steps) == 5
    assert all(step.kind.tag == "L1" for step in sequence.steps)


def test_sequence_node_parameters():
    sequence = build_sequence(PARAMS, steps_up=1, steps_down=1)
    assert not sequence.boundary_reached
    up, down = sequence.node(1), sequence.node(-1)
    assert up.params.delta == pytest.approx(2.7271777, abs=1e-7)
    assert up.shift == -1.0
    assert down.params.delta == pytest.approx(3.25, abs=TOL)
    assert down.shift == 1.0
    kinds = {(step.source_index, step.target_index): step.kind.tag for step in sequence.steps}
    assert kinds == {(0, 1): "L1", (0, -1): "L3"}


def test_anti_jc_sequence_signs():
    sequence = build_sequence(PARAMS, "aJC", steps_up=2, steps_down=1)
    assert sequence.node(0).params.delta == pytest.approx(-3.0)
    assert sequence.node(1).params.delta == pytest.approx(-2.7271777, abs=1e-7)
    assert sequence.node(-1).params.delta == pytest.approx(-3.25)
    assert {step.kind.tag for step in sequence.steps} == {"L2", "L4"}


@pytest.mark.parametrize("index", [-1, 0, 1, 2, 3, 4, 5])
def test_anti_jc_nodes_are_sigma_y_equivalent(index):
    trunc = FockTruncation(n_max=40)
    jc = build_sequence(PARAMS, "JC", steps_up=5, steps_down=1).node(index)
    anti = build_sequence(PARAMS, "aJC", steps_up=5, steps_down=1).node(index)
    assert anti.shift == jc.shift
    shift = jc.shift * np.eye(trunc.dim)
    assert_allclose(present_ajc(anti, trunc), build_ajc(jc.params, trunc) + shift)
    mirrored = build_jc(jc.params.with_delta(-jc.params.delta), trunc) + shift
    assert_allclose(numeric_spectrum(node_hamiltonian(anti, trunc)), numeric_spectrum(mirrored), atol=1e-10)
    assert_allclose(numeric_spectrum(present_ajc(anti, trunc)), numeric_spectrum(mirrored), atol=1e-10)


def test_anti_jc_steps_start_from_mirrored_node():
    sequence = build_sequence(JCParams(delta=-3.0, lam=1.25), "aJC", steps_up=1, steps_down=1)
    sources = {step.target_index: step.source_params.delta for step in sequence.steps}
    assert sources == {1: -3.0, -1: -3.0}
    up = build_intertwiner(IntertwinerKind(tag="L2"), sequence.node(0).params, FockTruncation(n_max=4))
    assert up.target.delta == pytest.approx(sequence.node(1).params.delta, abs=TOL)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_node_parameters_compose(n):
    source = node_params(PARAMS, n)
    L1 = build_intertwiner(IntertwinerKind(tag="L1"), source, FockTruncation(n_max=4))
    assert L1.target.delta == pytest.approx(node_params(PARAMS, n + 1).delta, abs=TOL)
    with pytest.raises(ParameterDomainError):
        node_params(PARAMS, 6)


def test_ledger_upward_step_gains_two_levels():
    sequence = build_sequence(PARAMS, steps_up=1, steps_down=1)
    step = ledger(sequence.node(0), sequence.node(1), n_cut=20)
    assert step.lost == []
    assert_allclose(step.gained, [-3.7271777, 3.0], atol=1e-7)
    assert step.ceiling == 10.0


def test_ledger_downward_step_loses_two_levels():
    sequence = build_sequence(PARAMS, steps_up=1, steps_down=1)
    step = ledger(sequence.node(0), sequence.node(-1), n_cut=20)
    assert step.gained == []
    assert_allclose(step.lost, [-3.0, 4.25], atol=TOL_LEDGER)


def test_ledger_at_strong_coupling_reaches_the_ceiling():
    sequence = build_sequence(JCParams(delta=6.0, lam=5.0), steps_up=1, steps_down=1)
    up = ledger(sequence.node(0), sequence.node(1), n_cut=40)
    assert up.lost == []
    assert_allclose(up.gained, [-1.0 - math.sqrt(11.0), 6.0], atol=TOL_LEDGER)
    down = ledger(sequence.node(0), sequence.node(-1), n_cut=40)
    assert down.gained == []
    assert len(down.lost) == 2
    assert count_levels_below(sequence.node(0), 20.0, 40) == count_levels_below(sequence.node(1), 20.0, 40) - 2


def test_ledger_requires_adjacent_nodes():
    sequence = build_sequence(PARAMS, steps_up=2)
    with pytest.raises(ParameterDomainError):
        ledger(sequence.node(0), sequence.node(2), n_cut=20)


def test_branch_ordering_holds():
    assert branch_ordering(PARAMS, 20) == []
    with pytest.raises(ParameterDomainError):
        branch_ordering(JCParams(delta=1.0, lam=2.0), 20)


def test_present_ajc():
    trunc = FockTruncation(n_max=12)
    sequence = build_sequence(PARAMS, "aJC", steps_up=1)
    node = sequence.node(1)
    expected = build_ajc(node.params.with_delta(-node.params.delta), trunc) + node.shift * np.eye(trunc.dim)
    assert_allclose(present_ajc(node, trunc), expected)
    assert_allclose(numeric_spectrum(present_ajc(node, trunc)), numeric_spectrum(node_hamiltonian(node, trunc)), atol=1e-10)


def test_nonphysical_spectrum_is_shifted():
    node = build_sequence(PARAMS, steps_down=1).node(-1)
    pairs = node_nonphysical_spectrum(node)
    assert pairs[0].energy == pytest.approx(3.25 + 1.0)


def test_resonant_chain_residuals():
    chain = resonant_sequence(9, 1.0, FockTruncation(n_max=30))
    assert [node.index for node in chain.nodes] == list(range(9, -1, -1))
    assert len(chain.intertwiners) == 9
    assert chain.max_residual <= TOL_CHAIN
    assert chain.intertwiners[0].K == pytest.approx(3 - 2 * math.sqrt(2), abs=TOL)


def test_resonant_anti_jc_chain():
    chain = resonant_sequence(4, 0.5, FockTruncation(n_max=20), sign=-1)
    assert chain.nodes[0].params.delta == pytest.approx(-1.0)
    assert all(L.kind.tag == "L2" for L in chain.intertwiners)
    assert chain.max_residual <= TOL_CHAIN


def test_resonant_arguments():
    trunc = FockTruncation(n_max=10)
    with pytest.raises(ParameterDomainError):
        resonant_sequence(0, 1.0, trunc)
    with pytest.raises(ParameterDomainError):
        resonant_sequence(3, 1.0, trunc, sign=2)
    with pytest.raises(ParameterDomainError):
        resonant_sequence(3, 0.0, trunc)


@pytest.mark.parametrize("k", range(1, 10))
def test_resonant_census(k):
    bottom = resonant_node(0, 1.0)
    top = resonant_node(k, 1.0)
    assert count_levels_below(bottom, 15.0, 30) - count_levels_below(top, 15.0, 30) == 2 * k


@pytest.mark.parametrize("k", range(10))
def test_dirac_square(k):
    assert dirac_square_check(k, FockTruncation(n_max=30)) <= TOL
