import logging
import math
from typing import List, Literal, Optional, Tuple

import numpy as np

from src.core.hamiltonians import build_dirac_ho, build_jc, equivalence_transform
from src.core.intertwiners import DEFAULT_GUARD, build_intertwiner, excitation_number, intertwine_residual
from src.core.spectra import analytic_nonphysical_spectrum, analytic_physical_spectrum, level_energy
from src.models.errors import ParameterDomainError
from src.models.operator_models import FockTruncation, JCParams
from src.models.spectrum_models import BranchLabel, EigenPair
from src.models.susy_models import (
    HierarchyNode,
    HierarchySequence,
    HierarchyStep,
    IntertwinerKind,
    ResonantChain,
    SpectralLedger,
)
from src.utils.operator_utils import OperatorUtils

logger = logging.getLogger(__name__)

LEDGER_TOL = 1e-9
BOUNDARY_TOL = 1e-12

SequenceKind = Literal["JC", "aJC"]
UPWARD = {"JC": "L1", "aJC": "L2"}
DOWNWARD = {"JC": "L3", "aJC": "L4"}


def reality_limit(params: JCParams) -> int:
    """Largest n with delta^2 >= n lambda^2; an exact integer ratio lands on the resonant node."""
    params.require_coupling()
    ratio = params.delta**2 / params.lam**2
    return int(math.floor(ratio + BOUNDARY_TOL * max(ratio, 1.0)))


def node_params(params: JCParams, index: int, kind: SequenceKind = "JC") -> JCParams:
    """
    Closed-form parameters of node n: detuning sqrt(delta^2 - n lambda^2), signed by the sequence kind.

    JC node 0 is the starting point as given; anti-JC node 0 is H_aJC(delta), stored as H_JC(-|delta|).
    """
    if index == 0:
        return params if kind == "JC" else params.with_delta(-abs(params.delta))
    radicand = params.delta**2 - index * params.lam**2
    if radicand < -BOUNDARY_TOL * max(params.delta**2, params.lam**2):
        raise ParameterDomainError(
            f"Node {index} needs delta^2 >= {index} lambda^2 (delta={params.delta}, lambda={params.lam})."
        )
    sign = 1.0 if kind == "JC" else -1.0
    return params.with_delta(sign * math.sqrt(max(radicand, 0.0)))


def build_sequence(params: JCParams, kind: SequenceKind = "JC", steps_up: int = 0, steps_down: int = 0) -> HierarchySequence:
    """
    SUSY sequence H^(n) = H_JC(delta_n) - n around the given parameters.

    Upward steps use L1 (L2 for the anti-JC sequence) and stop at the reality boundary;
    downward steps use L3 (L4) and always exist.

    :param params: Starting node parameters.
    :param kind: "JC" or "aJC" (negative detunings on every node).
    :param steps_up: Requested number of upward steps.
    :param steps_down: Requested number of downward steps.
    :return: Nodes ordered by index, the steps between them and the boundary marker.
    """
    if steps_up < 0 or steps_down < 0:
        raise ParameterDomainError("Step counts must be non-negative.")
    limit = reality_limit(params)
    top = min(steps_up, limit)
    boundary_index = limit + 1 if steps_up > limit else None
    if boundary_index is not None:
        logger.warning(f"Sequence truncated at n={top}: node {boundary_index} would need a complex detuning.")

    nodes = [
        HierarchyNode(index=n, params=node_params(params, n, kind), shift=float(-n), kind=kind)
        for n in range(-steps_down, top + 1)
    ]
    by_index = {node.index: node for node in nodes}
    steps: List[HierarchyStep] = []
    for n in range(0, top):
        steps.append(
            HierarchyStep(
                source_index=n,
                target_index=n + 1,
                kind=IntertwinerKind(tag=UPWARD[kind]),
                source_params=by_index[n].params,
            )
        )
    for n in range(0, -steps_down, -1):
        steps.append(
            HierarchyStep(
                source_index=n,
                target_index=n - 1,
                kind=IntertwinerKind(tag=DOWNWARD[kind]),
                source_params=by_index[n].params,
            )
        )
    logger.info(f"Built {kind} sequence with nodes {nodes[0].index}..{nodes[-1].index}")
    return HierarchySequence(nodes=nodes, steps=steps, boundary_index=boundary_index)


def node_hamiltonian(node: HierarchyNode, trunc: FockTruncation) -> np.ndarray:
    return build_jc(node.params, trunc) + node.shift * np.eye(trunc.dim)


def present_ajc(node: HierarchyNode, trunc: FockTruncation) -> np.ndarray:
    """
    sigma_y presentation of a node: H_JC(-d) + c becomes H_aJC(d) + c.

    Same spectrum as node_hamiltonian; for anti-JC sequence nodes this is the anti-JC block form.
    """
    return equivalence_transform(build_jc(node.params, trunc), "sigma_y") + node.shift * np.eye(trunc.dim)


def _shifted(pairs: List[EigenPair], shift: float) -> List[EigenPair]:
    return [pair.model_copy(update={"energy": pair.energy + shift}) for pair in pairs]


def node_spectrum(node: HierarchyNode, n_cut: int) -> List[EigenPair]:
    """Physical levels of a node up to block n_cut, additive shift included."""
    return _shifted(analytic_physical_spectrum(node.params, n_cut), node.shift)


def node_nonphysical_spectrum(node: HierarchyNode) -> List[EigenPair]:
    return _shifted(analytic_nonphysical_spectrum(node.params), node.shift)


def _multiset_difference(left: List[float], right: List[float], tol: float) -> Tuple[List[float], List[float], int]:
    """(only in left, only in right, matched) for two sorted value lists."""
    only_left, only_right = [], []
    matched = i = j = 0
    while i < len(left) and j < len(right):
        if abs(left[i] - right[j]) <= tol:
            matched += 1
            i += 1
            j += 1
        elif left[i] < right[j]:
            only_left.append(left[i])
            i += 1
        else:
            only_right.append(right[j])
            j += 1
    only_left.extend(left[i:])
    only_right.extend(right[j:])
    return only_left, only_right, matched


def _blocks_clearing(node: HierarchyNode, ceiling: float, n_cut: int) -> int:
    """Smallest block index >= n_cut past which every physical level of the node lies above the ceiling."""

    def lowest(n: int) -> float:
        return level_energy(node.params, BranchLabel(n=n, sign="-")) + node.shift

    # n - sqrt(delta^2 + n lambda^2) is convex in n, so once it rises above the ceiling it stays there.
    blocks = max(n_cut, 1)
    while not (lowest(blocks) > ceiling and lowest(blocks + 1) >= lowest(blocks)):
        blocks += 1
    return blocks


def ledger(node: HierarchyNode, node_next: HierarchyNode, n_cut: int, ceiling: Optional[float] = None) -> SpectralLedger:
    """
    Levels gained and lost between adjacent nodes, below an energy ceiling.

    :param node: Source node.
    :param node_next: Adjacent node (index differing by one, same sequence kind).
    :param n_cut: Smallest block index generated; extended until both spectra clear the ceiling.
    :param ceiling: Energy ceiling, n_cut/2 by default.
    :return: SpectralLedger; an upward step gains two levels, a downward step loses two.
    """
    if abs(node.index - node_next.index) != 1 or node.kind != node_next.kind:
        raise ParameterDomainError(f"Nodes {node.index} and {node_next.index} are not adjacent in one sequence.")
    ceiling = n_cut / 2.0 if ceiling is None else ceiling
    blocks = max(_blocks_clearing(node, ceiling, n_cut), _blocks_clearing(node_next, ceiling, n_cut))
    source = sorted(p.energy for p in node_spectrum(node, blocks) if p.energy <= ceiling)
    target = sorted(p.energy for p in node_spectrum(node_next, blocks) if p.energy <= ceiling)
    lost, gained, matched = _multiset_difference(source, target, LEDGER_TOL)
    logger.debug(f"Ledger {node.index}->{node_next.index}: +{len(gained)} -{len(lost)} ({matched} matched)")
    return SpectralLedger(
        step=(node.index, node_next.index),
        gained=gained,
        lost=lost,
        matched_count=matched,
        ceiling=ceiling,
    )


def branch_ordering(params: JCParams, n_cut: int) -> List[Tuple[int, str]]:
    """
    Check that nodes -1, 0 and 1 of the JC sequence are decreasing branch by branch.

    :return: (n, branch) pairs where the ordering fails; empty when it holds.
    """
    sequence = build_sequence(params, "JC", steps_up=1, steps_down=1)
    if sequence.boundary_reached:
        raise ParameterDomainError("Branch ordering needs node 1, i.e. delta^2 >= lambda^2.")
    spectra = [
        {(p.label.n, p.label.sign): p.energy for p in node_spectrum(sequence.node(index), n_cut)}
        for index in (-1, 0, 1)
    ]
    violations = []
    for key in spectra[1]:
        above, middle, below = (spectrum[key] for spectrum in spectra)
        if not above > middle > below:
            violations.append(key)
    if violations:
        logger.warning(f"Branch ordering fails at {violations[:5]}")
    return violations


def resonant_node(k: int, lam: float, sign: int = 1) -> HierarchyNode:
    """H_JC^k = H_JC(sign*lambda*sqrt(k)) + k."""
    if k < 0:
        raise ParameterDomainError("Resonant index k must be non-negative.")
    return HierarchyNode(
        index=k,
        params=JCParams(delta=sign * lam * math.sqrt(k), lam=lam),
        shift=float(k),
        kind="JC" if sign > 0 else "aJC",
    )


def resonant_sequence(k_max: int, lam: float, trunc: FockTruncation, guard: int = DEFAULT_GUARD, sign: int = 1) -> ResonantChain:
    """
    Resonant hierarchy H^k_max -> ... -> H^0 with the intertwiner of every step verified.

    sign=+1 uses Lk; sign=-1 builds the anti-JC chain (negative detunings) linked by L2.

    :param k_max: Top index, >= 1.
    :param lam: Coupling, non-zero.
    :param trunc: Fock truncation for the residuals.
    :param guard: Guard band of the residual norms.
    :param sign: +1 or -1.
    :return: Nodes k_max..0, the k_max intertwiners and their guarded residuals.
    """
    if k_max < 1:
        raise ParameterDomainError("k_max must be >= 1.")
    if sign not in (1, -1):
        raise ParameterDomainError("sign must be +1 or -1.")
    if lam == 0:
        raise ParameterDomainError("lambda must be non-zero for this construction.")

    nodes = [resonant_node(k, lam, sign) for k in range(k_max, -1, -1)]
    intertwiners, residuals = [], []
    for node, node_next in zip(nodes, nodes[1:]):
        if sign > 0:
            L = build_intertwiner(IntertwinerKind(tag="Lk", k=node.index), node.params, trunc)
        else:
            L = build_intertwiner(IntertwinerKind(tag="L2"), node.params, trunc)
        residual = intertwine_residual(L, node_hamiltonian(node, trunc), node_hamiltonian(node_next, trunc), guard)
        intertwiners.append(L)
        residuals.append(residual)
        logger.debug(f"Resonant step {node.index}->{node_next.index}: residual {residual:.3e}")
    logger.info(f"Resonant chain k={k_max}..0 (sign {sign:+d}): max residual {max(residuals):.3e}")
    return ResonantChain(nodes=nodes, intertwiners=intertwiners, residuals=residuals, guard=guard)


def count_levels_below(node: HierarchyNode, ceiling: float, n_cut: int) -> int:
    """Number of physical levels of a node strictly below the energy ceiling."""
    blocks = _blocks_clearing(node, ceiling, n_cut)
    return sum(1 for pair in node_spectrum(node, blocks) if pair.energy < ceiling)


def dirac_square_check(k: int, trunc: FockTruncation, guard: int = DEFAULT_GUARD) -> float:
    """
    Guarded norm of (H_HO^k)^2 - N_e - k.

    :param k: Dirac index, >= 0.
    :param trunc: Fock truncation.
    :param guard: Excluded top photon levels.
    :return: Residual, rounding-level when the square root relation holds.
    """
    H = build_dirac_ho(k, trunc)
    difference = H @ H - excitation_number(trunc) - k * np.eye(trunc.dim)
    return OperatorUtils.guarded_norm(difference, trunc, guard)
