import logging
import math
from typing import Any, Callable, Dict, List

import numpy as np
from pydantic import ValidationError

from src.core import darboux_grid, hierarchy, intertwiners, spectra
from src.core.hamiltonians import build_ajc, build_jc, equivalence_transform
from src.models.errors import ConfigError, JCSusyError, ParameterDomainError, StateAnnihilatedError
from src.models.operator_models import FockTruncation, GridAxis, JCParams
from src.models.run_models import RunConfig
from src.models.susy_models import IntertwinerKind
from src.transformers.figure_transformers import FigureTransformers
from src.utils.operator_utils import OperatorUtils

logger = logging.getLogger(__name__)

RECONCILE_TOL = 1e-9
FOCK_SEED_TOL = 1e-12
GRID_SEED_TOL = 1e-6
GRID_SEED_WINDOW = 4.0
W_TOL = 1e-8
PHYSICAL_C_MAX = 1.0
NONPHYSICAL_C_MAX = 100.0
CONVERGENCE_WINDOW = 3.0
CONVERGENCE_RATIO = (3.2, 4.8)
LEDGER_N_CUT_MIN = 20
TRANSPORT_BLOCKS = 10
RESONANT_K = 9
PROPERTY_DRAWS = 200
PROPERTY_BLOCKS = 20
PROPERTY_N_MAX = 10
RANDOM_SEED = 20240601
DOUBLE_ROOT_PARAMS = JCParams(delta=3.0, lam=1.0)
SAMPLE_STRIDE = 50


def _check(name: str, value: float, threshold: float, **extra: Any) -> Dict[str, Any]:
    passed = bool(np.isfinite(value) and value <= threshold)
    return {"check": name, "value": float(value), "threshold": threshold, "passed": passed, **extra}


def _status(checks: List[Dict[str, Any]]) -> str:
    return "ok" if all(check.get("passed", False) for check in checks) else "fail"


class JCToolkitService:
    def __init__(self, config: RunConfig):
        """
        Orchestrates the numerical modules for one configuration.

        :param config: Validated run configuration.
        """
        self.config = config
        self.params: JCParams = config.params
        self.trunc: FockTruncation = config.trunc
        self.grid: GridAxis = config.grid
        self.tol = config.tol_residual
        self.tol_grid = config.tol_grid
        self.figure_transformers = FigureTransformers()

        # Registered acceptance checks, run in order by verify().
        self.checks: List[Callable[[], List[Dict[str, Any]]]] = [
            self._check_spectrum_equality,
            self._check_nonphysical_census,
            self._check_intertwining,
            self._check_annihilation,
            self._check_symmetries,
            self._check_darboux,
            self._check_hierarchy,
            self._check_resonant,
            self._check_properties,
        ]

    def _document(self, command: str, results: List[Dict[str, Any]], residuals: Dict[str, Any], status: str) -> Dict[str, Any]:
        return {
            "command": command,
            "params": {
                "delta": self.params.delta,
                "lambda": self.params.lam,
                "n_max": self.trunc.n_max,
                "grid": [self.grid.x_min, self.grid.x_max, self.grid.points],
                "tolerances": dict(self.config.tolerances),
            },
            "results": results,
            "residuals": residuals,
            "status": status,
        }

    def spectrum(self, numeric: bool = False) -> Dict[str, Any]:
        """
        Analytic physical and nonphysical levels, optionally reconciled with the truncated matrix.

        :param numeric: Add the numeric eigenvalue and |difference| to each physical row.
        :return: Result document; status "fail" when reconciliation fails.
        """
        physical = spectra.analytic_physical_spectrum(self.params, self.trunc.n_max)
        if self.params.lam == 0:
            logger.info("lambda = 0: the nonphysical spectrum is not defined, skipping it.")
            nonphysical = []
        else:
            nonphysical = spectra.analytic_nonphysical_spectrum(self.params)

        rows = [self._level_row(pair) for pair in physical + nonphysical]
        residuals: Dict[str, Any] = {"physical_levels": len(physical), "nonphysical_levels": len(nonphysical)}
        status = "ok"
        if numeric:
            values = spectra.numeric_spectrum(build_jc(self.params, self.trunc))
            report = spectra.reconcile(physical, values, self.params, self.trunc, RECONCILE_TOL)
            by_label = {(m.label.n, m.label.sign): m for m in report.matched}
            for row, pair in zip(rows, physical):
                match = by_label.get((pair.label.n, pair.label.sign))
                row["numeric"] = values[match.numeric_index] if match else None
                row["delta_abs"] = match.delta_abs if match else None
            for value in report.spurious:
                rows.append(
                    {
                        "kind": "JC",
                        "n": self.trunc.n_max,
                        "branch": "single",
                        "physicality": "truncation",
                        "energy": report.predicted_spurious,
                        "numeric": value,
                        "delta_abs": abs(value - report.predicted_spurious),
                    }
                )
            residuals.update(
                {
                    "matched": len(report.matched),
                    "missing": len(report.missing),
                    "unmatched": len(report.unmatched),
                    "spurious": report.spurious,
                    "max_delta_abs": max((m.delta_abs for m in report.matched), default=0.0),
                }
            )
            status = "ok" if report.ok else "fail"
        return self._document("spectrum", rows, residuals, status)

    @staticmethod
    def _level_row(pair, kind: str = "JC") -> Dict[str, Any]:
        return {
            "kind": kind,
            "n": pair.label.n,
            "branch": pair.label.sign,
            "physicality": pair.label.physicality,
            "energy": pair.energy,
        }

    def partners(self, kind_tag: str, k: int = 1) -> Dict[str, Any]:
        """
        Build one intertwiner and run its residual checks.

        :param kind_tag: L0..L4 or Lk.
        :param k: Resonant index for Lk.
        :return: Result document with one row per quantity and per check.
        """
        kind = IntertwinerKind(tag=kind_tag, k=k if kind_tag == "Lk" else 0)
        L = intertwiners.build_intertwiner(kind, self.params, self.trunc)
        H_src = intertwiners.source_hamiltonian(L)
        H_tgt = intertwiners.target_hamiltonian(L)

        checks = [
            _check("intertwining", intertwiners.intertwine_residual(L, H_src, H_tgt), self.tol),
            _check("adjoint_intertwining", intertwiners.adjoint_residual(L, H_src, H_tgt), self.tol),
        ]
        checks.extend(self._seed_checks(kind))
        symmetry = intertwiners.symmetry_from(L)
        commutator, decomposition = intertwiners.symmetry_residuals(symmetry)
        checks.append(_check("symmetry_commutator", commutator, self.tol))
        checks.append(_check("symmetry_decomposition", decomposition, self.tol))
        partner = intertwiners.partner_symmetry(L)
        partner_commutator, _ = intertwiners.symmetry_residuals(partner, guard=3)
        checks.append(_check("partner_symmetry_commutator", partner_commutator, self.tol))
        checks.append(_check("eigenvalue_transport", self._transport_residual(L, H_tgt), self.tol))

        rows: List[Dict[str, Any]] = [
            {"quantity": "kind", "value": str(kind)},
            {"quantity": "K", "value": L.K},
            {"quantity": "target_delta", "value": L.target.delta},
            {"quantity": "target_lambda", "value": L.target.lam},
            {"quantity": "target_model", "value": L.target_model},
            {"quantity": "shift", "value": L.shift},
            {"quantity": "source_shift", "value": L.source_shift},
            {"quantity": "direction", "value": L.direction},
        ]
        rows.extend(
            {"quantity": c["check"], "value": c["value"], "threshold": c["threshold"], "passed": c["passed"]}
            for c in checks
        )
        status = _status(checks)
        logger.info(f"partners {kind}: {status}")
        return self._document("partners", rows, {c["check"]: c["value"] for c in checks}, status)

    def _seed_checks(self, kind: IntertwinerKind) -> List[Dict[str, Any]]:
        if kind.tag in intertwiners.FOCK_SEEDS:
            L = intertwiners.build_intertwiner(kind, self.params, self.trunc)
            seeds = intertwiners.seed_annihilation_check(L, self.params, self.trunc)
            return [_check(f"annihilates {label}", value, FOCK_SEED_TOL) for label, value in seeds]
        seeds = darboux_grid.grid_seed_annihilation(kind, self.params, self.grid, GRID_SEED_WINDOW)
        return [_check(f"annihilates {label} (grid)", value, GRID_SEED_TOL) for label, value in seeds]

    def _transport_residual(self, L, H_tgt: np.ndarray) -> float:
        """Largest ||H_tgt v - E v|| over mapped physical states of the low blocks."""
        worst = 0.0
        top = min(TRANSPORT_BLOCKS, self.trunc.n_max - 3)
        source = L.source
        for pair in spectra.analytic_physical_spectrum(source, top, self.trunc):
            try:
                image = intertwiners.map_state(L, pair)
            except StateAnnihilatedError:
                continue
            vector = image.state.vector
            worst = max(worst, float(np.linalg.norm(H_tgt @ vector - image.energy * vector)))
        return worst

    def hierarchy(self, steps_up: int = 0, steps_down: int = 0, kind: str = "JC") -> Dict[str, Any]:
        """
        Node table, per-step intertwining residuals and spectral ledgers of a SUSY sequence.
        """
        sequence = hierarchy.build_sequence(self.params, kind, steps_up, steps_down)
        n_cut = max(self.trunc.n_max, LEDGER_N_CUT_MIN)
        rows: List[Dict[str, Any]] = [
            {
                "record": "node",
                "index": node.index,
                "delta": node.params.delta,
                "lambda": node.params.lam,
                "shift": node.shift,
            }
            for node in sequence.nodes
        ]
        checks = []
        for step in sequence.steps:
            source, target = sequence.node(step.source_index), sequence.node(step.target_index)
            L = intertwiners.build_intertwiner(step.kind, step.source_params, self.trunc)
            residual = intertwiners.intertwine_residual(
                L, hierarchy.node_hamiltonian(source, self.trunc), hierarchy.node_hamiltonian(target, self.trunc)
            )
            entry = hierarchy.ledger(source, target, n_cut)
            upward = step.target_index > step.source_index
            counts_ok = (len(entry.gained), len(entry.lost)) == ((2, 0) if upward else (0, 2))
            checks.append(_check(f"step {step.source_index}->{step.target_index}", residual, self.tol))
            checks.append(
                {
                    "check": f"ledger {step.source_index}->{step.target_index}",
                    "passed": counts_ok,
                    "value": float(len(entry.gained) + len(entry.lost)),
                    "threshold": 2.0,
                }
            )
            rows.append(
                {
                    "record": "step",
                    "index": step.source_index,
                    "target": step.target_index,
                    "intertwiner": str(step.kind),
                    "residual": residual,
                    "gained": entry.gained,
                    "lost": entry.lost,
                    "matched": entry.matched_count,
                }
            )
        residuals = {c["check"]: c["value"] for c in checks}
        residuals["boundary_index"] = sequence.boundary_index
        if sequence.boundary_reached:
            rows.append({"record": "boundary", "index": sequence.boundary_index})
        return self._document("hierarchy", rows, residuals, _status(checks))

    def resonant(self, k_max: int = RESONANT_K, sign: int = 1) -> Dict[str, Any]:
        """Resonant chain residuals, the Dirac square-root check and the level census."""
        chain = hierarchy.resonant_sequence(k_max, self.params.lam, self.trunc, sign=sign)
        rows: List[Dict[str, Any]] = []
        checks: List[Dict[str, Any]] = []
        for node in chain.nodes:
            rows.append({"record": "node", "k": node.index, "delta": node.params.delta, "shift": node.shift})
        for node, L, residual in zip(chain.nodes, chain.intertwiners, chain.residuals):
            rows.append({"record": "step", "k": node.index, "residual": residual})
            checks.append(_check(f"chain {L.kind} at delta={L.source.delta:.6g}", residual, self.tol))
        for k in range(0, k_max + 1):
            residual = hierarchy.dirac_square_check(k, self.trunc)
            rows.append({"record": "dirac_square", "k": k, "residual": residual})
            checks.append(_check(f"dirac_square k={k}", residual, self.tol))

        ceiling = self.trunc.n_max / 2.0
        base = chain.nodes[-1]
        base_count = hierarchy.count_levels_below(base, ceiling, self.trunc.n_max)
        for node in chain.nodes[:-1]:
            missing = base_count - hierarchy.count_levels_below(node, ceiling, self.trunc.n_max)
            rows.append({"record": "census", "k": node.index, "fewer_levels": missing, "expected": 2 * node.index})
            checks.append(
                {
                    "check": f"census k={node.index}",
                    "passed": missing == 2 * node.index,
                    "value": float(missing),
                    "threshold": float(2 * node.index),
                }
            )
        return self._document("resonant", rows, {c["check"]: c["value"] for c in checks}, _status(checks))

    def darboux(self, kind_tag: str, k: int = 1) -> Dict[str, Any]:
        """
        Darboux pipeline for the seed pair of one intertwiner kind, with a W/Delta V sample dump.
        """
        kind = IntertwinerKind(tag=kind_tag, k=k if kind_tag == "Lk" else 0)
        result = darboux_grid.darboux_from_kind(kind, self.params, self.grid)
        predicted = result.predicted
        fit = result.fit
        checks = [
            _check("W_error", result.w_error, W_TOL),
            _check("fit_residual", fit.residual, fit.threshold),
            _check("fit_delta", abs(fit.delta_fit - predicted[0]), self.tol_grid),
            _check("fit_lambda", abs(fit.lambda_fit - predicted[1]), self.tol_grid),
            _check("fit_const", abs(fit.const_fit - predicted[2]), self.tol_grid),
        ]
        checks.extend(self._seed_eigen_checks(kind))

        rows: List[Dict[str, Any]] = [
            {
                "record": "fit",
                "delta": fit.delta_fit,
                "lambda": fit.lambda_fit,
                "const": fit.const_fit,
                "residual": fit.residual,
            },
            {"record": "predicted", "delta": predicted[0], "lambda": predicted[1], "const": predicted[2]},
        ]
        x = self.grid.x
        sampled = np.flatnonzero(result.delta_V.mask)[::SAMPLE_STRIDE]
        for i in sampled:
            W, dV = result.W.values[i].real, result.delta_V.values[i].real
            rows.append(
                {
                    "record": "sample",
                    "x": x[i],
                    "w11": W[0, 0], "w12": W[0, 1], "w21": W[1, 0], "w22": W[1, 1],
                    "dv11": dV[0, 0], "dv12": dV[0, 1], "dv21": dV[1, 0], "dv22": dV[1, 1],
                }
            )
        return self._document("darboux", rows, {c["check"]: c["value"] for c in checks}, _status(checks))

    def _seed_eigen_checks(self, kind: IntertwinerKind) -> List[Dict[str, Any]]:
        """Finite-difference eigen-residual of each seed, reported as C = residual / h^2."""
        source = darboux_grid.source_params(kind, self.params)
        h2 = self.grid.spacing**2
        checks = []
        for label, seed in zip(darboux_grid.SEED_PAIRS[kind.tag], darboux_grid.seed_pair(kind, self.params, self.grid)):
            energy = spectra.level_energy(source, label)
            if label.physicality == "physical":
                residual = darboux_grid.eigen_residual(source, seed, energy)
                checks.append(_check(f"eigen_C {label}", residual / h2, PHYSICAL_C_MAX))
            else:
                residual = darboux_grid.eigen_residual(source, seed, energy, half_width=GRID_SEED_WINDOW, relative=True)
                checks.append(_check(f"eigen_C {label}", residual / h2, NONPHYSICAL_C_MAX))
        return checks

    def figures(self, fig: int) -> Dict[str, Any]:
        rows = self.figure_transformers.figure_rows(fig, self.params)
        return self._document(f"figure{fig}", rows, {"points": len(rows)}, "ok")

    def verify(self) -> Dict[str, Any]:
        """
        Run every registered acceptance check; a failing check never stops the others.

        :return: Result document with one row per check.
        """
        results: List[Dict[str, Any]] = []
        for check in self.checks:
            name = check.__name__.replace("_check_", "")
            try:
                outcome = check()
                for item in outcome:
                    item["group"] = name
                results.extend(outcome)
            except Exception as e:
                logger.error(f"Error in check {name}: {e}")
                results.append({"group": name, "check": name, "passed": False, "error": str(e)})
        failed = [r for r in results if not r.get("passed")]
        for r in failed:
            logger.error(f"Check failed: {r['group']}/{r['check']} value={r.get('value')} threshold={r.get('threshold')}")
        status = "ok" if not failed else "fail"
        logger.info(f"verify: {len(results) - len(failed)}/{len(results)} checks passed")
        rows = [
            {
                "group": r["group"],
                "check": r["check"],
                "passed": r["passed"],
                "value": r.get("value"),
                "threshold": r.get("threshold"),
                "error": r.get("error", ""),
            }
            for r in results
        ]
        return self._document("verify", rows, {f"{r['group']}/{r['check']}": r.get("value") for r in results}, status)

    def _check_spectrum_equality(self) -> List[Dict[str, Any]]:
        physical = spectra.analytic_physical_spectrum(self.params, self.trunc.n_max)
        values = spectra.numeric_spectrum(build_jc(self.params, self.trunc))
        report = spectra.reconcile(physical, values, self.params, self.trunc, 1e-9)
        worst = max((m.delta_abs for m in report.matched), default=math.inf)
        return [
            _check("max level difference", worst, 1e-9),
            {
                "check": "reconciled",
                "passed": report.ok and len(report.matched) == 2 * self.trunc.n_max + 1,
                "value": float(len(report.matched)),
                "threshold": float(2 * self.trunc.n_max + 1),
            },
            _check(
                "spurious at n_max+1+delta",
                abs(report.spurious[0] - spectra.spurious_level(self.params, self.trunc)) if report.spurious else math.inf,
                1e-9,
            ),
        ]

    def _check_nonphysical_census(self) -> List[Dict[str, Any]]:
        checks = []
        if self.params.lam != 0:
            levels = spectra.analytic_nonphysical_spectrum(self.params)
            limit = hierarchy.reality_limit(self.params)
            degenerate = any(pair.double_root for pair in levels)
            expected = 1 + 2 * limit - (1 if degenerate else 0)
            checks.append(
                {
                    "check": "nonphysical count",
                    "passed": len(levels) == expected,
                    "value": float(len(levels)),
                    "threshold": float(expected),
                }
            )
        reference = spectra.analytic_nonphysical_spectrum(DOUBLE_ROOT_PARAMS)
        last = reference[-1]
        checks.append(
            {
                "check": "double root at (3, 1)",
                "passed": last.double_root and last.label.n == 9 and abs(last.energy + 9.0) <= 1e-12,
                "value": last.energy,
                "threshold": -9.0,
            }
        )
        return checks

    def _kinds(self) -> List[IntertwinerKind]:
        kinds = [IntertwinerKind(tag="L0"), IntertwinerKind(tag="L3"), IntertwinerKind(tag="L4")]
        if self.params.delta**2 >= self.params.lam**2:
            kinds[1:1] = [IntertwinerKind(tag="L1"), IntertwinerKind(tag="L2")]
        else:
            logger.warning("delta^2 < lambda^2: L1 and L2 checks skipped.")
        return kinds

    def _check_intertwining(self) -> List[Dict[str, Any]]:
        self.params.require_coupling()
        kinds = self._kinds() + [IntertwinerKind(tag="Lk", k=k) for k in range(1, RESONANT_K + 1)]
        checks = []
        for kind in kinds:
            L = intertwiners.build_intertwiner(kind, self.params, self.trunc)
            H_src, H_tgt = intertwiners.source_hamiltonian(L), intertwiners.target_hamiltonian(L)
            checks.append(_check(f"{kind} forward", intertwiners.intertwine_residual(L, H_src, H_tgt), self.tol))
            checks.append(_check(f"{kind} adjoint", intertwiners.adjoint_residual(L, H_src, H_tgt), self.tol))
        return checks

    def _check_annihilation(self) -> List[Dict[str, Any]]:
        checks = []
        for kind in self._kinds():
            checks.extend(self._seed_checks(kind))
        return checks

    def _check_symmetries(self) -> List[Dict[str, Any]]:
        excitation = intertwiners.excitation_number(self.trunc)
        H = build_jc(self.params, self.trunc)
        checks = [_check("[N_e, H]", OperatorUtils.guarded_norm(OperatorUtils.commutator(excitation, H), self.trunc, 0), self.tol)]
        for kind in self._kinds():
            if kind.tag == "L0":
                continue
            symmetry = intertwiners.symmetry_from(intertwiners.build_intertwiner(kind, self.params, self.trunc))
            commutator, decomposition = intertwiners.symmetry_residuals(symmetry)
            checks.append(_check(f"S({kind}) commutator", commutator, self.tol))
            checks.append(_check(f"S({kind}) decomposition", decomposition, self.tol))

        rng = np.random.default_rng(RANDOM_SEED)
        worst = 0.0
        for _ in range(1000):
            lam = rng.uniform(0.1, 5.0)
            delta = rng.choice([-1.0, 1.0]) * rng.uniform(lam, 5.0 + lam)
            k1, k2plus, k3, k4 = intertwiners.k_constants(JCParams(delta=delta, lam=lam))
            worst = max(worst, abs(k1 * k2plus + 1.0), abs(k3 * k4 + 1.0))
        checks.append(_check("K products", worst, 1e-12))
        return checks

    def _check_darboux(self) -> List[Dict[str, Any]]:
        checks = []
        l0 = darboux_grid.darboux_from_kind(IntertwinerKind(tag="L0"), self.params, self.grid)
        checks.append(_check("L0 W = diag(x, -x)", l0.w_error, W_TOL))
        anti = darboux_grid.potential(self.params, self.grid, "AntiJC").values
        window = l0.V_tilde.mask & self.grid.window(GRID_SEED_WINDOW)
        checks.append(_check("L0 partner potential is anti-JC", float(np.max(np.abs(l0.V_tilde.values[window] - anti[window]))), self.tol_grid))

        fit_kinds = [IntertwinerKind(tag="L3")]
        if self.params.delta**2 >= self.params.lam**2:
            fit_kinds.insert(0, IntertwinerKind(tag="L1"))
        for kind in fit_kinds:
            result = darboux_grid.darboux_from_kind(kind, self.params, self.grid)
            deviation = max(abs(a - b) for a, b in zip((result.fit.delta_fit, result.fit.lambda_fit, result.fit.const_fit), result.predicted))
            checks.append(_check(f"{kind} shape fit", deviation, self.tol_grid))

        fine = GridAxis(x_min=self.grid.x_min, x_max=self.grid.x_max, points=2 * self.grid.points - 1)
        for kind in [IntertwinerKind(tag="L0")] + fit_kinds:
            coarse_error = self._central_W_error(kind, self.grid)
            fine_error = self._central_W_error(kind, fine)
            ratio = coarse_error / fine_error
            low, high = CONVERGENCE_RATIO
            checks.append(
                {
                    "check": f"{kind} O(h^2) ratio",
                    "passed": low <= ratio <= high,
                    "value": ratio,
                    "threshold": 4.0,
                }
            )

        h2 = self.grid.spacing**2
        seed = darboux_grid.sample_eigenfunction(darboux_grid.PSI_0, self.params, self.grid)
        residual = darboux_grid.eigen_residual(self.params, seed, -self.params.delta)
        checks.append(_check("Psi_0 eigen C", residual / h2, PHYSICAL_C_MAX))
        return checks

    def _central_W_error(self, kind: IntertwinerKind, grid: GridAxis) -> float:
        seed1, seed2 = darboux_grid.seed_pair(kind, self.params, grid)
        W = darboux_grid.build_W(darboux_grid.build_M(seed1, seed2, derivative="central"))
        form, _ = intertwiners.operator_form(kind, self.params)
        window = W.mask & grid.window(CONVERGENCE_WINDOW)
        return float(np.max(np.abs(W.values[window] - darboux_grid.expected_W(form, grid)[window])))

    def _check_hierarchy(self) -> List[Dict[str, Any]]:
        n_cut = max(self.trunc.n_max, LEDGER_N_CUT_MIN)
        sequence = hierarchy.build_sequence(self.params, "JC", steps_up=1, steps_down=1)
        delta, lam = self.params.delta, self.params.lam
        checks = []
        down = hierarchy.ledger(sequence.node(0), sequence.node(-1), n_cut)
        expected_lost = sorted([-delta, 1.0 + math.sqrt(delta**2 + lam**2)])
        checks.append(self._ledger_check("0->-1 lost", down.lost, expected_lost, down.gained))
        if sequence.boundary_reached:
            logger.warning("delta^2 < lambda^2: upward ledger and branch ordering skipped.")
            return checks
        up = hierarchy.ledger(sequence.node(0), sequence.node(1), n_cut)
        expected_gained = sorted([delta, -1.0 - math.sqrt(delta**2 - lam**2)])
        checks.append(self._ledger_check("0->1 gained", up.gained, expected_gained, up.lost))
        violations = hierarchy.branch_ordering(self.params, PROPERTY_BLOCKS)
        checks.append(
            {
                "check": "branch ordering",
                "passed": not violations,
                "value": float(len(violations)),
                "threshold": 0.0,
            }
        )
        return checks

    @staticmethod
    def _ledger_check(name: str, values: List[float], expected: List[float], other: List[float]) -> Dict[str, Any]:
        if len(values) != len(expected) or other:
            return {"check": name, "passed": False, "value": float(len(values)), "threshold": float(len(expected))}
        return _check(name, max(abs(a - b) for a, b in zip(sorted(values), expected)), hierarchy.LEDGER_TOL)

    def _check_resonant(self) -> List[Dict[str, Any]]:
        document = self.resonant(RESONANT_K)
        checks = []
        for row in document["results"]:
            if row["record"] == "census":
                checks.append(
                    {
                        "check": f"census k={row['k']}",
                        "passed": row["fewer_levels"] == row["expected"],
                        "value": float(row["fewer_levels"]),
                        "threshold": float(row["expected"]),
                    }
                )
            elif row["record"] in ("step", "dirac_square"):
                checks.append(_check(f"{row['record']} k={row['k']}", row["residual"], self.tol))
        return checks

    def _check_properties(self) -> List[Dict[str, Any]]:
        rng = np.random.default_rng(RANDOM_SEED)
        trunc = FockTruncation(n_max=PROPERTY_N_MAX)
        block_worst = spectrum_worst = entry_worst = 0.0
        n = np.arange(1, PROPERTY_BLOCKS + 1)
        for _ in range(PROPERTY_DRAWS):
            params = JCParams(delta=rng.uniform(-5.0, 5.0), lam=rng.uniform(0.1, 3.0))
            pairs = spectra.analytic_physical_spectrum(params, PROPERTY_BLOCKS)
            plus = np.array([p.energy for p in pairs if p.label.sign == "+"])
            minus = np.array([p.energy for p in pairs if p.label.sign == "-"])
            block_worst = max(
                block_worst,
                float(np.max(np.abs(plus + minus - 2 * n))),
                float(np.max(np.abs(plus * minus - (n**2 - params.delta**2 - n * params.lam**2)) / np.maximum(1.0, n**2))),
            )
            H = build_jc(params, trunc)
            base = spectra.numeric_spectrum(H)
            for R in ("sigma_z", "sigma_y"):
                moved = spectra.numeric_spectrum(equivalence_transform(H, R))
                spectrum_worst = max(spectrum_worst, float(np.max(np.abs(moved - base))))
            flipped = equivalence_transform(build_jc(params.with_delta(-params.delta), trunc), "sigma_y")
            entry_worst = max(entry_worst, float(np.max(np.abs(flipped - build_ajc(params, trunc)))))
        return [
            _check("block trace/determinant", block_worst, self.tol),
            _check("equivalences keep spectra", spectrum_worst, self.tol),
            _check("sigma_y maps JC(-delta) to aJC(delta)", entry_worst, self.tol),
        ]

    def invoke(self, command: str, **kwargs: Any) -> Dict[str, Any]:
        """
        Run one command by name.

        :param command: spectrum, partners, hierarchy, resonant, darboux, verify or figures.
        :return: Result document; domain errors are reported with status "invalid" and an "error" key.
        """
        handlers = {
            "spectrum": self.spectrum,
            "partners": self.partners,
            "hierarchy": self.hierarchy,
            "resonant": self.resonant,
            "darboux": self.darboux,
            "verify": self.verify,
            "figures": self.figures,
        }
        if command not in handlers:
            return {"command": command, "status": "invalid", "error": f"Unknown command {command!r}"}
        try:
            return handlers[command](**kwargs)
        except (ParameterDomainError, ConfigError, ValidationError) as e:
            logger.error(f"{command}: {e}")
            return {"command": command, "status": "invalid", "error": str(e)}
        except JCSusyError as e:
            logger.error(f"{command} failed: {e}")
            return {"command": command, "status": "fail", "error": str(e)}
