import logging
import math
from typing import Any, Callable, Dict, List

from src.core.hierarchy import build_sequence, node_nonphysical_spectrum, node_spectrum
from src.core.spectra import analytic_nonphysical_spectrum, analytic_physical_spectrum
from src.models.errors import ParameterDomainError
from src.models.operator_models import JCParams
from src.models.spectrum_models import EigenPair

logger = logging.getLogger(__name__)

# Physical blocks shown in every spectrum figure.
FIGURE_N_MAX = 10
# Resonant figure: H_JC(sqrt(k) lambda) at k = 9, lambda = 1.
RESONANT_FIGURE_K = 9
RESONANT_FIGURE_LAMBDA = 1.0


class FigureTransformers:
    def __init__(self, n_max: int = FIGURE_N_MAX):
        """
        Builds the plottable point sets of the spectrum figures.

        :param n_max: Largest physical block emitted per series.
        """
        self.n_max = n_max
        self.figures: Dict[int, Callable[[JCParams], List[Dict[str, Any]]]] = {
            1: self._derive_jc_spectrum,
            2: self._derive_jc_and_anti_jc,
            3: self._derive_sequence_spectra,
            8: self._derive_resonant_spectrum,
        }

    def figure_rows(self, fig: int, params: JCParams) -> List[Dict[str, Any]]:
        """
        Rows (series, n, branch, physicality, energy) for one figure.

        :param fig: 1, 2, 3 or 8.
        :param params: Detuning and coupling; figure 8 uses its own resonant parameters.
        :return: Physical points first, then nonphysical, per series.
        """
        if fig not in self.figures:
            raise ParameterDomainError(f"No figure data for figure {fig}; expected one of {sorted(self.figures)}.")
        rows = self.figures[fig](params)
        logger.info(f"Figure {fig}: {len(rows)} points")
        return rows

    @staticmethod
    def _rows(series: str, pairs: List[EigenPair]) -> List[Dict[str, Any]]:
        return [
            {
                "series": series,
                "n": pair.label.n,
                "branch": pair.label.sign,
                "physicality": pair.label.physicality,
                "energy": pair.energy,
            }
            for pair in pairs
        ]

    def _derive_jc_spectrum(self, params: JCParams) -> List[Dict[str, Any]]:
        rows = self._rows("JC", analytic_physical_spectrum(params, self.n_max))
        return rows + self._rows("JC", analytic_nonphysical_spectrum(params))

    def _derive_jc_and_anti_jc(self, params: JCParams) -> List[Dict[str, Any]]:
        # H_aJC(delta) is sigma_y-equivalent to H_JC(-delta).
        mirrored = params.with_delta(-params.delta)
        rows = self._derive_jc_spectrum(params)
        rows += self._rows("aJC", analytic_physical_spectrum(mirrored, self.n_max))
        return rows + self._rows("aJC", analytic_nonphysical_spectrum(mirrored))

    def _derive_sequence_spectra(self, params: JCParams) -> List[Dict[str, Any]]:
        rows: List[Dict[str, Any]] = []
        for kind in ("JC", "aJC"):
            sequence = build_sequence(params, kind, steps_up=1, steps_down=1)
            for node in sequence.nodes:
                series = f"{kind}({node.index})"
                rows += self._rows(series, node_spectrum(node, self.n_max))
                rows += self._rows(series, node_nonphysical_spectrum(node))
        return rows

    def _derive_resonant_spectrum(self, params: JCParams) -> List[Dict[str, Any]]:
        resonant = JCParams(delta=RESONANT_FIGURE_LAMBDA * math.sqrt(RESONANT_FIGURE_K), lam=RESONANT_FIGURE_LAMBDA)
        rows = self._rows("JC", analytic_physical_spectrum(resonant, self.n_max))
        return rows + self._rows("JC", analytic_nonphysical_spectrum(resonant))
