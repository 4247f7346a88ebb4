import csv
import io
import json
import logging
from typing import Any, Dict, List

from src.utils.operator_utils import OperatorUtils

logger = logging.getLogger(__name__)

SPECTRUM_COLUMNS = ["kind", "n", "branch", "physicality", "energy"]
RECONCILE_COLUMNS = ["numeric", "delta_abs"]


class ResultTransformers:
    def __init__(self):
        """Turns service result documents into CSV and JSON text."""
        self.logger = logging.getLogger("ResultTransformers")

        # Register transformers in pipeline order.
        self.transformers = [
            self._derive_columns,
            self._derive_cells,
            self._derive_csv,
            self._derive_json,
        ]

    def execute_transformers(self, meta: Dict, document: Dict) -> Dict:
        """
        Run the pipeline over one result document.

        :param meta: Options, e.g. {"format": "csv"}.
        :param document: Service document with results, residuals, params and status.
        :return: The document with "columns", "cells", "csv" and "json" added.
        """
        for transformer in self.transformers:
            try:
                if "results" not in document:
                    raise ValueError("Document has no results; nothing to render.")
                document = transformer(meta, document)
            except Exception as e:
                self.logger.error(f"Error in transformer {transformer.__name__}: {e}")
        return document

    def render(self, document: Dict, output_format: str = "csv") -> str:
        document = self.execute_transformers({"format": output_format}, document)
        return document.get(output_format, "")

    def _derive_columns(self, meta: Dict, document: Dict) -> Dict:
        """Column order: the fixed spectrum schema when it applies, else first-seen key order."""
        rows: List[Dict[str, Any]] = document["results"]
        keys: List[str] = []
        for row in rows:
            keys.extend(key for key in row if key not in keys)
        if keys[: len(SPECTRUM_COLUMNS)] == SPECTRUM_COLUMNS and set(keys) <= set(SPECTRUM_COLUMNS + RECONCILE_COLUMNS):
            keys = SPECTRUM_COLUMNS + [c for c in RECONCILE_COLUMNS if c in keys]
        document["columns"] = keys
        return document

    def _derive_cells(self, meta: Dict, document: Dict) -> Dict:
        document["cells"] = [[self._cell(row.get(column)) for column in document["columns"]] for row in document["results"]]
        return document

    def _derive_csv(self, meta: Dict, document: Dict) -> Dict:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(document["columns"])
        writer.writerows(document["cells"])
        document["csv"] = buffer.getvalue()
        return document

    def _derive_json(self, meta: Dict, document: Dict) -> Dict:
        payload = {
            "params": document.get("params", {}),
            "results": [{key: self._plain(value) for key, value in row.items()} for row in document["results"]],
            "residuals": {key: self._plain(value) for key, value in document.get("residuals", {}).items()},
            "status": document.get("status"),
        }
        document["json"] = json.dumps(payload, indent=2) + "\n"
        return document

    @staticmethod
    def _cell(value: Any) -> str:
        if value is None:
            return ""
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, (int,)) and not isinstance(value, bool):
            return str(value)
        if isinstance(value, (list, tuple)):
            return ";".join(ResultTransformers._cell(item) for item in value)
        try:
            return OperatorUtils.format_number(float(value))
        except (TypeError, ValueError):
            return str(value)

    @staticmethod
    def _plain(value: Any) -> Any:
        """JSON-safe copy: numpy scalars become floats, non-finite floats become null."""
        if isinstance(value, (list, tuple)):
            return [ResultTransformers._plain(item) for item in value]
        if isinstance(value, bool) or value is None or isinstance(value, str):
            return value
        if isinstance(value, int):
            return value
        try:
            number = float(value)
        except (TypeError, ValueError):
            return str(value)
        return number if number == number and abs(number) != float("inf") else None
