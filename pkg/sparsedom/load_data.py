import json
import logging
import math
import os
from typing import Dict, List

import numpy as np
import pandas as pd

from sparsedom.step_functions import DyadicStepFunction

FLOAT_FORMAT = "%.17g"


def _native(value):
    """Plain Python scalars for json; non-finite floats become null."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def _json_text(value, indent: int, depth: int = 0) -> str:
    """JSON text with reals at 17 significant digits, like the CSV files; non-finite reals become null."""
    value = _native(value)
    pad = "\n" + " " * (indent * (depth + 1))
    close = "\n" + " " * (indent * depth)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = (f"{json.dumps(str(key))}: {_json_text(item, indent, depth + 1)}" for key, item in value.items())
        return "{" + pad + ("," + pad).join(items) + close + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        if len(value) == 0:
            return "[]"
        items = (_json_text(item, indent, depth + 1) for item in value)
        return "[" + pad + ("," + pad).join(items) + close + "]"
    if isinstance(value, float):
        return FLOAT_FORMAT % value
    return json.dumps(value)


class Loader:
    """
    A class for writing reports, documents and function exports to JSON and CSV files.
    """

    def __init__(self):
        """
        Initializes the Loader with logging configuration.
        """
        self.logger = logging.getLogger(__name__)
        logging.basicConfig(
            level=logging.INFO,
            format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        )

    @staticmethod
    def _prepare_path(path: str):
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)

    def write_document(self, document: Dict, path: str):
        """
        Writes a JSON document with reals at 17 significant digits, so reading the file back
        yields the identical binary64 values.

        Raises:
            Exception: If the file cannot be written.
        """
        try:
            self._prepare_path(path)
            with open(path, "w", encoding="utf-8") as file:
                file.write(_json_text(document, indent=2))
            self.logger.info(f"Document successfully written to: {path}")
        except Exception as e:
            self.logger.exception(f"Error writing document '{path}': {e}")
            raise

    def validate_and_write_report(self, rows: List[Dict], path: str, output_format: str, required_columns: List[str]):
        """
        Validates report rows and writes them as CSV or JSON.

        CSV carries exactly the required columns in that order with reals at 17 significant
        digits; JSON is a list of objects with the same keys.

        Args:
            rows (List[Dict]): Report rows.
            path (str): Output file.
            output_format (str): 'csv' or 'json'.
            required_columns (List[str]): Column names, in output order.

        Raises:
            ValueError: If a row misses a column or the format is unknown.
            Exception: If the file cannot be written.
        """
        try:
            for row in rows:
                missing_columns = [col for col in required_columns if col not in row]
                if missing_columns:
                    raise ValueError(f"Missing report columns: {missing_columns}")

            self._prepare_path(path)
            if output_format == "csv":
                df = pd.DataFrame(rows, columns=required_columns)
                if "pass" in df.columns:
                    df["pass"] = df["pass"].map({True: "true", False: "false"})
                df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
            elif output_format == "json":
                records = [{col: _native(row[col]) for col in required_columns} for row in rows]
                with open(path, "w", encoding="utf-8") as file:
                    file.write(_json_text(records, indent=1))
            else:
                raise ValueError(f"Unknown report format '{output_format}'. Use 'csv' or 'json'.")
            self.logger.info(f"Report with {len(rows)} rows successfully written to: {path}")
        except ValueError as e:
            self.logger.error(f"Validation error: {e}")
            raise
        except Exception as e:
            self.logger.exception(f"Error writing report '{path}': {e}")
            raise

    def export_function(self, function: DyadicStepFunction, path: str):
        """Writes a step function as CSV with columns cell_index, value."""
        try:
            self._prepare_path(path)
            df = pd.DataFrame({"cell_index": np.arange(function.values.size), "value": function.values})
            df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
            self.logger.info(f"Function with {function.values.size} cells exported to: {path}")
        except Exception as e:
            self.logger.exception(f"Error exporting function to '{path}': {e}")
            raise
