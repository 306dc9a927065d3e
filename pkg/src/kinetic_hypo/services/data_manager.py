"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

Export of reports, spectral fields and sample ensembles.

Every CSV starts with the banner ``# kinetic-hypo v<semver> schema=1`` followed
by the column header; numbers use ``%.12e`` so that identical runs give
byte-identical files.
"""

import os
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

from kinetic_hypo.config.logging import get_logger
from kinetic_hypo.config.settings import REPORT_COLUMNS
from kinetic_hypo.core.exceptions import ExportError, FileError, ValidationError
from kinetic_hypo.core.kinetic_semigroup import SpectralField
from kinetic_hypo.core.models import ExportResult
from kinetic_hypo.core.monte_carlo import SampleEnsemble
from kinetic_hypo.infrastructure.file_io import CsvFileWriter, EnsembleStore, JsonFileWriter

logger = get_logger(__name__)

DEFAULT_FORMAT = "%.12e"


class DataManager:
    """
    Manages all export operations.

    Extend this class to add new export types; the low-level writers live in
    infrastructure/file_io.py.
    """

    def __init__(self):
        self.csv_writer = CsvFileWriter()
        self.json_writer = JsonFileWriter()
        self.ensemble_store = EnsembleStore()
        logger.info("DataManager initialized")

    # =========================================================================
    # Report Export
    # =========================================================================

    def export_to_csv(self, data: Dict[str, Any], filepath: str) -> ExportResult:
        """
        Export a report table to a CSV file.

        Args:
            data (Dict[str, Any]): Dictionary containing 'headers' and 'data' keys.
                Optional key 'format_spec' is passed to numpy.savetxt ``fmt``; a
                list gives one format per column (mixed text and numbers).
            filepath (str): Output file path.

        Returns:
            ExportResult: Result detailing whether the export succeeded.
                Validation and file-system issues are captured in the
                ``error_message`` field when ``success`` is ``False``.
        """
        try:
            if not data or "headers" not in data or "data" not in data:
                raise ValidationError("Invalid data structure")

            headers = data["headers"]
            format_spec = data.get("format_spec", DEFAULT_FORMAT)
            dtype = object if isinstance(format_spec, (list, tuple)) else float
            data_array = np.array(data["data"], dtype=dtype)

            if data_array.size == 0:
                raise ExportError("No data to export")
            data_array = np.atleast_2d(data_array)
            if data_array.shape[1] != len(headers):
                raise ValidationError(
                    f"{len(headers)} headers for {data_array.shape[1]} columns"
                )

            self.csv_writer.ensure_directory(os.path.dirname(filepath))
            self.csv_writer.write_csv(filepath, data_array, headers, format_spec)

            if not os.path.exists(filepath):
                raise FileError("File was not created")

            records = len(data_array)
            logger.info(f"Exported {records} records to {Path(filepath).name}")
            return ExportResult(success=True, file_path=filepath, records_exported=records)

        except Exception as e:
            logger.error(f"Export failed: {e}")
            return ExportResult(success=False, error_message=str(e))

    def export_to_json(self, document: Dict[str, Any], filepath: str) -> ExportResult:
        """Export a report document (tables, assertions, config) as JSON."""
        try:
            self.csv_writer.ensure_directory(os.path.dirname(filepath))
            self.json_writer.write_json(filepath, document)
            records = sum(len(v["data"]) for v in document.get("tables", {}).values())
            logger.info(f"Exported JSON report to {Path(filepath).name}")
            return ExportResult(success=True, file_path=filepath, records_exported=records)
        except Exception as e:
            logger.error(f"Export failed: {e}")
            return ExportResult(success=False, error_message=str(e))

    def export_report(
        self,
        tables: Dict[str, Dict[str, Any]],
        output_dir: str,
        fmt: str = "csv",
        extra: Dict[str, Any] = None,
    ) -> List[ExportResult]:
        """
        Export named tables: one CSV per table, or a single ``report.json``.

        Empty tables are skipped.
        """
        tables = {name: t for name, t in tables.items() if t.get("data")}
        if fmt == "json":
            document = {"tables": tables, **(extra or {})}
            return [self.export_to_json(document, os.path.join(output_dir, "report.json"))]
        return [
            self.export_to_csv(table, os.path.join(output_dir, f"{name}.csv"))
            for name, table in tables.items()
        ]

    # =========================================================================
    # Fields and ensembles
    # =========================================================================

    def export_spectral_field(self, field: SpectralField, filepath: str) -> ExportResult:
        """One row per (s, k) node: s, xi_1..xi_d, eta_1..eta_d, re, im, weight."""
        d = field.dim
        k = field.freq_nodes
        w = field.freq_weights
        n_s, n_k = field.values.shape
        rows = np.column_stack(
            [
                np.repeat(field.times, n_k),
                np.tile(k, (n_s, 1)),
                field.values.real.ravel(),
                field.values.imag.ravel(),
                np.outer(field.time_weights, w).ravel(),
            ]
        )
        base = REPORT_COLUMNS["spectral_field"]
        headers = (
            [base[0]]
            + [f"xi_{i + 1}" for i in range(d)]
            + [f"eta_{i + 1}" for i in range(d)]
            + base[3:]
        )
        return self.export_to_csv({"headers": headers, "data": rows}, filepath)

    def export_ensemble(self, ensemble: SampleEnsemble, filepath: str) -> ExportResult:
        try:
            self.csv_writer.ensure_directory(os.path.dirname(filepath))
            self.ensemble_store.write(filepath, ensemble.to_array(), ensemble.header())
            logger.info(f"Exported {ensemble.n_paths} samples to {Path(filepath).name}")
            return ExportResult(
                success=True, file_path=filepath, records_exported=ensemble.n_paths
            )
        except Exception as e:
            logger.error(f"Export failed: {e}")
            return ExportResult(success=False, error_message=str(e))

    def load_ensemble(self, filepath: str) -> SampleEnsemble:
        """
        Raises:
            FileError: If the file is missing or malformed.
        """
        if not os.path.exists(filepath):
            raise FileError(f"File not found: {filepath}")
        samples, header = self.ensemble_store.read(filepath)
        return SampleEnsemble.from_array(samples, header)

    # =========================================================================
    # Utility Methods
    # =========================================================================

    def make_unique_path(self, filepath: str) -> str:
        """
        Ensure a filepath is unique by appending a numeric suffix if needed.

        Raises:
            FileError: If a unique filename cannot be created.
        """
        if not os.path.exists(filepath):
            return filepath

        path = Path(filepath)
        counter = 1
        while counter <= 10000:
            new_path = path.parent / f"{path.stem}_{counter}{path.suffix}"
            if not new_path.exists():
                return str(new_path)
            counter += 1

        raise FileError(f"Could not create unique filename for {filepath}")

    def validate_export_path(self, filepath: str) -> bool:
        """
        Raises:
            ValidationError: If the path is empty, has no extension, or its
                directory is not writable.
        """
        if not filepath or not filepath.strip():
            raise ValidationError("Export path cannot be empty")

        path = Path(filepath)
        if not path.suffix:
            raise ValidationError("Export file must have an extension")

        directory = path.parent
        if directory.exists() and not os.access(directory, os.W_OK):
            raise ValidationError(f"No write permission for directory: {directory}")
        return True
