"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

Infrastructure layer for file I/O operations.

Provides concrete writers for versioned CSV reports, JSON documents and
binary sample ensembles, plus directory helpers.
"""

import json
import os
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np

from kinetic_hypo import __version__
from kinetic_hypo.config.logging import get_logger
from kinetic_hypo.config.settings import SCHEMA_VERSION
from kinetic_hypo.core.exceptions import FileError

logger = get_logger(__name__)


def report_banner() -> str:
    """Header comment line of every CSV report."""
    return f"# kinetic-hypo v{__version__} schema={SCHEMA_VERSION}"


class CsvFileWriter:
    """
    Writes report tables with the versioned banner and a column header line.
    """

    def write_csv(
        self,
        filepath: str,
        data: np.ndarray,
        headers: List[str],
        format_spec: Union[str, Sequence[str]] = "%.12e",
    ) -> None:
        """
        Write a table to CSV.

        Raises:
            FileError: If writing fails.
        """
        logger.debug(f"Writing CSV to {filepath}")
        try:
            header_str = report_banner() + "\n" + ",".join(headers)
            np.savetxt(
                filepath,
                data,
                delimiter=",",
                fmt=format_spec,
                header=header_str,
                comments="",
                encoding="utf-8",
            )
        except (IOError, OSError) as e:
            raise FileError(
                "Failed to write CSV file", details={"filepath": filepath}, cause=e
            )

    def ensure_directory(self, directory: str) -> None:
        """
        Ensure that a directory exists, creating it if necessary.

        Raises:
            FileError: If directory creation fails.
        """
        if directory and not os.path.exists(directory):
            logger.debug(f"Creating directory: {directory}")
            try:
                os.makedirs(directory, exist_ok=True)
            except OSError as e:
                raise FileError(
                    "Could not create directory",
                    details={"directory": directory},
                    cause=e,
                )


def _json_default(value: Any):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


class JsonFileWriter:
    """Deterministic JSON documents (sorted keys, fixed indentation)."""

    def write_json(self, filepath: str, document: Dict[str, Any]) -> None:
        try:
            with open(filepath, "w", encoding="utf-8") as fh:
                json.dump(
                    {"generator": f"kinetic-hypo v{__version__}", "schema": SCHEMA_VERSION, **document},
                    fh,
                    indent=2,
                    sort_keys=True,
                    default=_json_default,
                )
                fh.write("\n")
        except (IOError, OSError, TypeError) as e:
            raise FileError(
                "Failed to write JSON file", details={"filepath": filepath}, cause=e
            )


class EnsembleStore:
    """
    Binary columnar storage of sample ensembles: one ``samples`` array with
    columns (X..., V...) and the scalar header fields, in a NumPy ``.npz`` file.
    """

    HEADER_FIELDS = ("s", "t", "seed", "n_steps")

    def write(self, filepath: str, samples: np.ndarray, header: Dict[str, Any]) -> None:
        try:
            with open(filepath, "wb") as fh:
                np.savez(
                    fh,
                    samples=np.asarray(samples, dtype=np.float64),
                    **{k: np.asarray(header[k]) for k in self.HEADER_FIELDS},
                )
        except (IOError, OSError, KeyError) as e:
            raise FileError(
                "Failed to write ensemble file", details={"filepath": filepath}, cause=e
            )

    def read(self, filepath: str) -> Tuple[np.ndarray, Dict[str, Any]]:
        try:
            with np.load(filepath) as data:
                header = {k: data[k].item() for k in self.HEADER_FIELDS}
                return data["samples"], header
        except (IOError, OSError, KeyError, ValueError) as e:
            raise FileError(
                "Failed to read ensemble file", details={"filepath": filepath}, cause=e
            )
