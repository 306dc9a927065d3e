"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

Result models shared by the verification pipelines, the exporter and the CLI.

All models are frozen dataclasses validated at creation. Every report exposes
``assertions`` (PASS/FAIL outcomes) and ``to_table()`` returning the
``{"headers", "data"}`` dictionary accepted by DataManager.export_to_csv.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from kinetic_hypo.config.settings import REPORT_COLUMNS

# ==============================================================================
# Validation Errors
# ==============================================================================


class ModelValidationError(ValueError):
    """Raised when a result model is constructed with inconsistent data."""

    pass


# ==============================================================================
# Assertions and stage results
# ==============================================================================


@dataclass(frozen=True)
class AssertionOutcome:
    """
    One PASS/FAIL line of a verification report.

    Args:
        name (str): Assertion identifier, e.g. ``lambda_spread[p=2,R2]``.
        passed (bool): Outcome.
        value (float): Observed statistic.
        threshold (float): Threshold the statistic was compared against.
        detail (str): Free text shown after the numbers.
    """

    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def __post_init__(self):
        if not self.name:
            raise ModelValidationError("assertion name cannot be empty")
        object.__setattr__(self, "passed", bool(self.passed))

    def summary_line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        line = f"{status} {self.name} value={self.value:.6g} threshold={self.threshold:.6g}"
        return f"{line} {self.detail}" if self.detail else line


def check_at_most(name: str, value: float, threshold: float, detail: str = "") -> AssertionOutcome:
    passed = bool(np.isfinite(value)) and value <= threshold
    return AssertionOutcome(name, passed, float(value), float(threshold), detail)


def check_at_least(name: str, value: float, threshold: float, detail: str = "") -> AssertionOutcome:
    passed = bool(np.isfinite(value)) and value >= threshold
    return AssertionOutcome(name, passed, float(value), float(threshold), detail)


@dataclass(frozen=True)
class StageResult:
    """
    Outcome of one pipeline stage.

    Args:
        stage (str): Stage name, e.g. ``sandwich`` or ``resolvent``.
        success (bool): Whether the stage completed.
        data (Any): Stage output when successful.
        error_message (Optional[str]): Message when the stage failed.
        error_type (Optional[str]): Exception class name when the stage failed.
    """

    stage: str
    success: bool
    data: Any = None
    error_message: Optional[str] = None
    error_type: Optional[str] = None

    def __post_init__(self):
        if not self.success and not self.error_message:
            raise ModelValidationError("failed stage must carry an error_message")


class _Report:
    """Shared behavior of the verification reports."""

    assertions: List[AssertionOutcome]

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)


# ==============================================================================
# Regularity
# ==============================================================================


@dataclass(frozen=True)
class RegularityRow:
    """
    Norms of one (alpha, lambda, p) instance of the regularity estimate.

    ratio_x = |Delta_x^{alpha/(2(1+alpha))} u|_p / |f|_p and
    ratio_v = |Delta_v^{alpha/2} u|_p / |f|_p.
    """

    alpha: float
    lam: float
    p: float
    norm_f: float
    norm_dx_u: float
    norm_dv_u: float
    ratio_x: float
    ratio_v: float
    refine_delta_x: float = 0.0
    refine_delta_v: float = 0.0

    def __post_init__(self):
        for name in ("norm_f", "norm_dx_u", "norm_dv_u"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ModelValidationError(f"{name} must be finite and >= 0, got {value}")
        for name in ("ratio_x", "ratio_v"):
            if not math.isfinite(getattr(self, name)):
                raise ModelValidationError(f"{name} must be finite")

    def as_row(self) -> List[float]:
        return [
            self.alpha, self.lam, self.p, self.norm_f, self.norm_dx_u, self.norm_dv_u,
            self.ratio_x, self.ratio_v, self.refine_delta_x, self.refine_delta_v,
        ]


@dataclass(frozen=True)
class BouchutInstance:
    """
    Interpolation slack rhs / lhs with lhs = |Delta_x^{alpha/(2(1+alpha))} u|_2 and
    rhs = |Delta_v^{alpha/2} u|^(1/(1+alpha)) |f_eff|^(alpha/(1+alpha)).

    ``control_slack`` puts the order alpha/2 on Delta_x in lhs and is reported only.
    """

    alpha: float
    lam: float
    lhs: float
    rhs: float
    slack: float
    slack_refined: float
    control_slack: float
    zero_field: bool = False

    def as_row(self) -> List[float]:
        return [
            self.alpha, self.lam, self.lhs, self.rhs,
            self.slack, self.slack_refined, self.control_slack,
        ]


@dataclass(frozen=True)
class RegularityReport(_Report):
    """Rows per (alpha, lambda, p), Bouchut instances and assertion outcomes."""

    rows: List[RegularityRow]
    bouchut: List[BouchutInstance] = field(default_factory=list)
    assertions: List[AssertionOutcome] = field(default_factory=list)
    plancherel_error: Optional[float] = None

    def __post_init__(self):
        if not self.rows:
            raise ModelValidationError("a regularity report needs at least one row")

    def ratios(self, p: float, alpha: Optional[float] = None, which: str = "v") -> np.ndarray:
        key = "ratio_v" if which == "v" else "ratio_x"
        return np.array(
            [
                getattr(r, key)
                for r in self.rows
                if r.p == p and (alpha is None or r.alpha == alpha)
            ]
        )

    def to_table(self) -> Dict[str, Any]:
        return {
            "headers": REPORT_COLUMNS["regularity"],
            "data": [r.as_row() for r in self.rows],
        }

    def bouchut_table(self) -> Dict[str, Any]:
        return {
            "headers": REPORT_COLUMNS["bouchut"],
            "data": [b.as_row() for b in self.bouchut if not b.zero_field],
        }


# ==============================================================================
# Monte Carlo, collision and geometry reports
# ==============================================================================


@dataclass(frozen=True)
class McValidationReport(_Report):
    """
    Characteristic-function probe rows, moment-exponent rows and the scaling-law
    discrepancies.
    """

    char_rows: List[List[float]]
    moment_rows: List[List[float]] = field(default_factory=list)
    scaling: Dict[str, float] = field(default_factory=dict)
    assertions: List[AssertionOutcome] = field(default_factory=list)

    def to_table(self) -> Dict[str, Any]:
        return {"headers": REPORT_COLUMNS["mc"], "data": self.char_rows}

    def moments_table(self) -> Dict[str, Any]:
        return {"headers": REPORT_COLUMNS["moments"], "data": self.moment_rows}


@dataclass(frozen=True, eq=False)
class CollisionProbeRow:
    """Carleman, spherical and split values of Q(f, f) at one probe velocity."""

    probe: int
    v: np.ndarray
    carleman: float
    spherical: float
    q1: float
    q2: float

    @property
    def rel_error(self) -> float:
        return abs(self.carleman - self.spherical) / max(abs(self.carleman), 1e-14)

    @property
    def split_error(self) -> float:
        return abs(self.carleman - self.q1 - self.q2) / max(abs(self.carleman), 1e-14)

    def as_row(self) -> List[float]:
        v = np.atleast_1d(self.v)
        v2 = float(v[1]) if v.size > 1 else 0.0
        return [
            self.probe, float(v[0]), v2, self.carleman, self.spherical,
            self.q1, self.q2, self.rel_error, self.split_error,
        ]


@dataclass(frozen=True)
class CollisionReport(_Report):
    rows: List[CollisionProbeRow]
    coarea: Dict[str, float] = field(default_factory=dict)
    assertions: List[AssertionOutcome] = field(default_factory=list)

    def to_table(self) -> Dict[str, Any]:
        return {"headers": REPORT_COLUMNS["collision"], "data": [r.as_row() for r in self.rows]}


@dataclass(frozen=True)
class GeometryReport(_Report):
    """Rows of (check, alpha, value, expected, passed)."""

    rows: List[List[Any]]
    assertions: List[AssertionOutcome] = field(default_factory=list)

    def to_table(self) -> Dict[str, Any]:
        return {
            "headers": REPORT_COLUMNS["geometry"],
            "data": [list(r) for r in self.rows],
            "format_spec": ["%s", "%.12e", "%.12e", "%.12e", "%d"],
        }


@dataclass(frozen=True)
class SymbolReport(_Report):
    rows: List[Dict[str, float]]
    assertions: List[AssertionOutcome] = field(default_factory=list)

    def to_table(self) -> Dict[str, Any]:
        headers = REPORT_COLUMNS["symbol"]
        return {"headers": headers, "data": [[row[h] for h in headers] for row in self.rows]}


# ==============================================================================
# Sweeps and export
# ==============================================================================


@dataclass(frozen=True)
class SweepInstanceResult:
    """Outcome of one (alpha, config) instance of a sweep."""

    label: str
    success: bool
    report: Optional[RegularityReport] = None
    error_message: Optional[str] = None
    processing_time: float = 0.0


@dataclass(frozen=True)
class SweepResult:
    successful_results: List[SweepInstanceResult]
    failed_results: List[SweepInstanceResult]
    start_time: float
    end_time: float

    @property
    def total(self) -> int:
        return len(self.successful_results) + len(self.failed_results)

    @property
    def processing_time(self) -> float:
        return self.end_time - self.start_time


@dataclass(frozen=True)
class ExportResult:
    """
    Result of an export operation.

    Args:
        success (bool): Whether the export was successful.
        file_path (Optional[str]): Path to the exported file (if successful).
        records_exported (int): Number of records exported.
        error_message (Optional[str]): Error message if export failed.

    Raises:
        ModelValidationError: If export result fields are inconsistent.
    """

    success: bool
    file_path: Optional[str] = None
    records_exported: int = 0
    error_message: Optional[str] = None

    def __post_init__(self):
        if self.success:
            if not self.file_path:
                raise ModelValidationError("Successful export must have a file_path")
            if self.error_message:
                raise ModelValidationError("Successful export should not have an error_message")
        else:
            if not self.error_message:
                raise ModelValidationError("Failed export must have an error_message")
            if self.records_exported > 0:
                raise ModelValidationError("Failed export should not have records_exported > 0")
