"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

Logging setup shared by the numerical core, the services and the CLI.

Log records always go to stderr: stdout is reserved for the PASS/FAIL lines
the harness prints, which downstream scripts parse. An optional file handler
keeps the full DEBUG stream (quadrature refinements, cache traffic, per-block
timings) next to the reports of a run.
"""

import logging
import sys
import time
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterator, Optional

LOG_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)s | %(funcName)s:%(lineno)d | %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
CONSOLE_FORMAT = "%(levelname)-8s | %(name)s | %(message)s"

# Third-party loggers that are noisy at INFO.
QUIET_MODULES = ("matplotlib", "matplotlib.font_manager", "PIL")


def setup_logging(
    level: int = logging.INFO,
    log_file: Optional[str] = None,
    log_dir: Optional[str] = None,
    console: bool = True,
) -> logging.Logger:
    """
    Configure the root logger for one harness run.

    Args:
        level: Level of the stderr handler and of the ``kinetic_hypo`` loggers.
        log_file: File name for a DEBUG-level log. The file is created as
            ``<log_dir>/<timestamp>_<log_file>``.
        log_dir: Directory of the log file (default ``logs``).
        console: Attach the stderr handler.

    Returns:
        logging.Logger: The root logger.

    Example:
        >>> setup_logging(logging.DEBUG, log_file="verify-l2.log", log_dir="results")
    """
    root = logging.getLogger()
    for old in list(root.handlers):
        root.removeHandler(old)
        old.close()
    root.setLevel(logging.DEBUG if log_file else level)

    if console:
        handler = logging.StreamHandler(sys.stderr)
        handler.setLevel(level)
        handler.setFormatter(logging.Formatter(CONSOLE_FORMAT))
        root.addHandler(handler)

    if log_file:
        directory = Path(log_dir or "logs")
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{datetime.now().strftime('%Y%m%d_%H%M%S')}_{log_file}"
        file_handler = logging.FileHandler(path, encoding="utf-8")
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT, LOG_DATE_FORMAT))
        root.addHandler(file_handler)
        root.info(f"Logging to file: {path}")

    configure_module_levels(level)
    return root


def configure_module_levels(level: int) -> None:
    """Quiet third-party loggers and align the package loggers with ``level``."""
    for name in QUIET_MODULES:
        logging.getLogger(name).setLevel(logging.WARNING)
    logging.getLogger("kinetic_hypo").setLevel(min(level, logging.getLogger().level))


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)


@contextmanager
def log_performance(logger: logging.Logger, operation: str) -> Iterator[Dict[str, float]]:
    """
    Time a pipeline stage.

    The yielded dictionary receives ``seconds`` when the stage ends, so callers
    can put the wall time into a report.

    Example:
        >>> with log_performance(logger, "resolvent field (lambda=1)") as timing:
        ...     field = build_resolvent_field(path, source, 1.0, quad)
        >>> timing["seconds"]
    """
    timing: Dict[str, float] = {}
    logger.info(f"Starting {operation}")
    start = time.perf_counter()
    try:
        yield timing
    except Exception as e:
        timing["seconds"] = time.perf_counter() - start
        logger.error(f"Failed {operation} after {timing['seconds']:.3f}s: {e}")
        raise
    timing["seconds"] = time.perf_counter() - start
    logger.info(f"Completed {operation} in {timing['seconds']:.3f}s")


# =============================================================================
# Structured events
# =============================================================================


def log_experiment_request(logger: logging.Logger, config: Dict[str, Any], subcommand: str) -> None:
    """
    Log the start of a subcommand with its full configuration as ``extra``.

    Seed and phase-space dimension go into the message itself; everything else
    is only in the structured payload.
    """
    pieces = config.get("path", {}).get("nu") or [{}]
    logger.info(
        f"Experiment requested: {subcommand} (seed={config.get('seed')}, d={pieces[0].get('dim')})",
        extra={
            "config": config,
            "subcommand": subcommand,
            "timestamp": datetime.now().isoformat(),
        },
    )


def log_cache_operation(
    logger: logging.Logger, operation: str, key: str, hit: bool = False, size: Optional[int] = None
) -> None:
    """Record a cache lookup or insertion at DEBUG level."""
    logger.debug(
        f"Cache {operation} {key}" + (" (hit)" if hit else ""),
        extra={"cache_key": key, "cache_hit": hit, "cache_size": size},
    )


def log_error_with_context(logger: logging.Logger, error: Exception, operation: str, **context) -> None:
    """
    Log a failed stage with the exception's ``details`` (for package errors)
    merged into the context payload.
    """
    details = dict(getattr(error, "details", None) or {})
    details.update(context)
    logger.error(
        f"Error during {operation}: {error}",
        extra={
            "error_type": type(error).__name__,
            "operation": operation,
            "context": details,
        },
        exc_info=logger.isEnabledFor(logging.DEBUG),
    )
