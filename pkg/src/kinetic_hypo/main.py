"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

Command-line entry point.

Parses the subcommand and global flags, loads the JSON configuration, runs the
pipeline, writes CSV/JSON tables and SVG plots to the output directory and
prints one PASS/FAIL line per assertion on stdout. Logging goes to stderr.

Exit codes: 0 all assertions pass, 1 an assertion failed, 2 configuration or
file error, 3 numerical accuracy, consistency or degeneracy error.
"""

import argparse
import dataclasses
import logging
import math
import os
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from kinetic_hypo import __version__
from kinetic_hypo.config.logging import (
    get_logger,
    log_error_with_context,
    log_experiment_request,
    log_performance,
    setup_logging,
)
from kinetic_hypo.config.settings import EXIT_CODES
from kinetic_hypo.core.exceptions import (
    AccuracyError,
    ConfigurationError,
    ConsistencyError,
    DegeneracyError,
    DomainError,
    FileError,
    KineticHypoError,
    ValidationError,
)
from kinetic_hypo.core.kinetic_semigroup import build_resolvent_field
from kinetic_hypo.core.models import AssertionOutcome, ExportResult, ModelValidationError
from kinetic_hypo.core.params import ExperimentConfig
from kinetic_hypo.core.parallel import set_default_workers
from kinetic_hypo.services import (
    DataManager,
    PlotService,
    RegularityService,
    SweepRunner,
    ValidationService,
)

logger = get_logger(__name__)

SUBCOMMANDS = (
    "verify-l2",
    "verify-lp",
    "mc-validate",
    "boltzmann-check",
    "geometry-check",
    "sweep",
    "symbol",
)

CONFIG_ERRORS = (ConfigurationError, ValidationError, DomainError, FileError, ModelValidationError)
NUMERICAL_ERRORS = (AccuracyError, ConsistencyError, DegeneracyError)

Tables = Dict[str, Dict[str, Any]]


# =============================================================================
# Argument parsing
# =============================================================================


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kinetic-hypo",
        description="Verification harness for nonlocal kinetic Fokker-Planck equations "
        "driven by symmetric alpha-stable noise.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON configuration file")
    common.add_argument("--out", metavar="DIR", help="output directory (default: config output.out_dir)")
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--threads", type=int, default=1, help="worker threads (default: 1)")
    common.add_argument(
        "--quad-scale", type=float, default=1.0, help="multiplier of every quadrature node count"
    )
    common.add_argument("--format", choices=("csv", "json"), help="report format")
    common.add_argument("--no-plots", action="store_true", help="skip SVG plots")
    common.add_argument(
        "--log-level", default="INFO", choices=("DEBUG", "INFO", "WARNING", "ERROR")
    )
    common.add_argument(
        "--log-file", metavar="NAME", help="also write a DEBUG log to <out or logs>/<timestamp>_NAME"
    )

    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")
    sub.required = True
    l2 = sub.add_parser("verify-l2", parents=[common], help="L2 regularity ratios and interpolation slack")
    l2.add_argument(
        "--save-field", action="store_true", help="write u^lambda at the first lambda to field.csv"
    )
    sub.add_parser("verify-lp", parents=[common], help="Lp regularity ratios and scaling identity")
    mc = sub.add_parser("mc-validate", parents=[common], help="Monte Carlo law checks")
    mc.add_argument("--save-ensemble", action="store_true", help="write ensemble.npz to the output directory")
    mc.add_argument("--ensemble", metavar="PATH", help="also check a stored ensemble file")
    sub.add_parser("boltzmann-check", parents=[common], help="Carleman representation checks")
    sub.add_parser("geometry-check", parents=[common], help="kinetic ball geometry checks")
    sweep = sub.add_parser("sweep", parents=[common], help="alpha x lambda sweep of the L2 pipeline")
    sweep.add_argument("--alphas", type=float, nargs="+", help="stability indices (default: config)")
    sweep.add_argument("--no-refine", action="store_true", help="skip quadrature doubling")
    sub.add_parser("symbol", parents=[common], help="stability constants and symbol bounds")
    return parser


def load_config(args: argparse.Namespace) -> Optional[ExperimentConfig]:
    """
    Load the configuration and apply the command-line overrides.

    Raises:
        ConfigurationError: If ``--config`` is missing for a subcommand that needs it.
        FileError: If the file does not exist.
    """
    if args.config is None:
        if args.command == "symbol":
            return None
        raise ConfigurationError(f"{args.command} requires --config PATH", operation="main.load_config")
    config = ExperimentConfig.load(args.config)
    updates: Dict[str, Any] = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.quad_scale != 1.0:
        try:
            updates["quadrature"] = config.quadrature.scaled(args.quad_scale)
        except ValueError as e:
            raise ConfigurationError(str(e), operation="main.load_config")
    return config.with_updates(**updates) if updates else config


# =============================================================================
# Subcommands
# =============================================================================
# Each command returns (tables, assertions, extra JSON fields).

CommandResult = Tuple[Tables, List[AssertionOutcome], Dict[str, Any]]


def _regularity(config: ExperimentConfig, out_dir: str, plots: bool, lp: bool) -> CommandResult:
    service = RegularityService()
    service.on_progress = lambda i, n, label: logger.info(f"[{i}/{n}] {label}")
    if not lp:
        config = config.with_updates(p_values=(2.0,))
    report = service.run_regularity(config, refine=True, with_bouchut=True)
    assertions = list(report.assertions)
    if lp:
        assertions.extend(service.scaling_assertions(config))
    if plots:
        plot_service = PlotService()
        for p in sorted(set(config.p_values)):
            plot_service.save_ratio_plot(report, out_dir, f"ratios_p{p:g}".replace(".", "p"), p)
    tables = {"regularity": report.to_table(), "bouchut": report.bouchut_table()}
    extra = {"plancherel_error": report.plancherel_error}
    return tables, assertions, extra


def cmd_verify_l2(args, config: ExperimentConfig, out_dir: str, plots: bool) -> CommandResult:
    tables, assertions, extra = _regularity(config, out_dir, plots, lp=False)
    if args.save_field:
        field = build_resolvent_field(
            config.path, config.source, config.lambdas[0], config.quadrature
        )
        path = os.path.join(out_dir, "field.csv")
        _check_exports([DataManager().export_spectral_field(field, path)])
    return tables, assertions, extra


def cmd_verify_lp(args, config: ExperimentConfig, out_dir: str, plots: bool) -> CommandResult:
    return _regularity(config, out_dir, plots, lp=True)


def cmd_mc_validate(args, config: ExperimentConfig, out_dir: str, plots: bool) -> CommandResult:
    service = ValidationService()
    data_manager = DataManager()
    stored = data_manager.load_ensemble(args.ensemble) if args.ensemble else None
    report = service.run_mc_validation(config)
    assertions = list(report.assertions)
    if stored is not None:
        assertions.append(service.check_ensemble(config, stored))
    if args.save_ensemble:
        ensemble = service.sample_ensemble(config)
        _check_exports([data_manager.export_ensemble(ensemble, os.path.join(out_dir, "ensemble.npz"))])
    tables = {"mc": report.to_table(), "moments": report.moments_table()}
    return tables, assertions, {"scaling": report.scaling}


def cmd_boltzmann_check(args, config: ExperimentConfig, out_dir: str, plots: bool) -> CommandResult:
    report = ValidationService().run_boltzmann_check(config)
    return {"collision": report.to_table()}, list(report.assertions), {"coarea": report.coarea}


def cmd_geometry_check(args, config: ExperimentConfig, out_dir: str, plots: bool) -> CommandResult:
    report = ValidationService().run_geometry_check(config)
    return {"geometry": report.to_table()}, list(report.assertions), {}


def cmd_symbol(args, config: Optional[ExperimentConfig], out_dir: str, plots: bool) -> CommandResult:
    service = ValidationService()
    if config is not None and config.alphas:
        report = service.run_symbol_table(alphas=config.alphas)
    else:
        report = service.run_symbol_table()
    return {"symbol": report.to_table()}, list(report.assertions), {}


def cmd_sweep(args, config: ExperimentConfig, out_dir: str, plots: bool) -> CommandResult:
    runner = SweepRunner(refine=not args.no_refine)
    runner.on_progress = lambda i, n, label: logger.info(f"Sweep instance {i}/{n}: {label}")
    sweep = runner.run_sweep(config, alphas=args.alphas or ())

    assertions: List[AssertionOutcome] = []
    tables: Tables = {}
    for instance in sweep.successful_results:
        name = "sweep_" + instance.label.replace("=", "_").replace(".", "p")
        tables[name] = instance.report.to_table()
        assertions.extend(
            dataclasses.replace(a, name=f"{a.name}[{instance.label}]")
            for a in instance.report.assertions
        )
    for instance in sweep.failed_results:
        assertions.append(
            AssertionOutcome(
                f"sweep_instance[{instance.label}]", False, math.nan, 0.0, instance.error_message
            )
        )
    if plots:
        PlotService().save_sweep_plot(sweep, out_dir)
    if args.format != "json" and config.output.format != "json":
        _check_exports(runner.export_results(sweep, out_dir))
        tables = {}
    return tables, assertions, {"failed": [i.label for i in sweep.failed_results]}


COMMANDS: Dict[str, Callable[..., CommandResult]] = {
    "verify-l2": cmd_verify_l2,
    "verify-lp": cmd_verify_lp,
    "mc-validate": cmd_mc_validate,
    "boltzmann-check": cmd_boltzmann_check,
    "geometry-check": cmd_geometry_check,
    "sweep": cmd_sweep,
    "symbol": cmd_symbol,
}


# =============================================================================
# Output
# =============================================================================


def _check_exports(results: Sequence[ExportResult]) -> None:
    failed = [r.error_message for r in results if not r.success]
    if failed:
        raise FileError(f"export failed: {'; '.join(failed)}", operation="main.export")


def _print_summary(command: str, assertions: Sequence[AssertionOutcome]) -> bool:
    for assertion in assertions:
        print(assertion.summary_line())
    passed = all(a.passed for a in assertions)
    n_failed = sum(not a.passed for a in assertions)
    print(f"{'PASS' if passed else 'FAIL'} {command} ({len(assertions) - n_failed}/{len(assertions)} assertions)")
    return passed


# =============================================================================
# Entry points
# =============================================================================


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand and return the process exit code.

    ``--help`` and ``--version`` exit through argparse with status 0; argument
    errors exit with status 2.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(getattr(logging, args.log_level), log_file=args.log_file, log_dir=args.out)
    set_default_workers(args.threads)

    try:
        config = load_config(args)
        out_dir = args.out or (config.output.out_dir if config else "results")
        fmt = args.format or (config.output.format if config else "csv")
        plots = not args.no_plots and (config.output.plots if config else False)
        log_experiment_request(logger, config.to_export_dict() if config else {}, args.command)

        os.makedirs(out_dir, exist_ok=True)
        with log_performance(logger, args.command):
            tables, assertions, extra = COMMANDS[args.command](args, config, out_dir, plots)

        document_extra = {
            "subcommand": args.command,
            "assertions": [dataclasses.asdict(a) for a in assertions],
            "config": config.to_export_dict() if config else None,
            **extra,
        }
        _check_exports(DataManager().export_report(tables, out_dir, fmt, document_extra))

    except CONFIG_ERRORS as e:
        print(f"ERROR {args.command}: {e}", file=sys.stderr)
        return EXIT_CODES["config_error"]
    except NUMERICAL_ERRORS as e:
        log_error_with_context(logger, e, args.command)
        print(f"ERROR {args.command}: {e}", file=sys.stderr)
        return EXIT_CODES["accuracy_error"]
    except KineticHypoError as e:
        log_error_with_context(logger, e, args.command)
        print(f"ERROR {args.command}: {e}", file=sys.stderr)
        return EXIT_CODES["config_error"]
    except OSError as e:
        print(f"ERROR {args.command}: {e}", file=sys.stderr)
        return EXIT_CODES["config_error"]

    if _print_summary(args.command, assertions):
        return EXIT_CODES["pass"]
    return EXIT_CODES["assertion_failure"]


def main():
    sys.exit(cli_main())


def run():
    """
    Entry point of the ``kinetic-hypo`` console script.
    """
    main()


if __name__ == "__main__":
    main()
