# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""
Command-line entry point: ``graviton-sim validate|run|sweep|audit``.

Exit codes are a stable contract: 0 success, 1 I/O failure, 2 invalid
scenario, 3 invariant violation, 4 agent error.
"""

import argparse
import concurrent.futures
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence, Tuple

from graviton_sim.cli_options import CLI_OPTION_SPECS, COMMANDS, OptionSpec, specs_for
from graviton_sim.config import load_config
from graviton_sim.constants import (
    EXIT_AGENT_ERROR,
    EXIT_INVARIANT_VIOLATION,
    EXIT_IO_ERROR,
    EXIT_OK,
    EXIT_VALIDATION_ERROR,
    MAX_SEED,
)
from graviton_sim.engine import Engine
from graviton_sim.errors import AgentError, InvariantViolation, ValidationError
from graviton_sim.invariants import InvariantAuditor
from graviton_sim.metrics import suffixed_path, write_metrics
from graviton_sim.scenario import Scenario, ScenarioValidationError, check_scenario, load_scenario

logger = logging.getLogger(__name__)

COMMAND_HELP = {
    "validate": "Parse and cross-check a scenario file",
    "run": "Run one scenario and write its metrics",
    "sweep": "Run one scenario over a range of seeds",
    "audit": "Run a scenario with an invariant sweep every tick and print a per-invariant report",
}


def _configure_logging(log_level: str, log_file: Optional[str]) -> None:
    """Configure logging handlers for CLI execution."""
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(os.path.expanduser(log_file), encoding="utf-8"))
    logging.basicConfig(
        level=getattr(logging, log_level, logging.WARNING),
        format="%(message)s",
        handlers=handlers,
        force=True,
    )


def _add_option_from_spec(parser: argparse.ArgumentParser, spec: OptionSpec) -> None:
    """Register one option spec on the argparse parser."""
    kwargs: Dict[str, Any] = {
        "dest": spec.dest,
        "default": None,
        "help": spec.help_text,
    }
    if spec.value_type is not None:
        kwargs["type"] = str.upper if spec.dest == "log_level" else spec.value_type
    if spec.choices:
        kwargs["choices"] = list(spec.choices)
    parser.add_argument(*spec.flags, **kwargs)


def _apply_option_defaults(args: argparse.Namespace) -> None:
    """Apply defaults for unset values after config overlay."""
    for spec in CLI_OPTION_SPECS:
        if args.command in spec.commands and getattr(args, spec.dest, None) is None:
            setattr(args, spec.dest, spec.default)


def _apply_config_to_args(args: argparse.Namespace, config: Dict[str, Any]) -> None:
    """Overlay config file values onto options the command line left unset."""
    for key, value in config.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)


def parse_seed_range(text: str) -> List[int]:
    """Parse ``a..b`` (inclusive) or a comma-separated list of seeds."""
    text = text.strip()
    if ".." in text:
        start_text, _, end_text = text.partition("..")
        start, end = int(start_text), int(end_text)
        if end < start:
            raise ValueError(f"empty seed range '{text}'")
        seeds = list(range(start, end + 1))
    else:
        seeds = [int(part) for part in text.split(",") if part.strip()]
    if not seeds:
        raise ValueError("no seeds given")
    for seed in seeds:
        if not 0 <= seed <= MAX_SEED:
            raise ValueError(f"seed {seed} is outside 0..{MAX_SEED}")
    return seeds


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graviton-sim",
        description="Graviton wrapped-token liquidity protocol engine and multi-chain scenario simulator",
        epilog="Exit codes: 0 ok, 1 I/O error, 2 invalid scenario, 3 invariant violation, 4 agent error.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="{" + ",".join(COMMANDS) + "}")
    for command in COMMANDS:
        sub = subparsers.add_parser(command, help=COMMAND_HELP[command], description=COMMAND_HELP[command])
        if command in ("validate", "audit"):
            sub.add_argument("config", help="Scenario file (INI or YAML)")
        else:
            sub.add_argument("--config", required=True, help="Scenario file (INI or YAML)")
        if command == "run":
            sub.add_argument("--out", required=True, help="Metrics output path")
        if command == "sweep":
            sub.add_argument("--seeds", required=True, help="Seeds to run: a..b (inclusive) or a,b,c")
            sub.add_argument("--out-dir", required=True, help="Directory for the per-seed metrics files")
        for spec in specs_for(command):
            _add_option_from_spec(sub, spec)
        sub.add_argument(
            "--no-config",
            action="store_true",
            default=False,
            help="Skip loading ~/.graviton-sim.conf config file",
        )
    return parser


def handle_options(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse and validate command-line arguments."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.no_config:
        try:
            config = load_config()
            _apply_config_to_args(args, config)
        except (ValueError, ImportError) as exc:
            parser.error(str(exc))

    _apply_option_defaults(args)
    args.log_level = str(args.log_level).upper()
    if args.log_level not in ("DEBUG", "INFO", "WARNING", "ERROR"):
        parser.error("--log-level must be one of DEBUG|INFO|WARNING|ERROR")
    if getattr(args, "audit_every", None) is not None and args.audit_every < 1:
        parser.error("--audit-every must be a positive integer.")
    if getattr(args, "jobs", None) is not None and args.jobs < 1:
        parser.error("--jobs must be a positive integer.")
    if getattr(args, "ticks", None) is not None and args.ticks < 0:
        parser.error("--ticks must not be negative.")
    if getattr(args, "format", None) is not None and args.format not in ("csv", "records"):
        parser.error("--format must be csv or records")
    if args.command == "sweep":
        try:
            args.seed_list = parse_seed_range(args.seeds)
        except ValueError as exc:
            parser.error(f"--seeds: {exc}")
    return args


def _print_issues(path: str, scenario_report: Any) -> None:
    for issue in scenario_report.issues:
        print(f"{path}: {issue}", file=sys.stderr)


def _load(path: str) -> Scenario:
    """Load a scenario, printing every issue when it is invalid."""
    try:
        return load_scenario(path)
    except ScenarioValidationError as exc:
        _print_issues(path, exc.report)
        raise


def _error_exit(exc: BaseException) -> int:
    """Report ``exc`` on stderr and map it to the exit-code contract."""
    if isinstance(exc, InvariantViolation):
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT_VIOLATION
    if isinstance(exc, AgentError):
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_AGENT_ERROR
    if isinstance(exc, ValidationError):
        if not isinstance(exc, ScenarioValidationError):
            print(f"Error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION_ERROR
    print(f"Error: {exc}", file=sys.stderr)
    return EXIT_IO_ERROR


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        scenario, report = check_scenario(args.config)
    except OSError as exc:
        print(f"Error: cannot read '{args.config}': {exc}", file=sys.stderr)
        return EXIT_IO_ERROR
    except ImportError as exc:
        return _error_exit(exc)
    _print_issues(args.config, report)
    if scenario is None:
        print(f"Error: {args.config} contains {report.error_count} error(s).", file=sys.stderr)
        return EXIT_VALIDATION_ERROR
    try:
        Engine(scenario)
    except ValidationError as exc:
        return _error_exit(exc)
    print("OK")
    return EXIT_OK


def _run_to_file(
    config: str, seed: Optional[int], ticks: Optional[int], audit_every: Optional[int], out: str, output_format: str
) -> Tuple[int, List[str]]:
    """Run one (scenario, seed) and write its metrics; returns (exit code, summary lines)."""
    try:
        scenario = _load(config).with_overrides(seed=seed, ticks=ticks, audit_every=audit_every)
        engine = Engine(scenario)
        summary = engine.run()
        write_metrics(out, engine.metrics.columns(), engine.metrics.rows, output_format)
    except (ValidationError, InvariantViolation, AgentError, OSError, ImportError) as exc:
        return _error_exit(exc), []
    return EXIT_OK, summary.lines() + [f"metrics: {out} ({len(engine.metrics.rows)} row(s), {output_format})"]


def cmd_run(args: argparse.Namespace) -> int:
    code, lines = _run_to_file(args.config, args.seed, args.ticks, args.audit_every, args.out, args.format)
    for line in lines:
        print(line)
    return code


def _sweep_task(task: Tuple[str, int, Optional[int], Optional[int], str, str]) -> Tuple[int, int, List[str]]:
    config, seed, ticks, audit_every, out, output_format = task
    code, lines = _run_to_file(config, seed, ticks, audit_every, out, output_format)
    return seed, code, lines


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        os.makedirs(args.out_dir, exist_ok=True)
    except OSError as exc:
        print(f"Error: cannot create '{args.out_dir}': {exc}", file=sys.stderr)
        return EXIT_IO_ERROR
    stem = os.path.splitext(os.path.basename(args.config))[0]
    tasks = [
        (args.config, seed, args.ticks, args.audit_every, suffixed_path(args.out_dir, stem, seed, args.format), args.format)
        for seed in args.seed_list
    ]
    if args.jobs > 1 and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_task, tasks))
    else:
        results = [_sweep_task(task) for task in tasks]

    exit_code = EXIT_OK
    for (seed, code, _), task in zip(results, tasks):
        status = "ok" if code == EXIT_OK else f"failed (exit {code})"
        print(f"seed {seed}: {status} -> {task[4]}")
        if code != EXIT_OK and exit_code == EXIT_OK:
            exit_code = code
    return exit_code


def cmd_audit(args: argparse.Namespace) -> int:
    auditor = InvariantAuditor()
    try:
        scenario = _load(args.config).with_overrides(seed=args.seed, ticks=args.ticks, audit_every=1)
        engine = Engine(scenario)
        engine.run(sweep=auditor)
    except (ValidationError, AgentError, OSError, ImportError) as exc:
        return _error_exit(exc)
    print(f"audit of {args.config} (seed {scenario.run.seed}, {scenario.run.ticks} tick(s))")
    for line in auditor.report.lines():
        print(line)
    if not auditor.report.ok:
        print(f"Error: {auditor.report.violation_count} invariant violation(s).", file=sys.stderr)
        return EXIT_INVARIANT_VIOLATION
    return EXIT_OK


COMMAND_HANDLERS = {
    "validate": cmd_validate,
    "run": cmd_run,
    "sweep": cmd_sweep,
    "audit": cmd_audit,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entrypoint for the CLI - parses arguments and dispatches the subcommand."""
    args = handle_options(argv)
    try:
        _configure_logging(args.log_level, args.log_file)
    except OSError as exc:
        print(f"Error: cannot open log file '{args.log_file}': {exc}", file=sys.stderr)
        return EXIT_IO_ERROR
    return COMMAND_HANDLERS[args.command](args)
