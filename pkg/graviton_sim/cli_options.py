# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""Shared CLI option specifications for parser/config synchronization."""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

from graviton_sim.metrics import OUTPUT_FORMATS

COMMANDS: Tuple[str, ...] = ("validate", "run", "sweep", "audit")


@dataclass(frozen=True)
class OptionSpec:
    """Specification for one CLI option and the subcommands that accept it."""

    dest: str
    flags: Tuple[str, ...]
    default: Any
    help_text: str
    value_type: Optional[type] = None
    choices: Optional[Tuple[str, ...]] = None
    commands: Tuple[str, ...] = COMMANDS
    config_key: Optional[str] = None


CLI_OPTION_SPECS: Tuple[OptionSpec, ...] = (
    OptionSpec(
        dest="log_level",
        flags=("--log-level",),
        value_type=str,
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
        default="WARNING",
        help_text="Logging level for diagnostics on stderr (default: WARNING)",
        config_key="log_level",
    ),
    OptionSpec(
        dest="log_file",
        flags=("--log-file",),
        value_type=str,
        default=None,
        help_text="Optional log file path for persistent logging",
        config_key="log_file",
    ),
    OptionSpec(
        dest="seed",
        flags=("--seed",),
        value_type=int,
        default=None,
        help_text="Override the scenario seed",
        commands=("run", "audit"),
    ),
    OptionSpec(
        dest="ticks",
        flags=("--ticks",),
        value_type=int,
        default=None,
        help_text="Override the scenario run length in ticks",
        commands=("run", "sweep", "audit"),
    ),
    OptionSpec(
        dest="format",
        flags=("--format",),
        value_type=str,
        choices=OUTPUT_FORMATS,
        default="csv",
        help_text="Metrics output format: csv (header first) or records (one JSON object per line)",
        commands=("run", "sweep"),
        config_key="format",
    ),
    OptionSpec(
        dest="audit_every",
        flags=("--audit-every",),
        value_type=int,
        default=None,
        help_text="Run the invariant sweep every K ticks (default: the scenario's audit_every, else 1)",
        commands=("run", "sweep"),
        config_key="audit_every",
    ),
    OptionSpec(
        dest="jobs",
        flags=("-j", "--jobs"),
        value_type=int,
        default=1,
        help_text="Number of sweep runs executed in parallel (default: 1)",
        commands=("sweep",),
        config_key="jobs",
    ),
)


def build_config_field_types() -> Dict[str, type]:
    """Build config field type mapping from CLI option specs."""
    field_types: Dict[str, type] = {}
    for spec in CLI_OPTION_SPECS:
        if spec.config_key is not None and spec.value_type is not None:
            field_types[spec.config_key] = spec.value_type
    return field_types


def specs_for(command: str) -> Tuple[OptionSpec, ...]:
    return tuple(spec for spec in CLI_OPTION_SPECS if command in spec.commands)
