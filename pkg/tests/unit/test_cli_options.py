#!/usr/bin/env python3
# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""Tests for the shared CLI option table."""

from graviton_sim.cli import build_parser
from graviton_sim.cli_options import CLI_OPTION_SPECS, COMMANDS, build_config_field_types, specs_for


def test_option_flags_are_unique() -> None:
    flags = [flag for spec in CLI_OPTION_SPECS for flag in spec.flags]
    assert len(flags) == len(set(flags))


def test_every_spec_targets_known_commands() -> None:
    for spec in CLI_OPTION_SPECS:
        assert spec.commands
        assert set(spec.commands) <= set(COMMANDS)


def test_config_field_types_follow_the_table() -> None:
    assert build_config_field_types() == {
        "log_level": str,
        "log_file": str,
        "format": str,
        "audit_every": int,
        "jobs": int,
    }


def test_specs_for_command() -> None:
    assert [spec.dest for spec in specs_for("validate")] == ["log_level", "log_file"]
    assert [spec.dest for spec in specs_for("sweep")] == ["log_level", "log_file", "ticks", "format", "audit_every", "jobs"]


def test_parser_registers_every_spec() -> None:
    help_text = build_parser().format_help()
    for command in COMMANDS:
        assert command in help_text
