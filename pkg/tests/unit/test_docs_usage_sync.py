#!/usr/bin/env python3
# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""Regression guards for usage doc synchronization."""

from pathlib import Path

from graviton_sim.cli_options import CLI_OPTION_SPECS, COMMANDS


def _usage_text() -> str:
    repo_root = Path(__file__).resolve().parents[2]
    return (repo_root / "docs" / "usage.md").read_text(encoding="utf-8")


def test_usage_doc_lists_every_subcommand() -> None:
    text = _usage_text()
    for command in COMMANDS:
        assert f"graviton-sim {command}" in text


def test_usage_doc_lists_every_option() -> None:
    text = _usage_text()
    for spec in CLI_OPTION_SPECS:
        assert spec.flags[-1] in text
    assert "--no-config" in text


def test_usage_doc_lists_exit_codes() -> None:
    text = _usage_text()
    for code in ("`0`", "`1`", "`2`", "`3`", "`4`"):
        assert code in text
