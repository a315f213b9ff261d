#!/usr/bin/env python3
# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""
Corpus-scale integration tests for graviton-sim.

Every scenario under scenarios/ is run end to end with an invariant sweep
after every tick; together they cover more than ten thousand ticks. Every
scenario is also rerun under two seeds to check byte-identical metrics.
"""

import os
import sys
import tempfile
import unittest

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "../..")))

from graviton_sim.constants import MAX_SEED, UNIT  # noqa: E402
from graviton_sim.engine import run_scenario  # noqa: E402
from graviton_sim.invariants import INVARIANTS, InvariantAuditor  # noqa: E402
from graviton_sim.metrics import write_metrics  # noqa: E402
from graviton_sim.scenario import load_scenario  # noqa: E402
from tests.builders import CORPUS, SCENARIO_DIR  # noqa: E402


def _audited_run(path: str, **overrides):
    scenario = load_scenario(path).with_overrides(audit_every=1, **overrides)
    auditor = InvariantAuditor()
    engine, summary = run_scenario(scenario, auditor)
    return engine, summary, auditor.report


@pytest.mark.slow
class TestCorpus(unittest.TestCase):
    """Each corpus scenario runs clean with a sweep every tick."""

    def test_corpus_is_large_enough(self):
        self.assertGreaterEqual(len(CORPUS), 6)
        total = sum(load_scenario(path).run.ticks for path in CORPUS)
        self.assertGreaterEqual(total, 10_000)

    def test_every_scenario_holds_every_invariant_every_tick(self):
        for path in CORPUS:
            with self.subTest(scenario=os.path.basename(path)):
                _, summary, report = _audited_run(path)
                self.assertTrue(report.ok, "\n".join(report.lines()))
                for name, _ in INVARIANTS:
                    self.assertEqual(report.checks[name], summary.ticks)
                self.assertEqual(summary.claimed + summary.pending + summary.residual, summary.emitted)


@pytest.mark.slow
class TestRguSupply(unittest.TestCase):
    """RGU supply equals initial supply plus claims minus every burn."""

    def _assert_identity(self, summary):
        self.assertEqual(
            summary.rgu_supply,
            summary.initial_rgu_supply + summary.claimed - summary.fee_burns - summary.deposit_burns,
        )

    def test_failed_proposals_burn_their_deposits(self):
        _, summary, report = _audited_run(str(SCENARIO_DIR / "governance_lifecycle.yaml"))
        self.assertTrue(report.ok)
        self.assertEqual(summary.proposals, {"applied": 3, "failed": 2})
        self.assertEqual(summary.deposit_burns, 30 * UNIT)
        self.assertEqual(summary.action_failures, 0)
        self._assert_identity(summary)

    def test_unwrap_fees_outpace_claims(self):
        _, summary, report = _audited_run(str(SCENARIO_DIR / "bridger_fees.ini"))
        self.assertTrue(report.ok)
        self.assertGreater(summary.claimed, 0)
        self.assertGreaterEqual(summary.fee_burns, summary.claimed)
        self.assertLess(summary.rgu_supply, summary.initial_rgu_supply)
        self._assert_identity(summary)


def _metrics_bytes(path: str, seed: int, output_format: str = "csv") -> bytes:
    engine, _ = run_scenario(load_scenario(path).with_overrides(seed=seed, ticks=300))
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, "metrics")
        write_metrics(out, engine.metrics.columns(), engine.metrics.rows, output_format)
        with open(out, "rb") as fh:
            return fh.read()


@pytest.mark.parametrize("seed", [7, MAX_SEED])
@pytest.mark.parametrize("path", CORPUS, ids=os.path.basename)
def test_repeat_runs_are_byte_identical(path: str, seed: int) -> None:
    assert _metrics_bytes(path, seed) == _metrics_bytes(path, seed)
    assert _metrics_bytes(path, seed, "records") == _metrics_bytes(path, seed, "records")


def test_seed_changes_the_random_walk() -> None:
    path = str(SCENARIO_DIR / "arbitrage_walk.yaml")
    assert _metrics_bytes(path, 1) != _metrics_bytes(path, 2)


if __name__ == "__main__":
    unittest.main()
