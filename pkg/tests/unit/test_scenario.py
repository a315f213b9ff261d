#!/usr/bin/env python3
# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""
Unit tests for graviton_sim.scenario.

Covers:
- Value parsers for amounts, integers, ratios, booleans, points and holdings
- INI and YAML loading into the same model
- Issue collection with section/key paths, errors and warnings
- Run overrides
"""

from fractions import Fraction

import pytest

from graviton_sim.constants import MAX_SEED, UNIT
from graviton_sim.errors import ValidationError
from graviton_sim.scenario import (
    ScenarioValidationError,
    check_scenario,
    load_scenario,
    parse_amount,
    parse_bool,
    parse_holdings,
    parse_int,
    parse_points,
    parse_ratio,
)
from tests.builders import MINIMAL_SCENARIO, MINIMAL_SCENARIO_YAML


def _paths(report, severity="error"):
    return [issue.path for issue in report.issues if issue.severity == severity]


class TestParsers:
    def test_parse_amount(self):
        assert parse_amount("12.5") == 12_500_000
        assert parse_amount("1_000") == 1_000 * UNIT
        assert parse_amount("0.000001") == 1
        for bad in ("0.0000001", "-1", "abc", "1/0"):
            with pytest.raises(ValueError):
                parse_amount(bad)

    def test_parse_int_bounds(self):
        assert parse_int("42", 0, 100) == 42
        with pytest.raises(ValueError, match="out of range"):
            parse_int("101", 0, 100)
        with pytest.raises(ValueError):
            parse_int("4.2")

    def test_parse_ratio(self):
        assert parse_ratio("3/2") == Fraction(3, 2)
        assert parse_ratio("0.25") == Fraction(1, 4)
        assert parse_ratio("0", positive=False) == 0
        with pytest.raises(ValueError):
            parse_ratio("0")

    def test_parse_bool(self):
        assert parse_bool("Yes") is True
        assert parse_bool("off") is False
        with pytest.raises(ValueError):
            parse_bool("maybe")

    def test_parse_points(self):
        assert parse_points("0:1, 10:4,20:1/4") == ((0, Fraction(1)), (10, Fraction(4)), (20, Fraction(1, 4)))
        for bad in ("", "0:1,0:2", "5", "0:-1"):
            with pytest.raises(ValueError):
                parse_points(bad)

    def test_parse_holdings(self):
        assert parse_holdings("USDT:100 wUSDT@gw:5") == [("USDT", "100"), ("wUSDT@gw", "5")]
        with pytest.raises(ValueError):
            parse_holdings("USDT100")


class TestLoading:
    def test_minimal_ini(self, write_scenario):
        scenario = load_scenario(write_scenario(MINIMAL_SCENARIO))
        assert [c.name for c in scenario.chains] == ["ethereum", "solana"]
        assert [t.kind for t in scenario.tokens] == ["origin", "wrapped", "origin", "rgu"]
        assert scenario.pools[0].seed_w == 1_000 * UNIT
        assert scenario.pools[0].fee_bps == 30
        wrapped = [h for h in scenario.balances if h.token == "wUSDC"]
        assert [(h.account, h.gateway) for h in wrapped] == [("lp", "gw")]
        assert scenario.emission.e0 == 10 * UNIT
        assert scenario.lp_fraction_bps == 8_000
        assert (scenario.run.ticks, scenario.run.seed, scenario.run.audit_every) == (20, 3, 1)
        assert [a.label for a in scenario.agents] == ["noise", "mover"]
        assert scenario.agents[1].params["policy"] == "alternate"

    def test_yaml_matches_ini(self, write_scenario):
        from_ini = load_scenario(write_scenario(MINIMAL_SCENARIO))
        from_yaml = load_scenario(write_scenario(MINIMAL_SCENARIO_YAML, name="scenario.yaml"))
        for name in ("chains", "tokens", "gateways", "pools", "balances", "emission", "governance", "feeds", "run"):
            assert getattr(from_yaml, name) == getattr(from_ini, name), name
        assert [(a.label, a.kind, a.params) for a in from_yaml.agents] == [(a.label, a.kind, a.params) for a in from_ini.agents]

    def test_dangling_reference_is_reported_with_its_path(self, write_scenario):
        text = MINIMAL_SCENARIO.replace("p = token_w=wUSDC", "p = token_w=wXYZ")
        scenario, report = check_scenario(write_scenario(text))
        assert scenario is None
        assert "pools.p.token_w" in _paths(report)
        assert any(str(issue) == "error: [pools.p.token_w] unknown token 'wXYZ'" for issue in report.issues)

    def test_every_problem_is_collected(self, write_scenario):
        text = MINIMAL_SCENARIO.replace("latency=1", "latency=1 colour=red") + "\n[extras]\nx = 1\n"
        text = text.replace("e0 = 10", "e0 = 10\nhalf_life = 3")
        scenario, report = check_scenario(write_scenario(text))
        assert scenario is None
        assert {"gateways.gw.colour", "extras", "emission.half_life"} <= set(_paths(report))
        assert report.error_count >= 3

    def test_reserved_accounts_rejected(self, write_scenario):
        text = MINIMAL_SCENARIO.replace("trader = USDC:50 SOL:100", "pool:0 = SOL:1")
        _, report = check_scenario(write_scenario(text))
        assert "balances.pool:0" in _paths(report)

    def test_second_gateway_needs_multi_gateway(self, write_scenario):
        text = MINIMAL_SCENARIO.replace(
            "gw = token=USDC wrapped=wUSDC provider=operator latency=1",
            "gw = token=USDC wrapped=wUSDC provider=operator latency=1\ngw2 = token=USDC wrapped=wUSDC provider=other",
        )
        _, report = check_scenario(write_scenario(text))
        assert "gateways.gw2.wrapped" in _paths(report)

        scenario, report = check_scenario(write_scenario(text + "multi_gateway = true\n"))
        assert scenario is not None
        assert len(scenario.gateways) == 2

    def test_late_schedule_entry_is_only_a_warning(self, write_scenario):
        text = MINIMAL_SCENARIO.replace("[run]", "[schedule]\nlate = tick=25 action=claim_gateway gateway=gw\n\n[run]")
        scenario, report = check_scenario(write_scenario(text))
        assert scenario is not None
        assert _paths(report, "warning") == ["schedule.late.tick"]

    def test_governance_labels_become_referencable(self, write_scenario):
        text = MINIMAL_SCENARIO.replace(
            "[run]",
            "[schedule]\n"
            "listing = tick=1 action=submit account=lp deposit=1 payload=add_pool token_w=GTON token_o=SOL new=gton_sol\n"
            "yes = tick=2 action=vote proposal=listing account=lp support=yes\n"
            "fund = tick=15 action=add_liquidity pool=gton_sol account=lp amount_w=1 amount_o=1\n"
            "\n[run]",
        )
        scenario, report = check_scenario(write_scenario(text))
        assert report.error_count == 0, [str(i) for i in report.issues]
        assert [a.action for a in scenario.schedule] == ["submit", "vote", "add_liquidity"]

    def test_malformed_files(self, write_scenario):
        _, report = check_scenario(write_scenario("[run\nticks = 1\n"))
        assert any("malformed INI" in issue.reason for issue in report.issues)
        _, report = check_scenario(write_scenario("- just\n- a list\n", name="bad.yaml"))
        assert any("top level must be a mapping" in issue.reason for issue in report.issues)

    def test_load_raises_with_report(self, write_scenario):
        with pytest.raises(ScenarioValidationError) as info:
            load_scenario(write_scenario("[run]\nticks = 5\n"))
        assert "chains" in _paths(info.value.report)
        assert isinstance(info.value, ValidationError)

    def test_missing_file_raises_oserror(self, tmp_path):
        with pytest.raises(OSError):
            check_scenario(str(tmp_path / "absent.ini"))


class TestOverrides:
    def test_with_overrides(self, write_scenario):
        scenario = load_scenario(write_scenario(MINIMAL_SCENARIO))
        changed = scenario.with_overrides(seed=7, ticks=0)
        assert (changed.run.seed, changed.run.ticks) == (7, 0)
        assert scenario.run.seed == 3
        with pytest.raises(ValidationError):
            scenario.with_overrides(seed=MAX_SEED + 1)
        with pytest.raises(ValidationError):
            scenario.with_overrides(audit_every=0)
