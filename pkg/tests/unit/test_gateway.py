#!/usr/bin/env python3
# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""Unit tests for graviton_sim.gateway lock, unwrap, zero-latency settlement and pending-queue ordering."""

import pytest

from graviton_sim.constants import UNIT
from graviton_sim.domain import PendingKind
from graviton_sim.errors import DuplicateGateway, InsufficientOutstanding, InsufficientRguForFee, ZeroAmount
from tests.builders import build_protocol


def test_lock_escrows_immediately_and_mints_after_latency() -> None:
    p = build_protocol(latency=2)
    p.fund("alice", t=100)

    p.gateways.lock(p.gateway, "alice", 60, now=0)
    gw = p.gateways.gateway(p.gateway)
    assert p.balance(p.token_t, "alice") == 40
    assert p.gateways.escrow(p.gateway) == 60
    assert gw.pending_total(PendingKind.MINT) == 60
    assert gw.outstanding == 0
    assert p.gateways.escrow_mismatches() == []

    assert p.gateways.process_pending(p.gateway, 1) == 0
    assert p.balance(p.token_wt, "alice") == 0
    assert p.gateways.process_pending(p.gateway, 2) == 1
    assert p.balance(p.token_wt, "alice") == 60
    assert gw.outstanding == 60
    assert gw.pending == []
    assert p.gateways.escrow_mismatches() == []


def test_unwrap_burns_wrapped_and_fee_then_unlocks() -> None:
    p = build_protocol(latency=1, unwrap_fee=2 * UNIT)
    p.fund("alice", wt=50, rgu=5 * UNIT)
    rgu_supply = p.ledger.total_supply(p.dest, p.rgu)

    p.gateways.unwrap(p.gateway, "alice", 20, now=3)
    gw = p.gateways.gateway(p.gateway)
    assert p.balance(p.token_wt, "alice") == 30
    assert p.balance(p.rgu, "alice") == 3 * UNIT
    assert p.ledger.total_supply(p.dest, p.rgu) == rgu_supply - 2 * UNIT
    assert gw.outstanding == 30
    assert gw.pending_total(PendingKind.UNLOCK) == 20
    assert p.gateways.total_fee_burned == 2 * UNIT
    assert p.gateways.escrow_mismatches() == []

    p.gateways.process_all(4)
    assert p.balance(p.token_t, "alice") == 20
    assert p.gateways.escrow(p.gateway) == 30
    assert p.gateways.escrow_mismatches() == []


def test_unwrap_without_fee_balance_changes_nothing() -> None:
    p = build_protocol(unwrap_fee=UNIT)
    p.fund("alice", wt=50, rgu=UNIT - 1)

    with pytest.raises(InsufficientRguForFee):
        p.gateways.unwrap(p.gateway, "alice", 10, now=0)
    assert p.balance(p.token_wt, "alice") == 50
    assert p.gateways.gateway(p.gateway).outstanding == 50
    assert p.gateways.total_fee_burned == 0


def test_zero_amounts_rejected() -> None:
    p = build_protocol()
    p.fund("alice", t=10, wt=10)
    with pytest.raises(ZeroAmount):
        p.gateways.lock(p.gateway, "alice", 0, now=0)
    with pytest.raises(ZeroAmount):
        p.gateways.unwrap(p.gateway, "alice", 0, now=0)


def test_second_gateway_needs_multi_gateway_mode() -> None:
    p = build_protocol()
    with pytest.raises(DuplicateGateway):
        p.gateways.register_gateway(p.origin, p.dest, p.token_t, p.token_wt, "other")


def test_unwrap_is_bounded_by_the_gateways_own_outstanding() -> None:
    p = build_protocol(multi_gateway=True)
    second = p.gateways.register_gateway(p.origin, p.dest, p.token_t, p.token_wt, "other")
    p.fund("alice", wt=100)

    with pytest.raises(InsufficientOutstanding):
        p.gateways.unwrap(second, "alice", 1, now=0)
    p.gateways.unwrap(p.gateway, "alice", 100, now=0)
    assert p.gateways.escrow_mismatches() == []


def test_pending_queue_is_fifo_within_a_maturity() -> None:
    p = build_protocol(latency=1)
    p.fund("alice", t=10)
    p.fund("bob", t=10)
    p.gateways.lock(p.gateway, "alice", 3, now=5)
    p.gateways.lock(p.gateway, "bob", 4, now=5)

    gw = p.gateways.gateway(p.gateway)
    assert [(item.beneficiary, item.mature_at) for item in gw.pending] == [("alice", 6), ("bob", 6)]


def test_escrow_mismatch_is_reported() -> None:
    p = build_protocol()
    p.fund("alice", wt=10)
    gw = p.gateways.gateway(p.gateway)
    p.ledger.transfer(p.origin, p.token_t, gw.account, "thief", 1)

    problems = p.gateways.escrow_mismatches()
    assert len(problems) == 1
    assert "escrow 9 != outstanding 10" in problems[0]


def test_zero_latency_lock_mints_in_the_same_call() -> None:
    p = build_protocol(latency=0)
    p.fund("alice", t=500)

    p.gateways.lock(p.gateway, "alice", 500, now=0)
    gw = p.gateways.gateway(p.gateway)
    assert p.gateways.escrow(p.gateway) == 500
    assert p.ledger.total_supply(p.dest, p.token_wt) == 500
    assert p.balance(p.token_wt, "alice") == 500
    assert gw.pending == []
    assert p.gateways.process_pending(p.gateway, 0) == 0


def test_zero_latency_unwrap_unlocks_in_the_same_call() -> None:
    p = build_protocol(latency=0, unwrap_fee=UNIT)
    p.fund("alice", wt=500, rgu=UNIT)
    rgu_supply = p.ledger.total_supply(p.dest, p.rgu)

    p.gateways.unwrap(p.gateway, "alice", 200, now=0)
    assert p.gateways.escrow(p.gateway) == 300
    assert p.ledger.total_supply(p.dest, p.token_wt) == 300
    assert p.balance(p.token_t, "alice") == 200
    assert p.ledger.total_supply(p.dest, p.rgu) == rgu_supply - UNIT
    assert p.gateways.escrow_mismatches() == []


def test_pending_queue_orders_by_maturity_whatever_the_submission_order() -> None:
    p = build_protocol(latency=1)
    p.fund("alice", t=10)
    p.fund("bob", t=10)
    p.gateways.lock(p.gateway, "alice", 3, now=5)
    p.gateways.lock(p.gateway, "bob", 4, now=2)
    p.gateways.lock(p.gateway, "alice", 1, now=2)

    gw = p.gateways.gateway(p.gateway)
    assert [(item.beneficiary, item.mature_at) for item in gw.pending] == [("bob", 3), ("alice", 3), ("alice", 6)]
    assert p.gateways.process_pending(p.gateway, 3) == 2
    assert (p.balance(p.token_wt, "bob"), p.balance(p.token_wt, "alice")) == (4, 1)
    assert gw.pending_total() == 3
    assert p.gateways.escrow_mismatches() == []
