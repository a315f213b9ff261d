#!/usr/bin/env python3
# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""Unit tests for graviton_sim.agents: the arbitrage optimum and per-agent behavior."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graviton_sim.agents import (
    ArbDirection,
    Arbitrageur,
    BridgePolicy,
    Bridger,
    LiquidityProvider,
    RandomTrader,
    optimal_arb_input,
)
from graviton_sim.amm import get_amount_out
from graviton_sim.constants import UNIT
from graviton_sim.errors import EmptyPool
from graviton_sim.feeds import ConstantFeed, PriceFeed
from tests.builders import Protocol, build_protocol


class _Stage:
    """The slice of Engine that agents touch."""

    def __init__(self, p: Protocol, feeds=None) -> None:
        self.amm = p.amm
        self.ledger = p.ledger
        self.gateways = p.gateways
        self.rewards = p.rewards
        self.feeds = feeds or {}

    def feed(self, label: str) -> PriceFeed:
        return self.feeds[label]


def _seeded(fee_bps: int = 0, w: int = 1_000 * UNIT, o: int = 1_000 * UNIT) -> Protocol:
    p = build_protocol(fee_bps=fee_bps)
    p.fund("lp", wt=w, o=o)
    p.amm.add_liquidity(p.pool, "lp", w, o)
    return p


def test_optimal_arb_buy_example() -> None:
    direction, amount = optimal_arb_input(1_000, 1_000, 0, Fraction(4))
    assert (direction, amount) == (ArbDirection.BUY_W, 1_000)
    assert get_amount_out(1_000, 1_000, amount, 0) == 500


def test_optimal_arb_sell_mirrors_buy() -> None:
    assert optimal_arb_input(1_000, 1_000, 0, Fraction(1, 4)) == (ArbDirection.SELL_W, 1_000)


def test_optimal_arb_no_trade_at_or_near_pool_price() -> None:
    assert optimal_arb_input(1_000, 1_000, 0, Fraction(1)) == (None, 0)
    assert optimal_arb_input(1_000, 1_000, 30, Fraction(1_001, 1_000)) == (None, 0)
    assert optimal_arb_input(1_000, 1_000, 30, Fraction(1_000, 1_001)) == (None, 0)


def test_optimal_arb_rejects_bad_inputs() -> None:
    with pytest.raises(EmptyPool):
        optimal_arb_input(0, 1_000, 0, Fraction(1))
    with pytest.raises(ValueError):
        optimal_arb_input(1_000, 1_000, 0, Fraction(0))


@settings(max_examples=150, deadline=None)
@given(
    x=st.integers(min_value=10**3, max_value=10**12),
    y=st.integers(min_value=10**3, max_value=10**12),
    fee_bps=st.integers(min_value=0, max_value=100),
    p_num=st.integers(min_value=1, max_value=10**4),
    p_den=st.integers(min_value=1, max_value=10**4),
)
def test_optimal_arb_moves_price_toward_feed_without_crossing(x, y, fee_bps, p_num, p_den) -> None:
    p_ext = Fraction(p_num, p_den)
    direction, amount = optimal_arb_input(x, y, fee_bps, p_ext)
    if direction is None:
        assert amount == 0
        return
    assert amount > 0
    before = Fraction(y, x)
    if direction is ArbDirection.BUY_W:
        out = get_amount_out(y, x, amount, fee_bps)
        after = Fraction(y + amount, x - out)
        assert before < after <= p_ext
    else:
        out = get_amount_out(x, y, amount, fee_bps)
        after = Fraction(y - out, x + amount)
        assert p_ext <= after < before


def test_arbitrageur_closes_the_gap_with_zero_fee() -> None:
    p = _seeded()
    p.fund("arb", wt=10_000 * UNIT, o=10_000 * UNIT)
    stage = _Stage(p, {"px": ConstantFeed(Fraction(4))})
    agent = Arbitrageur(0, "arb", "arb", random.Random(1), p.pool, "px")

    agent.act(stage, 0)
    assert agent.trades == 1
    assert abs(p.amm.spot_price(p.pool) - 4) < Fraction(1, 10**6)
    agent.act(stage, 1)
    assert agent.trades <= 2


def test_arbitrageur_respects_min_profit_and_balance() -> None:
    p = _seeded()
    stage = _Stage(p, {"px": ConstantFeed(Fraction(4))})
    broke = Arbitrageur(0, "broke", "broke", random.Random(1), p.pool, "px")
    broke.act(stage, 0)
    assert broke.trades == 0

    p.fund("picky", o=10_000 * UNIT)
    picky = Arbitrageur(1, "picky", "picky", random.Random(1), p.pool, "px", min_profit=10**30)
    picky.act(stage, 0)
    assert picky.trades == 0
    assert p.amm.spot_price(p.pool) == 1


def test_random_trader_is_reproducible_and_stays_within_balance() -> None:
    reserves = []
    for _ in range(2):
        p = _seeded(fee_bps=30)
        p.fund("noise", wt=50 * UNIT, o=50 * UNIT)
        trader = RandomTrader(0, "noise", "noise", random.Random(99), p.pool, Fraction(3, 2), 10 * UNIT)
        for tick in range(50):
            trader.act(_Stage(p), tick)
        pool = p.amm.pool(p.pool)
        reserves.append((pool.reserve_w, pool.reserve_o, trader.trades))
        assert p.amm.consistency_problems() == []
    assert reserves[0] == reserves[1]
    assert reserves[0][2] > 0


def test_random_trader_argument_checks() -> None:
    with pytest.raises(ValueError):
        RandomTrader(0, "n", "n", random.Random(1), 0, Fraction(-1), 10)
    with pytest.raises(ValueError):
        RandomTrader(0, "n", "n", random.Random(1), 0, Fraction(1), 0)


def test_liquidity_provider_enters_claims_and_exits() -> None:
    p = _seeded()
    p.fund("lp2", wt=100 * UNIT, o=100 * UNIT)
    stage = _Stage(p)
    agent = LiquidityProvider(0, "lp2", "lp2", random.Random(1), p.pool, enter_tick=1, amount_w=100 * UNIT, exit_tick=6, claim_every=2)

    for tick in range(8):
        agent.act(stage, tick)
        p.rewards.accrue(tick)
        if tick == 1:
            assert p.amm.pool(p.pool).shares["lp2"] > 0

    assert "lp2" not in p.amm.pool(p.pool).shares
    assert agent.claimed > 0
    assert p.balance(p.rgu, "lp2") == agent.claimed
    assert p.rewards.pending_lp(p.pool, "lp2") == 0


def test_liquidity_provider_scales_deposit_to_its_other_side() -> None:
    p = _seeded(o=2_000 * UNIT)
    p.fund("lp2", wt=100 * UNIT, o=50 * UNIT)
    agent = LiquidityProvider(0, "lp2", "lp2", random.Random(1), p.pool, enter_tick=0, amount_w=100 * UNIT)
    agent.act(_Stage(p), 0)
    assert p.balance(p.token_wt, "lp2") == 75 * UNIT
    assert p.balance(p.token_o, "lp2") == 0


def test_liquidity_provider_exit_must_follow_entry() -> None:
    with pytest.raises(ValueError):
        LiquidityProvider(0, "lp", "lp", random.Random(1), 0, enter_tick=5, amount_w=1, exit_tick=5)


def test_round_trip_bridger_keeps_outstanding_flat_at_accrual() -> None:
    p = build_protocol(latency=1)
    p.fund("holder", wt=500)
    p.fund("bridger", t=200)
    stage = _Stage(p)
    bridger = Bridger(0, "bridger", "bridger", random.Random(1), p.gateway, 100, BridgePolicy.ROUND_TRIP)
    gw = p.gateways.gateway(p.gateway)

    for tick in range(10):
        p.gateways.process_all(tick)
        bridger.act(stage, tick)
        assert gw.outstanding == 500
        assert p.gateways.escrow_mismatches() == []
    assert bridger.tally.locks == 10
    assert bridger.tally.unwraps == 9


def test_bridger_skips_unwrap_without_fee_balance() -> None:
    p = build_protocol(unwrap_fee=UNIT)
    p.fund("bridger", wt=100)
    bridger = Bridger(0, "bridger", "bridger", random.Random(1), p.gateway, 10, BridgePolicy.UNWRAP)
    bridger.act(_Stage(p), 0)
    assert bridger.tally.unwraps == 0
    assert p.balance(p.token_wt, "bridger") == 100


def test_alternate_bridger_and_provider_claims() -> None:
    p = _seeded()
    p.fund("provider", t=50)
    stage = _Stage(p)
    bridger = Bridger(0, "provider", "provider", random.Random(1), p.gateway, 10, BridgePolicy.ALTERNATE, claim_every=2)
    for tick in range(4):
        p.gateways.process_all(tick)
        p.rewards.accrue(tick)
        bridger.act(stage, tick)
    assert (bridger.tally.locks, bridger.tally.unwraps) == (2, 2)
    assert p.balance(p.rgu, "provider") > 0
    assert p.rewards.pending_gateway(p.gateway) == 2 * UNIT


def test_bridger_rejects_zero_amount() -> None:
    with pytest.raises(ValueError):
        Bridger(0, "b", "b", random.Random(1), 0, 0, BridgePolicy.LOCK)
