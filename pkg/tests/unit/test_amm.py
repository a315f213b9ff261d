#!/usr/bin/env python3
# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""
Unit tests for graviton_sim.amm.

Covers:
- The exact-input swap formula against an independent rational oracle
- Reserve product monotonicity over long random swap sequences
- Liquidity add/remove rounding and share accounting
- Slippage quotes as pool depth and trade size grow
- Reserve value per share under swaps
"""

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graviton_sim.amm import ceil_div, get_amount_out
from graviton_sim.constants import UNIT
from graviton_sim.errors import BadToken, DuplicatePair, EmptyPool, FeeTooHigh, InsufficientShares, SlippageExceeded, ZeroShares
from tests.builders import Protocol, build_protocol


def _oracle_out(x: int, y: int, amount_in: int, fee_bps: int) -> int:
    effective = math.floor(Fraction(amount_in * (10_000 - fee_bps), 10_000))
    return y - math.ceil(Fraction(x * y, x + effective))


def _seeded(fee_bps: int = 30, w: int = 1_000 * UNIT, o: int = 1_000 * UNIT) -> Protocol:
    p = build_protocol(fee_bps=fee_bps)
    p.fund("lp", wt=w, o=o)
    p.amm.add_liquidity(p.pool, "lp", w, o)
    return p


@pytest.mark.parametrize("fee_bps", [0, 30, 100])
def test_amount_out_matches_rational_oracle(fee_bps: int) -> None:
    for x in range(1, 51):
        for y in range(1, 51):
            for amount_in in range(1, 51):
                assert get_amount_out(x, y, amount_in, fee_bps) == _oracle_out(x, y, amount_in, fee_bps)


def test_ceil_div() -> None:
    assert ceil_div(7, 2) == 4
    assert ceil_div(8, 2) == 4
    assert ceil_div(0, 3) == 0


@pytest.mark.slow
@pytest.mark.parametrize("fee_bps", [0, 30])
def test_reserve_product_never_decreases_over_random_swaps(fee_bps: int) -> None:
    p = _seeded(fee_bps=fee_bps)
    p.fund("trader", wt=10_000 * UNIT, o=10_000 * UNIT)
    rng = random.Random(20240611)
    pool = p.amm.pool(p.pool)

    for _ in range(10_000):
        token_in = p.token_wt if rng.getrandbits(1) else p.token_o
        reserve_in, _ = pool.reserves_for(token_in)
        amount = min(rng.randint(1, reserve_in // 200), p.balance(token_in, "trader"))
        if amount == 0:
            continue
        before = pool.reserve_w * pool.reserve_o
        p.amm.swap_exact_in(p.pool, "trader", token_in, amount)
        after = pool.reserve_w * pool.reserve_o
        if fee_bps > 0:
            assert after > before
        else:
            assert after >= before
    assert p.amm.consistency_problems() == []


@settings(max_examples=200, deadline=None)
@given(
    x=st.integers(min_value=1, max_value=10**15),
    y=st.integers(min_value=1, max_value=10**15),
    amount_in=st.integers(min_value=1, max_value=10**15),
    fee_bps=st.integers(min_value=0, max_value=1_000),
)
def test_swap_output_bounds(x: int, y: int, amount_in: int, fee_bps: int) -> None:
    out = get_amount_out(x, y, amount_in, fee_bps)
    assert 0 <= out < y
    assert (x + amount_in) * (y - out) >= x * y


def test_first_deposit_mints_geometric_mean_shares() -> None:
    p = build_protocol()
    p.fund("lp", wt=400, o=900)
    minted, taken_o = p.amm.add_liquidity(p.pool, "lp", 400, 900)
    pool = p.amm.pool(p.pool)
    assert (minted, taken_o) == (600, 900)
    assert (pool.reserve_w, pool.reserve_o, pool.total_shares) == (400, 900, 600)


def test_later_deposit_takes_ceiled_implied_amount() -> None:
    p = build_protocol()
    p.fund("lp", wt=300, o=1_000)
    p.amm.add_liquidity(p.pool, "lp", 300, 1_000)
    p.fund("bob", wt=10, o=100)

    minted, taken_o = p.amm.add_liquidity(p.pool, "bob", 10, 1)
    assert taken_o == ceil_div(10 * 1_000, 300)
    assert minted == 10 * 547 // 300
    assert p.amm.consistency_problems() == []


def test_remove_liquidity_floors_and_keeps_dust_in_pool() -> None:
    p = build_protocol()
    p.fund("lp", wt=1_000, o=3)
    p.amm.add_liquidity(p.pool, "lp", 1_000, 3)
    shares = p.amm.pool(p.pool).shares["lp"]
    p.fund("bob", wt=100, o=1)
    minted, _ = p.amm.add_liquidity(p.pool, "bob", 100)

    amount_w, amount_o = p.amm.remove_liquidity(p.pool, "bob", minted)
    assert amount_w <= 100
    assert amount_o <= 1
    assert p.amm.pool(p.pool).shares == {"lp": shares}
    assert p.amm.consistency_problems() == []


@settings(max_examples=100, deadline=None)
@given(
    seed_w=st.integers(min_value=1_000, max_value=10**12),
    seed_o=st.integers(min_value=1_000, max_value=10**12),
    deposit_w=st.integers(min_value=1, max_value=10**12),
)
def test_add_then_remove_never_pays_out_more(seed_w: int, seed_o: int, deposit_w: int) -> None:
    p = build_protocol()
    p.fund("lp", wt=seed_w, o=seed_o)
    p.amm.add_liquidity(p.pool, "lp", seed_w, seed_o)
    needed_o = ceil_div(deposit_w * seed_o, seed_w)
    p.fund("bob", wt=deposit_w, o=needed_o)
    if deposit_w * p.amm.pool(p.pool).total_shares // seed_w == 0:
        with pytest.raises(ZeroShares):
            p.amm.add_liquidity(p.pool, "bob", deposit_w)
        return

    minted, taken_o = p.amm.add_liquidity(p.pool, "bob", deposit_w)
    back_w, back_o = p.amm.remove_liquidity(p.pool, "bob", minted)
    assert back_w <= deposit_w
    assert back_o <= taken_o


def test_liquidity_errors() -> None:
    p = build_protocol()
    p.fund("lp", wt=10, o=10)
    with pytest.raises(ValueError):
        p.amm.add_liquidity(p.pool, "lp", 10)
    with pytest.raises(ZeroShares):
        p.amm.add_liquidity(p.pool, "lp", 0, 10)
    p.amm.add_liquidity(p.pool, "lp", 10, 10)
    with pytest.raises(InsufficientShares):
        p.amm.remove_liquidity(p.pool, "lp", 11)


def test_swap_errors() -> None:
    p = build_protocol()
    p.fund("trader", wt=10, o=10)
    with pytest.raises(EmptyPool):
        p.amm.swap_exact_in(p.pool, "trader", p.token_wt, 5)
    p = _seeded()
    p.fund("trader", wt=10 * UNIT)
    quoted = p.amm.quote_out(p.pool, p.token_wt, UNIT)
    with pytest.raises(SlippageExceeded):
        p.amm.swap_exact_in(p.pool, "trader", p.token_wt, UNIT, min_out=quoted + 1)
    with pytest.raises(BadToken):
        p.amm.swap_exact_in(p.pool, "trader", p.rgu, UNIT)
    assert p.amm.swap_exact_in(p.pool, "trader", p.token_wt, UNIT, min_out=quoted) == quoted


def test_pool_creation_rules() -> None:
    p = build_protocol()
    with pytest.raises(DuplicatePair):
        p.amm.create_pool(p.dest, p.token_o, p.token_wt)
    with pytest.raises(FeeTooHigh):
        p.amm.create_pool(p.dest, p.token_wt, p.rgu, fee_bps=1_001)


def test_slippage_strictly_falls_as_depth_grows() -> None:
    quotes = []
    for depth in (1, 2, 4, 8):
        p = _seeded(w=depth * 1_000 * UNIT, o=depth * 2_000 * UNIT)
        quotes.append(p.amm.quote_slippage(p.pool, 10 * UNIT))
    assert all(a > b for a, b in zip(quotes, quotes[1:]))
    assert quotes[0] == Fraction(10, 1_010)


def test_spot_price_is_exact() -> None:
    p = _seeded(w=3 * UNIT, o=7 * UNIT)
    assert p.amm.spot_price(p.pool) == Fraction(7, 3)


def test_add_liquidity_examples() -> None:
    p = build_protocol()
    p.fund("lp", wt=1_000, o=4_000)
    assert p.amm.add_liquidity(p.pool, "lp", 1_000, 4_000) == (2_000, 4_000)
    p.fund("bob", wt=500, o=2_000)
    assert p.amm.add_liquidity(p.pool, "bob", 500) == (1_000, 2_000)
    pool = p.amm.pool(p.pool)
    assert (pool.reserve_w, pool.reserve_o, pool.total_shares) == (1_500, 6_000, 3_000)

    big = build_protocol()
    big.fund("lp", wt=10**9, o=4 * 10**9)
    assert big.amm.add_liquidity(big.pool, "lp", 10**9, 4 * 10**9) == (2 * 10**9, 4 * 10**9)


def test_slippage_of_a_trade_as_large_as_the_reserve_is_one_half() -> None:
    shallow = _seeded(w=1_000, o=1_000)
    assert shallow.amm.quote_slippage(shallow.pool, 1_000) == Fraction(1, 2)
    deep = _seeded(w=10_000, o=10_000)
    assert deep.amm.quote_slippage(deep.pool, 1_000) < Fraction(1, 2)


@settings(max_examples=200, deadline=None)
@given(
    w=st.integers(min_value=1, max_value=10**15),
    o=st.integers(min_value=1, max_value=10**15),
    amount=st.integers(min_value=1, max_value=10**15),
    extra=st.integers(min_value=1, max_value=10**15),
)
def test_slippage_strictly_increases_with_trade_size(w: int, o: int, amount: int, extra: int) -> None:
    p = _seeded(w=w, o=o)
    smaller = p.amm.quote_slippage(p.pool, amount)
    larger = p.amm.quote_slippage(p.pool, amount + extra)
    assert 0 < smaller < larger < 1
    assert p.amm.quote_slippage(p.pool, amount, p.token_o) < p.amm.quote_slippage(p.pool, amount + extra, p.token_o)


@pytest.mark.parametrize("fee_bps", [0, 30])
def test_reserve_value_per_share_never_falls_under_swaps(fee_bps: int) -> None:
    p = _seeded(fee_bps=fee_bps)
    p.fund("trader", wt=5_000 * UNIT, o=5_000 * UNIT)
    rng = random.Random(7)
    pool = p.amm.pool(p.pool)

    def value_per_share() -> Fraction:
        return Fraction(pool.reserve_w * pool.reserve_o, pool.total_shares**2)

    for _ in range(500):
        token_in = p.token_wt if rng.getrandbits(1) else p.token_o
        reserve_in, _ = pool.reserves_for(token_in)
        amount = min(rng.randint(1, reserve_in // 50), p.balance(token_in, "trader"))
        if amount == 0:
            continue
        before = value_per_share()
        p.amm.swap_exact_in(p.pool, "trader", token_in, amount)
        assert value_per_share() >= before
