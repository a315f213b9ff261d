# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""
Market agents driven by the simulation engine.

Agents act once per tick in ascending id order, each drawing only from its
own seeded RNG stream. They check balances before acting and skip rather
than fail; any protocol error that still escapes is a bug in the agent and
aborts the run as an ``AgentError``.
"""

import logging
import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import isqrt
from typing import TYPE_CHECKING, Optional, Tuple

from graviton_sim.amm import ceil_div, get_amount_out
from graviton_sim.constants import BPS_DENOMINATOR
from graviton_sim.domain import AccountId, GatewayId, PoolId, Tick
from graviton_sim.errors import EmptyPool

if TYPE_CHECKING:
    from graviton_sim.engine import Engine

logger = logging.getLogger(__name__)


class ArbDirection(Enum):
    BUY_W = "buy_w"  # pay token_o, receive token_w
    SELL_W = "sell_w"  # pay token_w, receive token_o


def _floor_sqrt(value: Fraction) -> int:
    """``floor(sqrt(value))`` for a non-negative rational, exactly."""
    return isqrt(value.numerator * value.denominator) // value.denominator


def optimal_arb_input(x: int, y: int, fee_bps: int, p_ext: Fraction) -> Tuple[Optional[ArbDirection], int]:
    """
    Profit-maximizing trade against a pool with reserves ``x`` (wT) and ``y`` (oT).

    With ``g = 1 - fee``: buying wT pays ``floor((sqrt(x*y*g*p) - y) / g)`` oT and
    selling wT pays ``floor((sqrt(x*y*g/p) - x) / g)`` wT. Inside the fee band,
    where neither is positive, returns ``(None, 0)``.
    """
    if x <= 0 or y <= 0:
        raise EmptyPool("cannot arbitrage an empty pool")
    p_ext = Fraction(p_ext)
    if p_ext <= 0:
        raise ValueError("external price must be positive")
    gamma = Fraction(BPS_DENOMINATOR - fee_bps, BPS_DENOMINATOR)
    if gamma == 0:
        return None, 0

    pool_price = Fraction(y, x)
    if p_ext * gamma > pool_price:
        amount = (Fraction(_floor_sqrt(x * y * gamma * p_ext) - y) / gamma).__floor__()
        if amount > 0:
            return ArbDirection.BUY_W, amount
    elif pool_price * gamma > p_ext:
        amount = (Fraction(_floor_sqrt(x * y * gamma / p_ext) - x) / gamma).__floor__()
        if amount > 0:
            return ArbDirection.SELL_W, amount
    return None, 0


class Agent:
    """Base class: an account plus a private RNG stream."""

    kind = "agent"

    def __init__(self, agent_id: int, label: str, account: AccountId, rng: random.Random) -> None:
        self.agent_id = agent_id
        self.label = label
        self.account = account
        self.rng = rng

    def act(self, engine: "Engine", tick: Tick) -> None:
        raise NotImplementedError


class Arbitrageur(Agent):
    """Closes the gap between a pool and an external feed whenever it pays at least ``min_profit``."""

    kind = "arbitrageur"

    def __init__(self, agent_id: int, label: str, account: AccountId, rng: random.Random, pool: PoolId, feed: str, min_profit: int = 0):
        super().__init__(agent_id, label, account, rng)
        self.pool = pool
        self.feed = feed
        self.min_profit = min_profit
        self.trades = 0

    def act(self, engine: "Engine", tick: Tick) -> None:
        pool = engine.amm.pool(self.pool)
        if pool.is_empty:
            return
        p_ext = engine.feed(self.feed).price(tick)
        direction, amount_in = optimal_arb_input(pool.reserve_w, pool.reserve_o, pool.fee_bps, p_ext)
        if direction is None:
            return
        token_in = pool.token_o if direction is ArbDirection.BUY_W else pool.token_w
        amount_in = min(amount_in, engine.ledger.balance_of(pool.chain, token_in, self.account))
        if amount_in == 0:
            return
        reserve_in, reserve_out = pool.reserves_for(token_in)
        amount_out = get_amount_out(reserve_in, reserve_out, amount_in, pool.fee_bps)
        if direction is ArbDirection.BUY_W:
            profit = amount_out * p_ext - amount_in
        else:
            profit = amount_out - amount_in * p_ext
        if profit <= 0 or profit < self.min_profit:
            return
        engine.amm.swap_exact_in(self.pool, self.account, token_in, amount_in, min_out=amount_out)
        self.trades += 1
        logger.debug("Tick %d: arbitrageur %s %s %d in pool %d.", tick, self.label, direction.value, amount_in, self.pool)


class RandomTrader(Agent):
    """Noise trader: ``intensity`` trades per tick on average, uniform sizes in ``1..max_size``."""

    kind = "random_trader"

    def __init__(
        self, agent_id: int, label: str, account: AccountId, rng: random.Random, pool: PoolId, intensity: Fraction, max_size: int
    ):
        super().__init__(agent_id, label, account, rng)
        if intensity < 0:
            raise ValueError("intensity must be non-negative")
        if max_size < 1:
            raise ValueError("max_size must be positive")
        self.pool = pool
        self.intensity = Fraction(intensity)
        self.max_size = max_size
        self.trades = 0

    def _trade_count(self) -> int:
        whole, remainder = divmod(self.intensity.numerator, self.intensity.denominator)
        if remainder and self.rng.randrange(self.intensity.denominator) < remainder:
            whole += 1
        return whole

    def act(self, engine: "Engine", tick: Tick) -> None:
        for _ in range(self._trade_count()):
            sell_w = self.rng.getrandbits(1) == 1
            size = self.rng.randint(1, self.max_size)
            pool = engine.amm.pool(self.pool)
            if pool.is_empty:
                continue
            token_in = pool.token_w if sell_w else pool.token_o
            size = min(size, engine.ledger.balance_of(pool.chain, token_in, self.account))
            if size == 0:
                continue
            reserve_in, reserve_out = pool.reserves_for(token_in)
            if get_amount_out(reserve_in, reserve_out, size, pool.fee_bps) == 0:
                continue
            engine.amm.swap_exact_in(self.pool, self.account, token_in, size)
            self.trades += 1


class LiquidityProvider(Agent):
    """Deposits at ``enter_tick``, optionally claims every ``claim_every`` ticks, exits at ``exit_tick``."""

    kind = "liquidity_provider"

    def __init__(
        self,
        agent_id: int,
        label: str,
        account: AccountId,
        rng: random.Random,
        pool: PoolId,
        enter_tick: Tick,
        amount_w: int,
        exit_tick: Optional[Tick] = None,
        amount_o: Optional[int] = None,
        claim_every: Optional[int] = None,
    ):
        super().__init__(agent_id, label, account, rng)
        if exit_tick is not None and exit_tick <= enter_tick:
            raise ValueError("exit_tick must come after enter_tick")
        self.pool = pool
        self.enter_tick = enter_tick
        self.exit_tick = exit_tick
        self.amount_w = amount_w
        self.amount_o = amount_o
        self.claim_every = claim_every
        self.claimed = 0

    def _affordable_w(self, engine: "Engine") -> int:
        pool = engine.amm.pool(self.pool)
        amount_w = min(self.amount_w, engine.ledger.balance_of(pool.chain, pool.token_w, self.account))
        held_o = engine.ledger.balance_of(pool.chain, pool.token_o, self.account)
        if amount_w and ceil_div(amount_w * pool.reserve_o, pool.reserve_w) > held_o:
            amount_w = held_o * pool.reserve_w // pool.reserve_o
        return amount_w

    def _enter(self, engine: "Engine") -> None:
        pool = engine.amm.pool(self.pool)
        if pool.is_empty:
            if self.amount_o is None:
                return
            held_w = engine.ledger.balance_of(pool.chain, pool.token_w, self.account)
            held_o = engine.ledger.balance_of(pool.chain, pool.token_o, self.account)
            if held_w < self.amount_w or held_o < self.amount_o or isqrt(self.amount_w * self.amount_o) == 0:
                return
            engine.amm.add_liquidity(self.pool, self.account, self.amount_w, self.amount_o)
            return
        amount_w = self._affordable_w(engine)
        if amount_w == 0 or amount_w * pool.total_shares // pool.reserve_w == 0:
            return
        engine.amm.add_liquidity(self.pool, self.account, amount_w)

    def _exit(self, engine: "Engine") -> None:
        shares = engine.amm.pool(self.pool).shares.get(self.account, 0)
        if shares:
            engine.amm.remove_liquidity(self.pool, self.account, shares)
        self.claimed += engine.rewards.claim_lp(self.pool, self.account)

    def act(self, engine: "Engine", tick: Tick) -> None:
        if tick == self.enter_tick:
            self._enter(engine)
        elif self.exit_tick is not None and tick == self.exit_tick:
            self._exit(engine)
        elif self.claim_every and tick > self.enter_tick and (tick - self.enter_tick) % self.claim_every == 0:
            self.claimed += engine.rewards.claim_lp(self.pool, self.account)


class BridgePolicy(Enum):
    LOCK = "lock"
    UNWRAP = "unwrap"
    ALTERNATE = "alternate"
    ROUND_TRIP = "round_trip"
    RANDOM = "random"


@dataclass
class BridgeTally:
    locks: int = 0
    unwraps: int = 0


class Bridger(Agent):
    """
    Moves ``per_tick_amount`` across a gateway each tick according to ``policy``.

    ``round_trip`` unwraps whatever wT it holds (up to the amount) and then
    locks the amount again. With a latency of at least one tick the gateway's
    outstanding supply is then the same at every accrual as if the bridger
    did nothing.
    """

    kind = "bridger"

    def __init__(
        self,
        agent_id: int,
        label: str,
        account: AccountId,
        rng: random.Random,
        gateway: GatewayId,
        per_tick_amount: int,
        policy: BridgePolicy,
        claim_every: Optional[int] = None,
    ):
        super().__init__(agent_id, label, account, rng)
        if per_tick_amount < 1:
            raise ValueError("per_tick_amount must be positive")
        self.gateway = gateway
        self.per_tick_amount = per_tick_amount
        self.policy = policy
        self.claim_every = claim_every
        self.tally = BridgeTally()

    def _try_lock(self, engine: "Engine", tick: Tick, amount: int) -> None:
        gw = engine.gateways.gateway(self.gateway)
        amount = min(amount, engine.ledger.balance_of(gw.origin_chain, gw.token_t, self.account))
        if amount:
            engine.gateways.lock(self.gateway, self.account, amount, tick)
            self.tally.locks += 1

    def _try_unwrap(self, engine: "Engine", tick: Tick, amount: int) -> None:
        gw = engine.gateways.gateway(self.gateway)
        amount = min(amount, engine.ledger.balance_of(gw.dest_chain, gw.token_wt, self.account), gw.outstanding)
        if amount == 0:
            return
        if gw.unwrap_fee_flat_rgu:
            rgu = engine.ledger.rgu()
            if engine.ledger.balance_of(rgu.home_chain, rgu.token_id, self.account) < gw.unwrap_fee_flat_rgu:
                return
        engine.gateways.unwrap(self.gateway, self.account, amount, tick)
        self.tally.unwraps += 1

    def act(self, engine: "Engine", tick: Tick) -> None:
        amount = self.per_tick_amount
        policy = self.policy
        if policy is BridgePolicy.RANDOM:
            policy = BridgePolicy.LOCK if self.rng.getrandbits(1) else BridgePolicy.UNWRAP
        elif policy is BridgePolicy.ALTERNATE:
            policy = BridgePolicy.LOCK if tick % 2 == 0 else BridgePolicy.UNWRAP

        if policy is BridgePolicy.LOCK:
            self._try_lock(engine, tick, amount)
        elif policy is BridgePolicy.UNWRAP:
            self._try_unwrap(engine, tick, amount)
        else:
            self._try_unwrap(engine, tick, amount)
            self._try_lock(engine, tick, amount)

        if self.claim_every and tick % self.claim_every == 0:
            gw = engine.gateways.gateway(self.gateway)
            if gw.provider == self.account:
                engine.rewards.claim_gateway(self.gateway)
