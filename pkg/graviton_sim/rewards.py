# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""
RGU emission and distribution.

Every tick the emission is split across pools by weight. Inside a pool the
LP fraction feeds a reward-per-share accumulator (amount x time, realized
as per-tick pro-rata accrual) and the rest goes to the gateways of the
pool's wrapped token, pro-rata to each gateway's outstanding supply. A pool
holding no wT pays its gateway share to the residual, so gateway rewards
follow pool presence only, never transfer volume.

Bookkeeping is kept in units scaled by ``PRECISION`` so that nothing is lost
to integer division: every remainder lands in ``residual_scaled`` and

    claimed * P + pending_scaled + residual_scaled == emitted * P

holds exactly after every operation. Claims mint RGU; pending is virtual.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from graviton_sim.amm import AmmExchange, Pool
from graviton_sim.constants import BPS_DENOMINATOR, PRECISION
from graviton_sim.domain import AccountId, GatewayId, PoolId, Tick
from graviton_sim.errors import NonMonotonicTick
from graviton_sim.gateway import GatewayRegistry
from graviton_sim.ledger import Capability, Ledger, check_amount

logger = logging.getLogger(__name__)


@dataclass
class EmissionSchedule:
    """``emission(t) = floor(e0 * (num/den) ** (t // period))``, floored once per period."""

    e0: int
    decay_num: int = 1
    decay_den: int = 1
    period_ticks: int = 1

    def validate(self) -> None:
        check_amount(self.e0)
        if self.decay_den <= 0 or self.decay_num < 0:
            raise ValueError("decay must be a non-negative fraction with a positive denominator")
        if self.decay_num > self.decay_den:
            raise ValueError(f"decay {self.decay_num}/{self.decay_den} would increase emission")
        if self.period_ticks < 1:
            raise ValueError("period_ticks must be at least 1")


class EmissionCurve:
    """Emission lookup with a forward-only cache over decay periods."""

    def __init__(self, schedule: EmissionSchedule) -> None:
        schedule.validate()
        self.schedule = schedule
        self._epoch = 0
        self._value = schedule.e0

    def at(self, tick: Tick) -> int:
        epoch = tick // self.schedule.period_ticks
        if epoch < self._epoch:
            self._epoch, self._value = 0, self.schedule.e0
        while self._epoch < epoch:
            if self._value == 0:
                self._epoch = epoch
                break
            self._value = self._value * self.schedule.decay_num // self.schedule.decay_den
            self._epoch += 1
        return self._value


@dataclass
class PoolRewardState:
    """Accumulator for one pool. ``reward_debt`` and ``owed`` are in scaled units."""

    acc_per_share: int = 0
    last_accrued_tick: Optional[Tick] = None
    reward_debt: Dict[AccountId, int] = field(default_factory=dict)
    owed: Dict[AccountId, int] = field(default_factory=dict)


@dataclass
class GatewayRewardState:
    accrued: Dict[GatewayId, int] = field(default_factory=dict)
    claimed: Dict[GatewayId, int] = field(default_factory=dict)


class RewardEngine:
    """Accrues and pays out RGU rewards for LP shareholders and gateway providers."""

    def __init__(
        self,
        ledger: Ledger,
        amm: AmmExchange,
        gateways: GatewayRegistry,
        authority: Capability,
        schedule: EmissionSchedule,
        lp_fraction_bps: int = 8_000,
    ) -> None:
        self.ledger = ledger
        self.amm = amm
        self.gateways = gateways
        self._authority = authority
        self.curve = EmissionCurve(schedule)
        self.lp_fraction_bps = 0
        self.set_lp_fraction(lp_fraction_bps)
        self.pool_states: Dict[PoolId, PoolRewardState] = {}
        self.gateway_state = GatewayRewardState()
        self.last_tick: Optional[Tick] = None
        self.emitted = 0
        self.claimed_lp = 0
        self.claimed_gateway = 0
        self.residual_scaled = 0

    @property
    def schedule(self) -> EmissionSchedule:
        return self.curve.schedule

    @property
    def claimed(self) -> int:
        return self.claimed_lp + self.claimed_gateway

    def set_lp_fraction(self, lp_fraction_bps: int) -> None:
        if not 0 <= lp_fraction_bps <= BPS_DENOMINATOR:
            raise ValueError(f"lp_fraction_bps must be within 0..{BPS_DENOMINATOR}, got {lp_fraction_bps}")
        self.lp_fraction_bps = lp_fraction_bps

    def update_schedule(self, **changes: int) -> None:
        """Change emission parameters; takes effect from the next accrual."""
        current = self.curve.schedule
        candidate = EmissionSchedule(
            e0=changes.get("e0", current.e0),
            decay_num=changes.get("decay_num", current.decay_num),
            decay_den=changes.get("decay_den", current.decay_den),
            period_ticks=changes.get("period_ticks", current.period_ticks),
        )
        candidate.validate()
        self.curve = EmissionCurve(candidate)

    def emission(self, tick: Tick) -> int:
        return self.curve.at(tick)

    def _pool_state(self, pool_id: PoolId) -> PoolRewardState:
        self.amm.pool(pool_id)
        return self.pool_states.setdefault(pool_id, PoolRewardState())

    # Accrual

    def accrue(self, now: Tick) -> int:
        """
        Distribute the emission of every tick since the last accrual up to ``now``.

        The engine accrues every tick; a direct caller that skips ticks gets
        their emission paid out over the current pool state. Returns the
        amount emitted.
        """
        if self.last_tick is not None and now <= self.last_tick:
            raise NonMonotonicTick(f"accrue({now}) after accrue({self.last_tick})")
        first = 0 if self.last_tick is None else self.last_tick + 1
        self.last_tick = now
        emitted = sum(self.emission(tick) for tick in range(first, now + 1))
        self.emitted += emitted
        if emitted == 0:
            return 0

        pools = [pool for pool in self.amm.pools if pool.weight > 0]
        total_weight = sum(pool.weight for pool in pools)
        if total_weight == 0:
            self.residual_scaled += emitted * PRECISION
            return emitted

        distributed = 0
        for pool in pools:
            pool_emission = emitted * pool.weight // total_weight
            distributed += pool_emission
            lp_part = pool_emission * self.lp_fraction_bps // BPS_DENOMINATOR
            gateway_part = pool_emission - lp_part
            if gateway_part:
                lp_part += self._pay_gateways(pool, gateway_part)
            state = self._pool_state(pool.pool_id)
            state.last_accrued_tick = now
            if lp_part == 0:
                continue
            if pool.total_shares == 0:
                self.residual_scaled += lp_part * PRECISION
                continue
            increment = lp_part * PRECISION // pool.total_shares
            state.acc_per_share += increment
            self.residual_scaled += lp_part * PRECISION - increment * pool.total_shares
        self.residual_scaled += (emitted - distributed) * PRECISION
        logger.debug("Tick %d: emitted %d across %d pool(s).", now, emitted, len(pools))
        return emitted

    def _pay_gateways(self, pool: Pool, amount: int) -> int:
        """Split ``amount`` across the gateways of the pool's wT; return what falls back to LPs."""
        if not self.ledger.token(pool.token_w).kind.is_wrapped:
            return amount
        gateways = self.gateways.gateways_for(pool.token_w)
        if not gateways:
            return amount
        total_outstanding = sum(gw.outstanding for gw in gateways)
        if pool.reserve_w == 0 or pool.total_shares == 0 or total_outstanding == 0:
            self.residual_scaled += amount * PRECISION
            return 0
        paid = 0
        for gw in gateways:
            share = amount * gw.outstanding // total_outstanding
            if share:
                accrued = self.gateway_state.accrued
                accrued[gw.gateway_id] = accrued.get(gw.gateway_id, 0) + share
                paid += share
        self.residual_scaled += (amount - paid) * PRECISION
        return 0

    # LP side

    def on_shares_changed(self, pool_id: PoolId, account: AccountId, old_shares: int, new_shares: int) -> None:
        """Settle what ``old_shares`` earned so far, then re-base the debt on ``new_shares``."""
        if old_shares == new_shares:
            return
        state = self._pool_state(pool_id)
        earned = old_shares * state.acc_per_share - state.reward_debt.get(account, 0)
        if earned:
            state.owed[account] = state.owed.get(account, 0) + earned
        if new_shares:
            state.reward_debt[account] = new_shares * state.acc_per_share
        else:
            state.reward_debt.pop(account, None)

    def _pending_lp_scaled(self, pool_id: PoolId, account: AccountId) -> int:
        state = self._pool_state(pool_id)
        shares = self.amm.pool(pool_id).shares.get(account, 0)
        return state.owed.get(account, 0) + shares * state.acc_per_share - state.reward_debt.get(account, 0)

    def pending_lp(self, pool_id: PoolId, account: AccountId) -> int:
        return self._pending_lp_scaled(pool_id, account) // PRECISION

    def claim_lp(self, pool_id: PoolId, account: AccountId) -> int:
        scaled = self._pending_lp_scaled(pool_id, account)
        amount = scaled // PRECISION
        rgu = self.ledger.rgu() if amount else None
        state = self._pool_state(pool_id)
        if rgu is not None:
            self.ledger.mint(rgu.home_chain, rgu.token_id, account, amount, authority=self._authority)
        remainder = scaled - amount * PRECISION
        if remainder:
            state.owed[account] = remainder
        else:
            state.owed.pop(account, None)
        shares = self.amm.pool(pool_id).shares.get(account, 0)
        if shares:
            state.reward_debt[account] = shares * state.acc_per_share
        else:
            state.reward_debt.pop(account, None)
        self.claimed_lp += amount
        if amount:
            logger.debug("Pool %d: %s claimed %d RGU.", pool_id, account, amount)
        return amount

    # Gateway side

    def pending_gateway(self, gateway_id: GatewayId) -> int:
        self.gateways.gateway(gateway_id)
        return self.gateway_state.accrued.get(gateway_id, 0)

    def claim_gateway(self, gateway_id: GatewayId) -> int:
        gw = self.gateways.gateway(gateway_id)
        amount = self.gateway_state.accrued.get(gateway_id, 0)
        if amount == 0:
            return 0
        rgu = self.ledger.rgu()
        self.ledger.mint(rgu.home_chain, rgu.token_id, gw.provider, amount, authority=self._authority)
        self.gateway_state.accrued[gateway_id] = 0
        claimed = self.gateway_state.claimed
        claimed[gateway_id] = claimed.get(gateway_id, 0) + amount
        self.claimed_gateway += amount
        logger.debug("Gateway %d: provider %s claimed %d RGU.", gateway_id, gw.provider, amount)
        return amount

    # Accounting

    def _lp_pending_scaled_all(self) -> List[int]:
        values = []
        for pool_id, state in self.pool_states.items():
            accounts = set(state.owed) | set(state.reward_debt) | set(self.amm.pool(pool_id).shares)
            values.extend(self._pending_lp_scaled(pool_id, account) for account in sorted(accounts))
        return values

    def pending_total(self) -> int:
        """Sum of every claimable amount, LP and gateway, in minimal units."""
        lp = sum(value // PRECISION for value in self._lp_pending_scaled_all())
        return lp + sum(self.gateway_state.accrued.values())

    def residual(self) -> int:
        """Emission that nobody can claim: division remainders plus sub-unit LP dust."""
        dust = sum(value % PRECISION for value in self._lp_pending_scaled_all())
        return (self.residual_scaled + dust) // PRECISION

    def conservation_problems(self) -> List[str]:
        problems = []
        lp_scaled = self._lp_pending_scaled_all()
        if any(value < 0 for value in lp_scaled):
            problems.append("negative LP pending reward")
        pending_scaled = sum(lp_scaled) + sum(self.gateway_state.accrued.values()) * PRECISION
        lhs = self.claimed * PRECISION + pending_scaled + self.residual_scaled
        if lhs != self.emitted * PRECISION:
            problems.append(
                f"claimed {self.claimed} + pending + residual (scaled {lhs}) != emitted {self.emitted} (scaled)"
            )
        elif self.claimed + self.pending_total() + self.residual() != self.emitted:
            problems.append("unit-level conservation does not close")
        return problems
