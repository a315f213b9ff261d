# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""
Cross-chain gateways.

A gateway pairs an LU-Port (lock & unlock escrow of T on the origin chain)
with an IB-Port (issue & burn of wT on the destination chain). Transfers in
either direction go through a pending queue and complete after a fixed
per-gateway confirmation latency; a gateway with latency 0 settles
within the call itself. Unwrapping burns a flat RGU fee.

Per gateway, at every phase boundary::

    escrow == outstanding + sum(pending mints) + sum(pending unlocks)

where ``outstanding`` is the wT issued through this gateway and not yet
unwrapped through it. Summed over every gateway of a wT, ``outstanding``
equals the wT total supply.
"""

import heapq
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from graviton_sim.constants import ESCROW_ACCOUNT_PREFIX
from graviton_sim.domain import AccountId, ChainId, GatewayId, PendingKind, PendingTransfer, Tick, TokenId, TokenKindTag
from graviton_sim.errors import (
    DuplicateGateway,
    InconsistentTokenPair,
    InsufficientBalance,
    InsufficientOutstanding,
    InsufficientRguForFee,
    UnknownEntity,
    ZeroAmount,
)
from graviton_sim.ledger import Capability, Ledger, check_amount

logger = logging.getLogger(__name__)


def escrow_account(gateway_id: int) -> AccountId:
    return f"{ESCROW_ACCOUNT_PREFIX}{gateway_id}"


@dataclass
class Gateway:
    """State of one gateway. ``escrow`` is read from the ledger, never stored twice."""

    gateway_id: GatewayId
    origin_chain: ChainId
    dest_chain: ChainId
    token_t: TokenId
    token_wt: TokenId
    provider: AccountId
    latency_ticks: int
    unwrap_fee_flat_rgu: int
    outstanding: int = 0
    # Heap of (mature_at, enqueue sequence, transfer).
    queue: List[Tuple[Tick, int, PendingTransfer]] = field(default_factory=list)
    enqueued: int = 0
    fees_burned: int = 0
    locked_total: int = 0
    unwrapped_total: int = 0

    @property
    def account(self) -> AccountId:
        return escrow_account(self.gateway_id)

    @property
    def pending(self) -> List[PendingTransfer]:
        """Queued transfers in execution order: by maturity, FIFO within a maturity."""
        return [item for _, _, item in sorted(self.queue)]

    def pending_total(self, kind: Optional[PendingKind] = None) -> int:
        return sum(item.amount for _, _, item in self.queue if kind is None or item.kind is kind)


class GatewayRegistry:
    """All gateways of a run, keyed by dense ``GatewayId``."""

    def __init__(self, ledger: Ledger, authority: Capability, multi_gateway: bool = False) -> None:
        self.ledger = ledger
        self._authority = authority
        self.multi_gateway = multi_gateway
        self._gateways: List[Gateway] = []
        self._by_wrapped: Dict[TokenId, List[GatewayId]] = {}
        self.total_fee_burned = 0

    def register_gateway(
        self,
        origin: ChainId,
        dest: ChainId,
        token_t: TokenId,
        token_wt: TokenId,
        provider: AccountId,
        latency: int = 0,
        fee_flat_rgu: int = 0,
    ) -> GatewayId:
        self.ledger.chain(origin)
        self.ledger.chain(dest)
        t = self.ledger.token(token_t)
        wt = self.ledger.token(token_wt)
        if t.kind.tag is not TokenKindTag.ORIGIN or t.home_chain != origin:
            raise InconsistentTokenPair(f"token {t.symbol} is not an origin token of chain {origin}")
        if not wt.kind.is_wrapped or wt.kind.underlying != token_t or wt.home_chain != dest:
            raise InconsistentTokenPair(f"token {wt.symbol} on chain {dest} does not wrap {t.symbol}")
        if isinstance(latency, bool) or not isinstance(latency, int) or latency < 0:
            raise ValueError(f"latency must be a non-negative tick count, got {latency!r}")
        check_amount(fee_flat_rgu)
        if fee_flat_rgu > 0:
            self.ledger.rgu()
        if not provider:
            raise ValueError("gateway provider account must be non-empty")
        existing = self._by_wrapped.get(token_wt, [])
        if existing and not self.multi_gateway:
            raise DuplicateGateway(f"token {wt.symbol} already has gateway {existing[0]}")

        gateway_id = GatewayId(len(self._gateways))
        self._gateways.append(
            Gateway(
                gateway_id=gateway_id,
                origin_chain=origin,
                dest_chain=dest,
                token_t=token_t,
                token_wt=token_wt,
                provider=provider,
                latency_ticks=latency,
                unwrap_fee_flat_rgu=fee_flat_rgu,
            )
        )
        self._by_wrapped.setdefault(token_wt, []).append(gateway_id)
        logger.debug("Registered gateway %d for %s -> %s (latency %d).", gateway_id, t.symbol, wt.symbol, latency)
        return gateway_id

    def gateway(self, gateway_id: GatewayId) -> Gateway:
        if not isinstance(gateway_id, int) or not 0 <= gateway_id < len(self._gateways):
            raise UnknownEntity(f"unknown gateway id {gateway_id!r}")
        return self._gateways[gateway_id]

    @property
    def gateways(self) -> List[Gateway]:
        return list(self._gateways)

    def gateways_for(self, token_wt: TokenId) -> List[Gateway]:
        return [self._gateways[gid] for gid in self._by_wrapped.get(token_wt, [])]

    def escrow(self, gateway_id: GatewayId) -> int:
        gw = self.gateway(gateway_id)
        return self.ledger.balance_of(gw.origin_chain, gw.token_t, gw.account)

    def set_unwrap_fee(self, gateway_id: GatewayId, fee_flat_rgu: int) -> None:
        gw = self.gateway(gateway_id)
        check_amount(fee_flat_rgu)
        if fee_flat_rgu > 0:
            self.ledger.rgu()
        gw.unwrap_fee_flat_rgu = fee_flat_rgu

    def bootstrap(self, gateway_id: GatewayId, account: AccountId, amount: int) -> None:
        """Genesis issuance: mint T straight into escrow and the matching wT to ``account``."""
        gw = self.gateway(gateway_id)
        check_amount(amount)
        if amount == 0:
            return
        self.ledger.mint(gw.origin_chain, gw.token_t, gw.account, amount, authority=self._authority)
        self.ledger.mint(gw.dest_chain, gw.token_wt, account, amount, authority=self._authority)
        gw.outstanding += amount

    def _execute(self, gw: Gateway, item: PendingTransfer) -> None:
        if item.kind is PendingKind.MINT:
            self.ledger.mint(gw.dest_chain, gw.token_wt, item.beneficiary, item.amount, authority=self._authority)
            gw.outstanding += item.amount
        else:
            self.ledger.transfer(gw.origin_chain, gw.token_t, gw.account, item.beneficiary, item.amount)

    def _submit(self, gw: Gateway, item: PendingTransfer) -> None:
        """Queue ``item``, or settle it on the spot when the gateway has no confirmation latency."""
        if gw.latency_ticks == 0:
            self._execute(gw, item)
            return
        heapq.heappush(gw.queue, (item.mature_at, gw.enqueued, item))
        gw.enqueued += 1

    def lock(self, gateway_id: GatewayId, user: AccountId, amount: int, now: Tick) -> None:
        """Move T from ``user`` into escrow and queue the wT mint (settled at once when latency is 0)."""
        gw = self.gateway(gateway_id)
        check_amount(amount)
        if amount == 0:
            raise ZeroAmount("lock amount must be positive")
        held = self.ledger.balance_of(gw.origin_chain, gw.token_t, user)
        if held < amount:
            raise InsufficientBalance(f"{user} holds {held} T, cannot lock {amount}")

        self.ledger.transfer(gw.origin_chain, gw.token_t, user, gw.account, amount)
        self._submit(gw, PendingTransfer(PendingKind.MINT, user, amount, now + gw.latency_ticks))
        gw.locked_total += amount
        logger.debug("Gateway %d: %s locked %d, mint matures at %d.", gateway_id, user, amount, now + gw.latency_ticks)

    def unwrap(self, gateway_id: GatewayId, user: AccountId, amount: int, now: Tick) -> None:
        """Burn wT and the flat RGU fee from ``user`` and queue the T unlock (settled at once when latency is 0)."""
        gw = self.gateway(gateway_id)
        check_amount(amount)
        if amount == 0:
            raise ZeroAmount("unwrap amount must be positive")
        held = self.ledger.balance_of(gw.dest_chain, gw.token_wt, user)
        if held < amount:
            raise InsufficientBalance(f"{user} holds {held} wT, cannot unwrap {amount}")
        if gw.outstanding < amount:
            raise InsufficientOutstanding(f"gateway {gateway_id} has only {gw.outstanding} wT outstanding, cannot unwrap {amount}")
        fee = gw.unwrap_fee_flat_rgu
        if fee > 0:
            rgu = self.ledger.rgu()
            rgu_held = self.ledger.balance_of(rgu.home_chain, rgu.token_id, user)
            if rgu_held < fee:
                raise InsufficientRguForFee(f"{user} holds {rgu_held} RGU, unwrap fee is {fee}")

        self.ledger.burn(gw.dest_chain, gw.token_wt, user, amount, authority=self._authority)
        if fee > 0:
            rgu = self.ledger.rgu()
            self.ledger.burn(rgu.home_chain, rgu.token_id, user, fee, authority=self._authority)
            gw.fees_burned += fee
            self.total_fee_burned += fee
        gw.outstanding -= amount
        gw.unwrapped_total += amount
        self._submit(gw, PendingTransfer(PendingKind.UNLOCK, user, amount, now + gw.latency_ticks))
        logger.debug("Gateway %d: %s unwrapped %d (fee %d), unlock matures at %d.", gateway_id, user, amount, fee, now + gw.latency_ticks)

    def process_pending(self, gateway_id: GatewayId, now: Tick) -> int:
        """Execute every queued transfer with ``mature_at <= now``; return how many ran."""
        gw = self.gateway(gateway_id)
        matured = 0
        while gw.queue and gw.queue[0][0] <= now:
            _, _, item = heapq.heappop(gw.queue)
            self._execute(gw, item)
            matured += 1
        if matured:
            logger.debug("Gateway %d: %d transfer(s) matured at tick %d.", gateway_id, matured, now)
        return matured

    def process_all(self, now: Tick) -> int:
        return sum(self.process_pending(gw.gateway_id, now) for gw in self._gateways)

    def escrow_mismatches(self) -> List[str]:
        """Describe every gateway or wrapped token whose escrow identity does not hold."""
        problems = []
        for gw in self._gateways:
            escrow = self.escrow(gw.gateway_id)
            backed = gw.outstanding + gw.pending_total()
            if escrow != backed:
                problems.append(
                    f"gateway {gw.gateway_id}: escrow {escrow} != outstanding {gw.outstanding} + pending {gw.pending_total()}"
                )
        for token_wt, gateway_ids in self._by_wrapped.items():
            dest = self._gateways[gateway_ids[0]].dest_chain
            supply = self.ledger.total_supply(dest, token_wt)
            outstanding = sum(self._gateways[gid].outstanding for gid in gateway_ids)
            if supply != outstanding:
                problems.append(f"token {token_wt}: supply {supply} != outstanding across gateways {outstanding}")
        return problems
