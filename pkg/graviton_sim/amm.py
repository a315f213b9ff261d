# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""
Constant-product AMM pools.

Each pool pairs a ``token_w`` side (usually a wrapped token) with a
``token_o`` side (a liquid native token or stablecoin) on one chain. Swap
fees stay in the reserves, so the reserve product only ever grows. All
rounding favors the pool: withdrawals and share mints floor, the swap
divisor term and the implied deposit ceil.

Reserves are mirrored by ledger balances of the ``pool:<id>`` account.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Callable, Dict, List, Optional, Tuple

from graviton_sim.constants import BPS_DENOMINATOR, DEFAULT_POOL_FEE_BPS, MAX_POOL_FEE_BPS, POOL_ACCOUNT_PREFIX
from graviton_sim.domain import AccountId, ChainId, PoolId, TokenId
from graviton_sim.errors import (
    BadToken,
    DuplicatePair,
    EmptyPool,
    FeeTooHigh,
    InsufficientBalance,
    InsufficientShares,
    SlippageExceeded,
    UnknownEntity,
    ZeroAmount,
    ZeroShares,
)
from graviton_sim.ledger import Ledger, check_amount

logger = logging.getLogger(__name__)

ShareListener = Callable[[PoolId, AccountId, int, int], None]


def pool_account(pool_id: int) -> AccountId:
    return f"{POOL_ACCOUNT_PREFIX}{pool_id}"


def ceil_div(numerator: int, denominator: int) -> int:
    return -(-numerator // denominator)


def get_amount_out(reserve_in: int, reserve_out: int, amount_in: int, fee_bps: int) -> int:
    """
    Output of an exact-input swap against reserves ``(reserve_in, reserve_out)``.

    ``out = y - ceil(x * y / (x + floor(amount_in * (10000 - fee) / 10000)))``
    """
    effective_in = amount_in * (BPS_DENOMINATOR - fee_bps) // BPS_DENOMINATOR
    if effective_in == 0:
        return 0
    return reserve_out - ceil_div(reserve_in * reserve_out, reserve_in + effective_in)


@dataclass
class Pool:
    pool_id: PoolId
    chain: ChainId
    token_w: TokenId
    token_o: TokenId
    fee_bps: int = DEFAULT_POOL_FEE_BPS
    weight: int = 0
    reserve_w: int = 0
    reserve_o: int = 0
    total_shares: int = 0
    shares: Dict[AccountId, int] = field(default_factory=dict)

    @property
    def account(self) -> AccountId:
        return pool_account(self.pool_id)

    @property
    def is_empty(self) -> bool:
        return self.total_shares == 0

    def reserves_for(self, token_in: TokenId) -> Tuple[int, int]:
        """Return (reserve of token_in, reserve of the other side)."""
        if token_in == self.token_w:
            return self.reserve_w, self.reserve_o
        if token_in == self.token_o:
            return self.reserve_o, self.reserve_w
        raise BadToken(f"token {token_in} is not part of pool {self.pool_id}")

    def other(self, token_in: TokenId) -> TokenId:
        self.reserves_for(token_in)
        return self.token_o if token_in == self.token_w else self.token_w


class AmmExchange:
    """Registry and operations for every pool of a run."""

    def __init__(self, ledger: Ledger, share_listener: Optional[ShareListener] = None) -> None:
        self.ledger = ledger
        self.share_listener = share_listener
        self._pools: List[Pool] = []

    def create_pool(
        self,
        chain: ChainId,
        token_w: TokenId,
        token_o: TokenId,
        fee_bps: int = DEFAULT_POOL_FEE_BPS,
        weight: int = 0,
    ) -> PoolId:
        self.ledger.chain(chain)
        for token in (token_w, token_o):
            if self.ledger.token(token).home_chain != chain:
                raise UnknownEntity(f"token {token} is not registered on chain {chain}")
        if token_w == token_o:
            raise DuplicatePair("a pool needs two distinct tokens")
        if not 0 <= fee_bps <= MAX_POOL_FEE_BPS:
            raise FeeTooHigh(f"fee_bps must be within 0..{MAX_POOL_FEE_BPS}, got {fee_bps}")
        if weight < 0:
            raise ValueError(f"pool weight must be non-negative, got {weight}")
        pair = {token_w, token_o}
        for pool in self._pools:
            if pool.chain == chain and {pool.token_w, pool.token_o} == pair:
                raise DuplicatePair(f"pool {pool.pool_id} already trades this pair")

        pool_id = PoolId(len(self._pools))
        self._pools.append(Pool(pool_id=pool_id, chain=chain, token_w=token_w, token_o=token_o, fee_bps=fee_bps, weight=weight))
        logger.debug("Created pool %d on chain %d (%d/%d, fee %d bps).", pool_id, chain, token_w, token_o, fee_bps)
        return pool_id

    def pool(self, pool_id: PoolId) -> Pool:
        if not isinstance(pool_id, int) or not 0 <= pool_id < len(self._pools):
            raise UnknownEntity(f"unknown pool id {pool_id!r}")
        return self._pools[pool_id]

    @property
    def pools(self) -> List[Pool]:
        return list(self._pools)

    def set_fee(self, pool_id: PoolId, fee_bps: int) -> None:
        if not 0 <= fee_bps <= MAX_POOL_FEE_BPS:
            raise FeeTooHigh(f"fee_bps must be within 0..{MAX_POOL_FEE_BPS}, got {fee_bps}")
        self.pool(pool_id).fee_bps = fee_bps

    def set_weight(self, pool_id: PoolId, weight: int) -> None:
        if weight < 0:
            raise ValueError(f"pool weight must be non-negative, got {weight}")
        self.pool(pool_id).weight = weight

    def _notify(self, pool: Pool, account: AccountId, old: int, new: int) -> None:
        if self.share_listener is not None and old != new:
            self.share_listener(pool.pool_id, account, old, new)

    def _require_balance(self, pool: Pool, token: TokenId, account: AccountId, amount: int) -> None:
        held = self.ledger.balance_of(pool.chain, token, account)
        if held < amount:
            raise InsufficientBalance(f"{account} holds {held} of token {token}, needs {amount}")

    def add_liquidity(
        self,
        pool_id: PoolId,
        account: AccountId,
        amount_w: int,
        amount_o: Optional[int] = None,
    ) -> Tuple[int, int]:
        """
        Deposit liquidity and return ``(shares_minted, amount_o_taken)``.

        An empty pool takes both amounts as given and mints ``isqrt(w * o)``
        shares. A live pool ignores ``amount_o`` and takes the ceiling of the
        amount implied by the current price.
        """
        pool = self.pool(pool_id)
        check_amount(amount_w)
        if pool.is_empty:
            if amount_o is None:
                raise ValueError("the first deposit into an empty pool must give amount_o")
            check_amount(amount_o)
            taken_o = amount_o
            minted = isqrt(amount_w * amount_o)
        else:
            taken_o = ceil_div(amount_w * pool.reserve_o, pool.reserve_w)
            minted = amount_w * pool.total_shares // pool.reserve_w
        if minted == 0:
            raise ZeroShares(f"deposit of {amount_w} into pool {pool_id} is too small to mint a share")
        self._require_balance(pool, pool.token_w, account, amount_w)
        self._require_balance(pool, pool.token_o, account, taken_o)

        self.ledger.transfer(pool.chain, pool.token_w, account, pool.account, amount_w)
        self.ledger.transfer(pool.chain, pool.token_o, account, pool.account, taken_o)
        old = pool.shares.get(account, 0)
        pool.reserve_w += amount_w
        pool.reserve_o += taken_o
        pool.total_shares += minted
        pool.shares[account] = old + minted
        self._notify(pool, account, old, old + minted)
        logger.debug("Pool %d: %s added %d/%d for %d shares.", pool_id, account, amount_w, taken_o, minted)
        return minted, taken_o

    def remove_liquidity(self, pool_id: PoolId, account: AccountId, shares: int) -> Tuple[int, int]:
        """Burn ``shares`` and return the floored pro-rata ``(amount_w, amount_o)``."""
        pool = self.pool(pool_id)
        check_amount(shares)
        held = pool.shares.get(account, 0)
        if shares > held:
            raise InsufficientShares(f"{account} holds {held} shares of pool {pool_id}, cannot remove {shares}")
        if shares == 0:
            return 0, 0
        amount_w = shares * pool.reserve_w // pool.total_shares
        amount_o = shares * pool.reserve_o // pool.total_shares

        self.ledger.transfer(pool.chain, pool.token_w, pool.account, account, amount_w)
        self.ledger.transfer(pool.chain, pool.token_o, pool.account, account, amount_o)
        pool.reserve_w -= amount_w
        pool.reserve_o -= amount_o
        pool.total_shares -= shares
        if held == shares:
            del pool.shares[account]
        else:
            pool.shares[account] = held - shares
        self._notify(pool, account, held, held - shares)
        logger.debug("Pool %d: %s removed %d shares for %d/%d.", pool_id, account, shares, amount_w, amount_o)
        return amount_w, amount_o

    def quote_out(self, pool_id: PoolId, token_in: TokenId, amount_in: int) -> int:
        pool = self.pool(pool_id)
        reserve_in, reserve_out = pool.reserves_for(token_in)
        if pool.is_empty:
            raise EmptyPool(f"pool {pool_id} has no liquidity")
        return get_amount_out(reserve_in, reserve_out, amount_in, pool.fee_bps)

    def swap_exact_in(
        self,
        pool_id: PoolId,
        account: AccountId,
        token_in: TokenId,
        amount_in: int,
        min_out: int = 0,
    ) -> int:
        pool = self.pool(pool_id)
        reserve_in, reserve_out = pool.reserves_for(token_in)
        check_amount(amount_in)
        if pool.is_empty:
            raise EmptyPool(f"pool {pool_id} has no liquidity")
        if amount_in == 0:
            raise ZeroAmount("swap amount must be positive")
        self._require_balance(pool, token_in, account, amount_in)
        amount_out = get_amount_out(reserve_in, reserve_out, amount_in, pool.fee_bps)
        if amount_out < min_out:
            raise SlippageExceeded(f"swap would return {amount_out}, below min_out {min_out}")

        token_out = pool.other(token_in)
        self.ledger.transfer(pool.chain, token_in, account, pool.account, amount_in)
        self.ledger.transfer(pool.chain, token_out, pool.account, account, amount_out)
        if token_in == pool.token_w:
            pool.reserve_w += amount_in
            pool.reserve_o -= amount_out
        else:
            pool.reserve_o += amount_in
            pool.reserve_w -= amount_out
        return amount_out

    def spot_price(self, pool_id: PoolId) -> Fraction:
        """Exact price of ``token_w`` in ``token_o`` (oT per wT)."""
        pool = self.pool(pool_id)
        if pool.is_empty:
            raise EmptyPool(f"pool {pool_id} has no liquidity")
        return Fraction(pool.reserve_o, pool.reserve_w)

    def quote_slippage(self, pool_id: PoolId, amount_in: int, token_in: Optional[TokenId] = None) -> Fraction:
        """
        Price impact of selling ``amount_in`` of ``token_in`` (default ``token_w``).

        Uses the fee-free curve in exact rationals, ``out = y * d / (x + d)``,
        against execution at the spot price: ``1 - out / (d * y / x) = d / (x + d)``.
        """
        pool = self.pool(pool_id)
        if token_in is None:
            token_in = pool.token_w
        reserve_in, reserve_out = pool.reserves_for(token_in)
        if pool.is_empty:
            raise EmptyPool(f"pool {pool_id} has no liquidity")
        check_amount(amount_in)
        if amount_in == 0:
            return Fraction(0)
        out = Fraction(reserve_out * amount_in, reserve_in + amount_in)
        at_spot = Fraction(amount_in * reserve_out, reserve_in)
        return 1 - out / at_spot

    def consistency_problems(self) -> List[str]:
        problems = []
        for pool in self._pools:
            pid = pool.pool_id
            flags = (pool.reserve_w > 0, pool.reserve_o > 0, pool.total_shares > 0)
            if len(set(flags)) != 1:
                problems.append(f"pool {pid}: partially initialized {pool.reserve_w}/{pool.reserve_o}/{pool.total_shares}")
            if sum(pool.shares.values()) != pool.total_shares:
                problems.append(f"pool {pid}: share sum {sum(pool.shares.values())} != total {pool.total_shares}")
            held_w = self.ledger.balance_of(pool.chain, pool.token_w, pool.account)
            held_o = self.ledger.balance_of(pool.chain, pool.token_o, pool.account)
            if (held_w, held_o) != (pool.reserve_w, pool.reserve_o):
                problems.append(f"pool {pid}: ledger holds {held_w}/{held_o}, reserves are {pool.reserve_w}/{pool.reserve_o}")
        return problems
