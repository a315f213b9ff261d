# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""
Multi-chain token ledger.

The ledger is the single source of truth for balances and total supplies on
every simulated chain. Amounts are unsigned integers in minimal units (six
decimal places for every token). Minting and burning require a capability
granted by the ledger owner; the gateway, reward and governance modules each
hold one.

Every mutating method validates all of its preconditions before touching any
state, so a raised error always leaves the ledger unchanged.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

from graviton_sim.constants import MAX_AMOUNT
from graviton_sim.domain import AccountId, Chain, ChainId, Token, TokenId, TokenKind, TokenKindTag
from graviton_sim.errors import (
    BadUnderlying,
    DuplicateChainName,
    DuplicateSymbolOnChain,
    InsufficientBalance,
    Overflow,
    PermissionDenied,
    SecondRguToken,
    UnknownChain,
    UnknownEntity,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Capability:
    """Mint/burn authority handed out by :meth:`Ledger.grant`. Compared by identity."""

    holder: str


def check_amount(amount: int) -> None:
    """Reject negative or out-of-range amounts."""
    if isinstance(amount, bool) or not isinstance(amount, int):
        raise TypeError(f"amount must be an int, got {type(amount).__name__}")
    if amount < 0:
        raise ValueError(f"amount must be non-negative, got {amount}")
    if amount > MAX_AMOUNT:
        raise Overflow(f"amount {amount} exceeds the 128-bit range")


class Ledger:
    """Per-chain token registry plus balances and supplies."""

    def __init__(self) -> None:
        self._chains: List[Chain] = []
        self._chain_by_name: Dict[str, ChainId] = {}
        self._tokens: List[Token] = []
        self._symbols: Dict[Tuple[ChainId, str], TokenId] = {}
        self._rgu: Optional[TokenId] = None
        self._balances: Dict[Tuple[ChainId, TokenId], Dict[AccountId, int]] = {}
        self._supply: Dict[Tuple[ChainId, TokenId], int] = {}
        self._capabilities: List[Capability] = []

    # Registry

    def register_chain(self, name: str) -> ChainId:
        if not name or not name.strip():
            raise ValueError("chain name must be non-empty")
        if name in self._chain_by_name:
            raise DuplicateChainName(f"chain '{name}' is already registered")
        chain_id = ChainId(len(self._chains))
        self._chains.append(Chain(chain_id=chain_id, name=name))
        self._chain_by_name[name] = chain_id
        logger.debug("Registered chain %s as %d.", name, chain_id)
        return chain_id

    def register_token(self, chain: ChainId, symbol: str, kind: TokenKind) -> TokenId:
        self.chain(chain)
        if not symbol or not symbol.strip():
            raise ValueError("token symbol must be non-empty")
        if (chain, symbol) in self._symbols:
            raise DuplicateSymbolOnChain(f"symbol '{symbol}' already exists on chain {self._chains[chain].name}")
        if kind.tag is TokenKindTag.RGU and self._rgu is not None:
            raise SecondRguToken("an RGU token is already registered")
        if kind.tag is TokenKindTag.WRAPPED:
            if kind.underlying is None or not 0 <= kind.underlying < len(self._tokens):
                raise BadUnderlying(f"wrapped token '{symbol}' references an unknown underlying token")
            underlying = self._tokens[kind.underlying]
            if underlying.kind.tag is not TokenKindTag.ORIGIN:
                raise BadUnderlying(f"underlying of '{symbol}' must be an origin token, got {underlying.kind.tag.value}")
            if kind.origin_chain is not None and kind.origin_chain != underlying.home_chain:
                raise BadUnderlying(f"origin chain of '{symbol}' does not match its underlying's home chain")
            if underlying.home_chain == chain:
                raise BadUnderlying(f"wrapped token '{symbol}' must live on a different chain than its underlying")
            kind = TokenKind.wrapped(underlying.token_id, underlying.home_chain)

        token_id = TokenId(len(self._tokens))
        self._tokens.append(Token(token_id=token_id, symbol=symbol, home_chain=chain, kind=kind))
        self._symbols[(chain, symbol)] = token_id
        self._balances[(chain, token_id)] = {}
        self._supply[(chain, token_id)] = 0
        if kind.tag is TokenKindTag.RGU:
            self._rgu = token_id
        logger.debug("Registered token %s (%s) on chain %d as %d.", symbol, kind.tag.value, chain, token_id)
        return token_id

    def chain(self, chain: ChainId) -> Chain:
        if not isinstance(chain, int) or not 0 <= chain < len(self._chains):
            raise UnknownChain(f"unknown chain id {chain!r}")
        return self._chains[chain]

    def chain_by_name(self, name: str) -> ChainId:
        try:
            return self._chain_by_name[name]
        except KeyError:
            raise UnknownChain(f"unknown chain '{name}'") from None

    def token(self, token: TokenId) -> Token:
        if not isinstance(token, int) or not 0 <= token < len(self._tokens):
            raise UnknownEntity(f"unknown token id {token!r}")
        return self._tokens[token]

    def token_by_symbol(self, chain: ChainId, symbol: str) -> TokenId:
        try:
            return self._symbols[(chain, symbol)]
        except KeyError:
            raise UnknownEntity(f"no token '{symbol}' on chain {chain}") from None

    @property
    def chains(self) -> List[Chain]:
        return list(self._chains)

    @property
    def tokens(self) -> List[Token]:
        return list(self._tokens)

    @property
    def rgu_token(self) -> Optional[TokenId]:
        return self._rgu

    def rgu(self) -> Token:
        """Return the RGU token, which must already be registered."""
        if self._rgu is None:
            raise UnknownEntity("no RGU token is registered")
        return self._tokens[self._rgu]

    # Capabilities

    def grant(self, holder: str) -> Capability:
        capability = Capability(holder=holder)
        self._capabilities.append(capability)
        return capability

    def _require(self, authority: Capability) -> None:
        if not any(authority is granted for granted in self._capabilities):
            raise PermissionDenied(f"'{getattr(authority, 'holder', authority)}' may not mint or burn")

    # Balances

    def _key(self, chain: ChainId, token: TokenId) -> Tuple[ChainId, TokenId]:
        self.chain(chain)
        if self.token(token).home_chain != chain:
            raise UnknownEntity(f"token {token} is not registered on chain {chain}")
        return (chain, token)

    def balance_of(self, chain: ChainId, token: TokenId, account: AccountId) -> int:
        return self._balances[self._key(chain, token)].get(account, 0)

    def total_supply(self, chain: ChainId, token: TokenId) -> int:
        return self._supply[self._key(chain, token)]

    def holders(self, chain: ChainId, token: TokenId) -> Iterator[Tuple[AccountId, int]]:
        """Yield (account, balance) pairs with a non-zero balance in insertion order."""
        yield from list(self._balances[self._key(chain, token)].items())

    def accounts(self) -> List[AccountId]:
        """Every account that currently holds anything, sorted."""
        seen = set()
        for balances in self._balances.values():
            seen.update(balances)
        return sorted(seen)

    def mint(self, chain: ChainId, token: TokenId, account: AccountId, amount: int, *, authority: Capability) -> None:
        self._require(authority)
        key = self._key(chain, token)
        check_amount(amount)
        if amount == 0:
            return
        new_supply = self._supply[key] + amount
        if new_supply > MAX_AMOUNT:
            raise Overflow(f"supply of token {token} would exceed the 128-bit range")
        balances = self._balances[key]
        balances[account] = balances.get(account, 0) + amount
        self._supply[key] = new_supply

    def burn(self, chain: ChainId, token: TokenId, account: AccountId, amount: int, *, authority: Capability) -> None:
        self._require(authority)
        key = self._key(chain, token)
        check_amount(amount)
        balances = self._balances[key]
        held = balances.get(account, 0)
        if held < amount:
            raise InsufficientBalance(f"{account} holds {held} of token {token}, cannot burn {amount}")
        if amount == 0:
            return
        self._set(balances, account, held - amount)
        self._supply[key] -= amount

    def transfer(self, chain: ChainId, token: TokenId, sender: AccountId, recipient: AccountId, amount: int) -> None:
        key = self._key(chain, token)
        check_amount(amount)
        balances = self._balances[key]
        held = balances.get(sender, 0)
        if held < amount:
            raise InsufficientBalance(f"{sender} holds {held} of token {token}, cannot transfer {amount}")
        if amount == 0 or sender == recipient:
            return
        self._set(balances, sender, held - amount)
        balances[recipient] = balances.get(recipient, 0) + amount

    @staticmethod
    def _set(balances: Dict[AccountId, int], account: AccountId, value: int) -> None:
        if value:
            balances[account] = value
        else:
            balances.pop(account, None)

    def supply_mismatches(self) -> List[Tuple[ChainId, TokenId, int, int]]:
        """Return (chain, token, sum_of_balances, total_supply) for every inconsistent pair."""
        mismatches = []
        for (chain, token), balances in self._balances.items():
            total = sum(balances.values())
            if total != self._supply[(chain, token)] or any(value < 0 for value in balances.values()):
                mismatches.append((chain, token, total, self._supply[(chain, token)]))
        return mismatches
