# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""
Domain identifiers and value objects shared by every protocol module.

These structures carry no behavior beyond construction helpers so that the
ledger, gateways, pools, rewards and governance can all depend on them
without depending on each other.
"""

from dataclasses import dataclass
from enum import Enum
from typing import NewType, Optional

ChainId = NewType("ChainId", int)
TokenId = NewType("TokenId", int)
GatewayId = NewType("GatewayId", int)
PoolId = NewType("PoolId", int)
ProposalId = NewType("ProposalId", int)

AccountId = str
Tick = int


class TokenKindTag(Enum):
    ORIGIN = "origin"
    WRAPPED = "wrapped"
    RGU = "rgu"


@dataclass(frozen=True)
class TokenKind:
    """Kind of a registered token; wrapped tokens name their origin side."""

    tag: TokenKindTag
    underlying: Optional[TokenId] = None
    origin_chain: Optional[ChainId] = None

    @classmethod
    def origin(cls) -> "TokenKind":
        return cls(TokenKindTag.ORIGIN)

    @classmethod
    def rgu(cls) -> "TokenKind":
        return cls(TokenKindTag.RGU)

    @classmethod
    def wrapped(cls, underlying: TokenId, origin_chain: ChainId) -> "TokenKind":
        return cls(TokenKindTag.WRAPPED, underlying=underlying, origin_chain=origin_chain)

    @property
    def is_wrapped(self) -> bool:
        return self.tag is TokenKindTag.WRAPPED


@dataclass(frozen=True)
class Chain:
    chain_id: ChainId
    name: str


@dataclass(frozen=True)
class Token:
    token_id: TokenId
    symbol: str
    home_chain: ChainId
    kind: TokenKind


class PendingKind(Enum):
    MINT = "mint"
    UNLOCK = "unlock"


@dataclass(frozen=True)
class PendingTransfer:
    """One queued gateway transfer waiting for its confirmation tick."""

    kind: PendingKind
    beneficiary: AccountId
    amount: int
    mature_at: Tick
