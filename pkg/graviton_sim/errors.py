# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""
Exception hierarchy for graviton-sim.

Every protocol operation raises a subclass of ``GravitonError``. Errors that
describe a bad argument value also derive from ``ValueError`` so callers that
only care about "bad input" can catch that.
"""

from typing import Optional


class GravitonError(Exception):
    """Base class for all protocol and simulator errors."""


# Registry errors


class DuplicateChainName(GravitonError, ValueError):
    pass


class UnknownChain(GravitonError, LookupError):
    pass


class UnknownEntity(GravitonError, LookupError):
    pass


class DuplicateSymbolOnChain(GravitonError, ValueError):
    pass


class SecondRguToken(GravitonError, ValueError):
    pass


class BadUnderlying(GravitonError, ValueError):
    pass


class BadToken(GravitonError, ValueError):
    """Token is not part of the pool or pair being operated on."""


# Ledger errors


class InsufficientBalance(GravitonError):
    pass


class Overflow(GravitonError, ArithmeticError):
    pass


class PermissionDenied(GravitonError):
    """Mint or burn attempted without a granted capability."""


class ZeroAmount(GravitonError, ValueError):
    pass


# Gateway errors


class InconsistentTokenPair(GravitonError, ValueError):
    pass


class DuplicateGateway(GravitonError, ValueError):
    pass


class InsufficientRguForFee(InsufficientBalance):
    pass


class InsufficientOutstanding(InsufficientBalance):
    """Unwrap exceeds the wrapped supply issued through the chosen gateway."""


# AMM errors


class DuplicatePair(GravitonError, ValueError):
    pass


class FeeTooHigh(GravitonError, ValueError):
    pass


class ZeroShares(GravitonError, ValueError):
    pass


class InsufficientShares(GravitonError):
    pass


class SlippageExceeded(GravitonError):
    pass


class EmptyPool(GravitonError):
    pass


# Reward errors


class NonMonotonicTick(GravitonError, ValueError):
    pass


# Governance errors


class DepositTooSmall(GravitonError, ValueError):
    pass


class InvalidPayload(GravitonError, ValueError):
    pass


class NotActive(GravitonError):
    pass


class AlreadyVoted(GravitonError):
    pass


class ZeroWeight(GravitonError):
    pass


class TooEarly(GravitonError):
    pass


class AlreadyFinalized(GravitonError):
    pass


class ApplicationFailed(GravitonError):
    pass


# Simulator errors


class ValidationError(GravitonError, ValueError):
    """Scenario failed validation before any execution."""


class InvariantViolation(GravitonError):
    """An engine-wide invariant did not hold at a sweep point."""

    def __init__(self, invariant: str, tick: Optional[int], detail: str) -> None:
        self.invariant = invariant
        self.tick = tick
        self.detail = detail
        where = f" at tick {tick}" if tick is not None else ""
        super().__init__(f"invariant '{invariant}' violated{where}: {detail}")


class AgentError(GravitonError):
    """An agent hit an unexpected protocol error while acting."""

    def __init__(self, agent_id: int, tick: int, cause: Exception) -> None:
        self.agent_id = agent_id
        self.tick = tick
        self.cause = cause
        super().__init__(f"agent {agent_id} failed at tick {tick}: {cause}")
