# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""Shared constants for the protocol engine and simulator."""

DECIMALS = 6
UNIT = 10**DECIMALS
MAX_AMOUNT = 2**128 - 1

BPS_DENOMINATOR = 10_000
MAX_POOL_FEE_BPS = 1_000
DEFAULT_POOL_FEE_BPS = 30

# Scale of the reward-per-share accumulators.
PRECISION = 10**12
# Geometric price walks are quantized to this denominator after every step.
PRICE_QUANTUM = 10**12

MAX_TICKS = 10_000_000
MAX_SEED = 2**64 - 1

POOL_ACCOUNT_PREFIX = "pool:"
ESCROW_ACCOUNT_PREFIX = "escrow:gateway:"
GOVERNANCE_ESCROW_ACCOUNT = "governance:escrow"

EXIT_OK = 0
EXIT_IO_ERROR = 1
EXIT_VALIDATION_ERROR = 2
EXIT_INVARIANT_VIOLATION = 3
EXIT_AGENT_ERROR = 4
