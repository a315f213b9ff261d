# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""
graviton-sim package - Graviton wrapped-token liquidity protocol engine and
deterministic multi-chain scenario simulator.
"""

import logging

logging.getLogger(__name__).addHandler(logging.NullHandler())

__version__ = "0.1.0"
