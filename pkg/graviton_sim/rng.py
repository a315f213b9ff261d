# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""
Seeded random streams for reproducible runs.

Each consumer (agent, price feed) gets its own ``random.Random`` derived
from the master seed and a stable stream name, so adding a consumer never
shifts the numbers another one draws.
"""

import hashlib
import random


def derive_seed(master_seed: int, stream: str) -> int:
    digest = hashlib.sha256(f"{master_seed}:{stream}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def stream_rng(master_seed: int, stream: str) -> random.Random:
    return random.Random(derive_seed(master_seed, stream))
