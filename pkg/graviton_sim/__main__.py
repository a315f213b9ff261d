# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""
graviton-sim __main__ module.

This module enables running the simulator as `python3 -m graviton_sim`.
"""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
