# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""Unit tests, one module per graviton_sim component."""
