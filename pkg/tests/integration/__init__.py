# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""Integration tests - whole-scenario engine runs."""
