# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""Contract tests - the CLI and documented file formats."""
