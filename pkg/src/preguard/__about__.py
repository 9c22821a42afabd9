# SPDX-FileCopyrightText: 2026-present preguard contributors
#
# SPDX-License-Identifier: MIT
__version__ = "0.1.0"
