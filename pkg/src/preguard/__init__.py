# SPDX-FileCopyrightText: 2026-present preguard contributors
#
# SPDX-License-Identifier: MIT
