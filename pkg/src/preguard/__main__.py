# SPDX-FileCopyrightText: 2026-present preguard contributors
#
# SPDX-License-Identifier: MIT
import sys

if __name__ == "__main__":
    from preguard.cli import preguard

    sys.exit(preguard())
