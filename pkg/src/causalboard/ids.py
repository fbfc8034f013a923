"""ULID generation for model, variable, and edge identifiers."""

from __future__ import annotations

import secrets
import time

_CROCKFORD = "0123456789ABCDEFGHJKMNPQRSTVWXYZ"


def ulid() -> str:
    """Return a 26-character ULID (48-bit ms timestamp + 80 random bits).

    Lexicographic order follows creation time, which keeps serialized
    projects diff-friendly without a coordination service.
    """
    value = (int(time.time() * 1000) & ((1 << 48) - 1)) << 80
    value |= secrets.randbits(80)
    chars = []
    for shift in range(125, -5, -5):
        chars.append(_CROCKFORD[(value >> shift) & 0x1F])
    return "".join(chars)
