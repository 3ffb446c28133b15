"""Referees for the two primitive security games.

Both return plain booleans: ``True`` means the candidate is a genuine win
for the adversary.
"""
from __future__ import annotations

from typing import AbstractSet, Tuple

from .ecdsa import Signature, ecdsa_verify
from .scheme import SchemeHandle, hash_bytes


def collision_oracle(candidate: Tuple[bytes, bytes], scheme: SchemeHandle) -> bool:
    m1, m2 = candidate
    if m1 == m2:
        return False
    return hash_bytes(m1, scheme) == hash_bytes(m2, scheme)


def dss_game_referee(forgery: Tuple[bytes, Signature], queried: AbstractSet[bytes],
                     public, scheme: SchemeHandle) -> bool:
    """Existential forgery check: a valid signature on a message never queried."""
    message, sig = forgery
    if bytes(message) in queried:
        return False
    return ecdsa_verify(message, sig, public, scheme)
