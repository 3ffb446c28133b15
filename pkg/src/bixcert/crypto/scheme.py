"""Registry of hash functions and signature schemes.

A :class:`SchemeHandle` names one hash and one signature scheme.  Two
pairings ship: ``PRODUCTION`` (SHA-256 + ECDSA on secp256k1) and ``TOY``
(SHA-256 + ECDSA on a 19-element curve whose secrets fall to brute force).
A third hash, ``sha256/8``, keeps one byte of SHA-256 so collision searches
finish instantly in tests.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable, Dict

from ..errors import SchemeError, UnknownSchemeIdError
from .curves import SECP256K1, TOY19, CurveParams


@dataclass(frozen=True)
class HashAlgorithm:
    name: str
    wire_id: int
    digest_size: int
    fn: Callable[[bytes], bytes]


@dataclass(frozen=True)
class SignatureAlgorithm:
    name: str
    wire_id: int
    curve: CurveParams


_HASHES: Dict[str, HashAlgorithm] = {}
_SIGNATURES: Dict[str, SignatureAlgorithm] = {}


def register_hash(alg: HashAlgorithm) -> None:
    if any(h.wire_id == alg.wire_id and h.name != alg.name for h in _HASHES.values()):
        raise SchemeError(f"hash wire id {alg.wire_id} already taken")
    _HASHES[alg.name] = alg


def register_signature(alg: SignatureAlgorithm) -> None:
    if any(s.wire_id == alg.wire_id and s.name != alg.name for s in _SIGNATURES.values()):
        raise SchemeError(f"signature wire id {alg.wire_id} already taken")
    alg.curve.validate()
    _SIGNATURES[alg.name] = alg


def _sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def _sha256_trunc8(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()[:1]


register_hash(HashAlgorithm("sha256", 1, 32, _sha256))
register_hash(HashAlgorithm("sha256/8", 2, 1, _sha256_trunc8))
register_signature(SignatureAlgorithm("ecdsa-secp256k1", 1, SECP256K1))
register_signature(SignatureAlgorithm("ecdsa-toy19", 2, TOY19))


@dataclass(frozen=True)
class SchemeHandle:
    hash_id: str
    sig_id: str

    def __post_init__(self):
        if self.hash_id not in _HASHES:
            raise SchemeError(f"unknown hash id {self.hash_id!r}")
        if self.sig_id not in _SIGNATURES:
            raise SchemeError(f"unknown signature id {self.sig_id!r}")

    @property
    def hash_algorithm(self) -> HashAlgorithm:
        return _HASHES[self.hash_id]

    @property
    def params(self) -> CurveParams:
        return _SIGNATURES[self.sig_id].curve

    @property
    def digest_size(self) -> int:
        return _HASHES[self.hash_id].digest_size

    @property
    def wire_ids(self) -> tuple:
        return (_HASHES[self.hash_id].wire_id, _SIGNATURES[self.sig_id].wire_id)

    @classmethod
    def from_wire_ids(cls, hash_wire: int, sig_wire: int) -> "SchemeHandle":
        hash_name = next((h.name for h in _HASHES.values() if h.wire_id == hash_wire), None)
        sig_name = next((s.name for s in _SIGNATURES.values() if s.wire_id == sig_wire), None)
        if hash_name is None:
            raise UnknownSchemeIdError(f"unknown hash wire id {hash_wire}")
        if sig_name is None:
            raise UnknownSchemeIdError(f"unknown signature wire id {sig_wire}")
        return cls(hash_name, sig_name)

    def __str__(self) -> str:
        return f"{self.hash_id}+{self.sig_id}"


PRODUCTION = SchemeHandle("sha256", "ecdsa-secp256k1")
TOY = SchemeHandle("sha256", "ecdsa-toy19")

SCHEMES = {"production": PRODUCTION, "toy": TOY}


def hash_bytes(data: bytes, scheme: SchemeHandle) -> bytes:
    """Digest of ``data`` under the scheme's hash."""
    return scheme.hash_algorithm.fn(bytes(data))
