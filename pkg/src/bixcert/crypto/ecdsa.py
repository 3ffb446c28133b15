"""ECDSA key generation, signing and verification.

Randomness is always passed in.  Any object with a ``randrange(start, stop)``
method works; ``random.Random(seed)`` gives reproducible runs and
``secrets.SystemRandom()`` gives real ones.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd
from typing import Tuple

from ..errors import EncodingError, ParameterError, SigningError
from .curves import INFINITY, Point, base_mul, double_base_mul, is_on_curve
from .scheme import SchemeHandle, hash_bytes

MAX_NONCE_ATTEMPTS = 128


@dataclass(frozen=True)
class Signature:
    r: int
    s: int

    def to_bytes(self, scheme: SchemeHandle) -> bytes:
        width = scheme.params.scalar_bytes
        try:
            return self.r.to_bytes(width, "big") + self.s.to_bytes(width, "big")
        except OverflowError as exc:
            raise EncodingError(f"signature component wider than {width} bytes") from exc

    @classmethod
    def from_bytes(cls, data: bytes, scheme: SchemeHandle) -> "Signature":
        # Only the width is checked; range violations are the verifier's call.
        width = scheme.params.scalar_bytes
        if len(data) != 2 * width:
            raise EncodingError(f"signature must be {2 * width} bytes, got {len(data)}")
        r = int.from_bytes(data[:width], "big")
        s = int.from_bytes(data[width:], "big")
        return cls(r, s)


@dataclass(frozen=True)
class KeyPair:
    scheme: SchemeHandle
    secret: int = field(repr=False)
    public: Tuple[int, int]

    @property
    def public_bytes(self) -> bytes:
        return encode_point(self.public, self.scheme)


def encode_point(point: Point, scheme: SchemeHandle) -> bytes:
    """Uncompressed x || y, each coordinate big-endian at field width."""
    if point is INFINITY:
        raise EncodingError("cannot encode the point at infinity")
    width = scheme.params.field_bytes
    x, y = point
    return x.to_bytes(width, "big") + y.to_bytes(width, "big")


def decode_point(data: bytes, scheme: SchemeHandle) -> Tuple[int, int]:
    curve = scheme.params
    width = curve.field_bytes
    if len(data) != 2 * width:
        raise EncodingError(f"public key must be {2 * width} bytes, got {len(data)}")
    point = (int.from_bytes(data[:width], "big"), int.from_bytes(data[width:], "big"))
    if not is_on_curve(curve, point):
        raise EncodingError("public key is not a curve point")
    return point


def digest_to_int(digest: bytes, n: int) -> int:
    return int.from_bytes(digest, "big") % n


def keypair_from_secret(secret: int, scheme: SchemeHandle) -> KeyPair:
    curve = scheme.params
    if not 1 <= secret < curve.n:
        raise ParameterError("secret scalar outside [1, n-1]")
    return KeyPair(scheme, secret, base_mul(curve, secret))


def keygen(scheme: SchemeHandle, rng) -> KeyPair:
    curve = scheme.params
    if curve.n < 2:
        raise ParameterError(f"group order {curve.n} too small for key generation")
    return keypair_from_secret(rng.randrange(1, curve.n), scheme)


def ecdsa_sign(message: bytes, key: KeyPair, scheme: SchemeHandle, rng,
               max_attempts: int = MAX_NONCE_ATTEMPTS) -> Signature:
    curve = scheme.params
    n = curve.n
    e = digest_to_int(hash_bytes(message, scheme), n)
    for _ in range(max_attempts):
        k = rng.randrange(1, n)
        if gcd(k, n) != 1:
            continue
        x1, _ = base_mul(curve, k)
        r = x1 % n
        if r == 0:
            continue
        s = pow(k, -1, n) * (e + key.secret * r) % n
        if s == 0:
            continue
        return Signature(r, s)
    raise SigningError(f"no usable nonce after {max_attempts} attempts")


def ecdsa_verify(message: bytes, sig: Signature, public, scheme: SchemeHandle) -> bool:
    """Check ``sig`` on ``message``; ``public`` is a point or its encoding.

    Never raises: malformed keys or signatures just fail.
    """
    if isinstance(public, (bytes, bytearray)):
        public = bytes(public)
    elif public is not None:
        try:
            public = (int(public[0]), int(public[1]))
        except (TypeError, ValueError, IndexError):
            return False
    if not isinstance(sig, Signature):
        return False
    return _verify_cached(bytes(message), sig.r, sig.s, public, scheme)


@lru_cache(maxsize=1 << 16)
def _verify_cached(message: bytes, r: int, s: int, public, scheme: SchemeHandle) -> bool:
    curve = scheme.params
    n = curve.n
    if not (isinstance(r, int) and isinstance(s, int) and 1 <= r < n and 1 <= s < n):
        return False
    if isinstance(public, bytes):
        try:
            public = decode_point(public, scheme)
        except EncodingError:
            return False
    if public is INFINITY or not is_on_curve(curve, public):
        return False
    e = digest_to_int(hash_bytes(message, scheme), n)
    w = pow(s, -1, n)
    point = double_base_mul(curve, e * w % n, r * w % n, public)
    if point is INFINITY:
        return False
    return point[0] % n == r
