"""Certificate chains and the honest verifier.

``verify_chain`` is total: anything malformed yields ``False``.  The
``find_*_fault`` variants return the first failing check instead, which is
what the CLI and the adversary games report as evidence.
"""
from __future__ import annotations

import enum
import hashlib
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

from .certificate import (Certificate, backward_message, decode_certificate,
                          encode_certificate, forward_message, strip_forward, verify_subject)
from .crypto.ecdsa import decode_point, ecdsa_verify
from .crypto.scheme import SchemeHandle
from .errors import (AppendError, BadMagicError, EncodingError, IncomparableChainsError,
                     TruncatedChainError, UnsupportedVersionError)

CHAIN_MAGIC = b"BIXC"
CHAIN_FORMAT_VERSION = 1


class Direction(enum.Enum):
    FORWARD = "fwd"
    BACKWARD = "bwd"


@dataclass(frozen=True)
class CertificateChain:
    certificates: Tuple[Certificate, ...]
    scheme: SchemeHandle

    def __post_init__(self):
        object.__setattr__(self, "certificates", tuple(self.certificates))

    def __len__(self) -> int:
        return len(self.certificates)

    def __getitem__(self, index):
        return self.certificates[index]

    def __iter__(self) -> Iterator[Certificate]:
        return iter(self.certificates)

    @property
    def root(self) -> Certificate:
        return self.certificates[0]

    @property
    def tail(self) -> Certificate:
        return self.certificates[-1]

    def index_of(self, bix_id: bytes) -> Optional[int]:
        for i, cert in enumerate(self.certificates):
            if cert.subject.bix_id == bix_id:
                return i
        return None

    def truncated(self, length: int) -> "CertificateChain":
        """First ``length`` certificates, the last one cut back to tail form."""
        certs = list(self.certificates[:length])
        if certs:
            certs[-1] = strip_forward(certs[-1])
        return CertificateChain(tuple(certs), self.scheme)


def length(chain: CertificateChain) -> int:
    return len(chain.certificates)


@dataclass(frozen=True)
class Fault:
    """First failed check; ``index`` is None for chain-wide failures."""

    index: Optional[int]
    check: str

    def __str__(self) -> str:
        where = "chain" if self.index is None else f"certificate {self.index}"
        return f"{where}: {self.check}"


def _valid_key(block, scheme) -> bool:
    try:
        decode_point(block.public_key, scheme)
    except EncodingError:
        return False
    return True


def _certificate_checks(cert: Certificate, scheme: SchemeHandle) -> Iterator[Tuple[str, Callable[[], bool]]]:
    yield "subject.public_key", lambda: _valid_key(cert.subject, scheme)
    yield "issuer.public_key", lambda: _valid_key(cert.issuer, scheme)
    yield "subject_signature", lambda: verify_subject(
        cert.subject, cert.subject_signature, cert.subject.public_key, scheme)
    yield "issuer_signature", lambda: verify_subject(
        cert.issuer, cert.issuer_signature, cert.issuer.public_key, scheme)

    def cross(half: str) -> bool:
        pair = cert.backward_cross
        sig = pair.first if half == "first" else pair.second
        key = cert.issuer.public_key if half == "first" else cert.subject.public_key
        if sig is None:
            return False
        return ecdsa_verify(backward_message(cert.header, cert.issuer, cert.subject, scheme),
                            sig, key, scheme)

    yield "backward_cross.first", lambda: cross("first")
    yield "backward_cross.second", lambda: cross("second")


def _forward_checks(cert: Certificate, scheme: SchemeHandle) -> Iterator[Tuple[str, Callable[[], bool]]]:
    nxt = cert.next_subject
    yield "next_subject.public_key", lambda: _valid_key(nxt, scheme)
    yield "next_subject_signature", lambda: verify_subject(
        nxt, cert.next_subject_signature, nxt.public_key, scheme)

    def cross(half: str) -> bool:
        pair = cert.forward_cross
        sig = pair.first if half == "first" else pair.second
        key = cert.subject.public_key if half == "first" else nxt.public_key
        if sig is None:
            return False
        return ecdsa_verify(forward_message(cert.header, cert.subject, nxt, scheme), sig, key, scheme)

    yield "forward_cross.first", lambda: cross("first")
    yield "forward_cross.second", lambda: cross("second")


def find_certificate_fault(cert: Certificate, scheme: SchemeHandle) -> Optional[str]:
    """Name of the first failing self-contained check on ``cert``, or None."""
    for name, check in _certificate_checks(cert, scheme):
        if not check():
            return name
    return None


def verify_certificate(cert: Certificate, chain: CertificateChain) -> bool:
    """Subject, issuer and backward cross signatures, from ``cert`` alone."""
    try:
        return find_certificate_fault(cert, chain.scheme) is None
    except Exception:  # noqa: BLE001 - the verifier never raises
        return False


def _position_checks(chain: CertificateChain, i: int,
                     bix_counts: Counter) -> Iterator[Tuple[str, Callable[[], bool]]]:
    certs = chain.certificates
    n = len(certs)
    cert = certs[i]
    scheme = chain.scheme
    yield "sequence_number", lambda: cert.header.sequence_number == i
    if i == 0:
        yield "root_form", lambda: cert.issuer == cert.subject
    else:
        yield "issuer_distinct", lambda: cert.issuer.bix_id != cert.subject.bix_id
        yield "issuer_link", lambda: cert.issuer == certs[i - 1].subject
        yield "next_subject_link", lambda: certs[i - 1].next_subject == cert.subject
    if i == n - 1:
        yield "tail_form", lambda: cert.is_tail_form
    else:
        yield "complete_form", lambda: (not cert.is_tail_form) and cert.forward_cross.complete
    yield "bix_id_unique", lambda: bix_counts[cert.subject.bix_id] == 1
    yield from _certificate_checks(cert, scheme)
    if not cert.is_tail_form:
        yield from _forward_checks(cert, scheme)


def find_chain_fault(chain: CertificateChain, trusted_root: Certificate,
                     direction: Direction = Direction.FORWARD) -> Optional[Fault]:
    """First failing check walking the chain in ``direction``, or None if valid."""
    try:
        certs = chain.certificates
        if not certs:
            return Fault(None, "empty")
        if not same_certificate(certs[0], trusted_root):
            return Fault(0, "trusted_root")
        bix_counts = Counter(c.subject.bix_id for c in certs)
        order = range(len(certs)) if direction is Direction.FORWARD else range(len(certs) - 1, -1, -1)
        for i in order:
            for name, check in _position_checks(chain, i, bix_counts):
                if not check():
                    return Fault(i, name)
        return None
    except Exception as exc:  # noqa: BLE001
        return Fault(None, f"malformed: {type(exc).__name__}")


def verify_chain(chain: CertificateChain, trusted_root: Certificate,
                 direction: Direction = Direction.FORWARD) -> bool:
    return find_chain_fault(chain, trusted_root, direction) is None


def _first_field_diff(a: Certificate, b: Certificate) -> Optional[str]:
    for name in ("header", "issuer", "subject", "issuer_signature", "subject_signature",
                 "backward_cross", "next_subject", "next_subject_signature", "forward_cross"):
        if getattr(a, name) != getattr(b, name):
            return name
    return None


def append_certificate(chain: CertificateChain, completed_tail: Certificate,
                       new_tail: Certificate) -> CertificateChain:
    """Replace the tail by its completed form and attach ``new_tail``.

    Only linkage and form are checked here; signatures are the verifier's job.
    """
    n = len(chain)
    if n == 0:
        raise AppendError("cannot append to an empty chain")
    old_tail = chain.tail
    if not old_tail.is_tail_form:
        raise AppendError("current tail is not in tail form")
    if completed_tail.is_tail_form:
        raise AppendError("completed tail still lacks its next subject")
    diff = _first_field_diff(strip_forward(completed_tail), old_tail)
    if diff is not None:
        raise AppendError(f"completed tail alters field {diff!r}")
    if completed_tail.forward_cross.second is None:
        raise AppendError("forward cross signature of completed tail is half-signed")
    if not new_tail.is_tail_form:
        raise AppendError("new tail must be in tail form")
    if new_tail.header.sequence_number != n:
        raise AppendError(f"new tail sequence number {new_tail.header.sequence_number} != {n}")
    if new_tail.issuer != old_tail.subject:
        raise AppendError("new tail issuer differs from current tail subject")
    if completed_tail.next_subject != new_tail.subject:
        raise AppendError("completed tail next subject differs from new tail subject")
    if new_tail.backward_cross.second is None:
        raise AppendError("backward cross signature of new tail is half-signed")
    if chain.index_of(new_tail.subject.bix_id) is not None:
        raise AppendError("new tail BIX ID already present in chain")
    return CertificateChain(chain.certificates[:-1] + (completed_tail, new_tail), chain.scheme)


def same_certificate(a: Certificate, b: Certificate) -> bool:
    """Equal as issued; a tail and its later completed form count as the same."""
    if strip_forward(a) != strip_forward(b):
        return False
    return a.is_tail_form or b.is_tail_form or a == b


def detect_fork(local: CertificateChain, received: CertificateChain) -> Optional[int]:
    """Index of the first certificate where the two chains certify different things.

    Returns None when one chain extends the other.  A certificate that only
    gained its forward-looking fields is not a divergence.  If two complete
    certificates differ only in those fields, the fork is reported at the
    next index, where the linked subject changes.
    """
    if not len(local) or not len(received):
        raise IncomparableChainsError("empty chain")
    if local.scheme != received.scheme or strip_forward(local.root) != strip_forward(received.root):
        raise IncomparableChainsError("chains have different roots")
    for i, (a, b) in enumerate(zip(local.certificates, received.certificates)):
        if strip_forward(a) != strip_forward(b):
            return i
        if not (a.is_tail_form or b.is_tail_form) and a != b:
            return i + 1
    return None


def encode_chain(chain: CertificateChain) -> bytes:
    hash_wire, sig_wire = chain.scheme.wire_ids
    parts = [CHAIN_MAGIC, bytes([CHAIN_FORMAT_VERSION, hash_wire, sig_wire]),
             len(chain).to_bytes(4, "big")]
    for cert in chain:
        body = encode_certificate(cert, chain.scheme)
        parts.append(len(body).to_bytes(4, "big") + body)
    return b"".join(parts)


def decode_chain(data: bytes) -> CertificateChain:
    data = bytes(data)
    if len(data) < 4 or data[:4] != CHAIN_MAGIC:
        raise BadMagicError("not a BIX chain file (bad magic)")
    if len(data) < 11:
        raise TruncatedChainError("chain header truncated")
    if data[4] != CHAIN_FORMAT_VERSION:
        raise UnsupportedVersionError(f"unsupported chain format version {data[4]}")
    scheme = SchemeHandle.from_wire_ids(data[5], data[6])
    count = int.from_bytes(data[7:11], "big")
    pos = 11
    certs: List[Certificate] = []
    for index in range(count):
        if pos + 4 > len(data):
            raise TruncatedChainError(f"truncated before certificate {index}")
        size = int.from_bytes(data[pos:pos + 4], "big")
        pos += 4
        if pos + size > len(data):
            raise TruncatedChainError(f"certificate {index} truncated")
        certs.append(decode_certificate(data[pos:pos + size], scheme))
        pos += size
    if pos != len(data):
        raise EncodingError(f"{len(data) - pos} trailing bytes after chain")
    return CertificateChain(tuple(certs), scheme)


def chain_fingerprint(chain: CertificateChain, size: int = 16) -> str:
    return hashlib.sha256(encode_chain(chain)).hexdigest()[:size]


def all_prefix_compatible(chains: Sequence[CertificateChain]) -> bool:
    return all(detect_fork(a, b) is None for a in chains for b in chains)
