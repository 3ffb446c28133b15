"""BIX certificates and their canonical byte encodings.

Every variable-length field is written as a 2-byte big-endian length
followed by the payload.  Certificate fields appear in table order:
header, issuer, subject, next subject, issuer signature, subject signature,
next-subject signature, backward cross pair, forward cross pair.  A field
that is not populated (the tail's forward-looking fields, or the missing half
of a cross pair during issuance) is written as a zero length with no payload.
"""
from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass, replace
from typing import Iterator, List, Optional, Tuple

from .crypto.ecdsa import KeyPair, Signature, decode_point, ecdsa_sign, ecdsa_verify
from .crypto.scheme import SchemeHandle, hash_bytes
from .errors import EncodingError

BIX_ID_LEN = 20
DEFAULT_VERSION = "1"
DEFAULT_DATE = _dt.date(2020, 1, 1)


def _lp(payload: bytes) -> bytes:
    if len(payload) > 0xFFFF:
        raise EncodingError(f"field of {len(payload)} bytes exceeds 65535")
    return len(payload).to_bytes(2, "big") + payload


class _Reader:
    def __init__(self, data: bytes):
        self.data = bytes(data)
        self.pos = 0

    def take(self, size: int) -> bytes:
        if self.pos + size > len(self.data):
            raise EncodingError("unexpected end of data")
        chunk = self.data[self.pos:self.pos + size]
        self.pos += size
        return chunk

    def field(self) -> bytes:
        return self.take(int.from_bytes(self.take(2), "big"))

    def done(self) -> None:
        if self.pos != len(self.data):
            raise EncodingError(f"{len(self.data) - self.pos} trailing bytes")


@dataclass(frozen=True)
class Header:
    sequence_number: int
    version: str = DEFAULT_VERSION
    date: _dt.date = DEFAULT_DATE

    def encode(self) -> bytes:
        if not 0 <= self.sequence_number < 1 << 64:
            raise EncodingError("sequence number out of range")
        try:
            version = self.version.encode("ascii")
        except UnicodeEncodeError as exc:
            raise EncodingError("version must be ASCII") from exc
        return (self.sequence_number.to_bytes(8, "big") + _lp(version)
                + _lp(self.date.isoformat().encode("ascii")))

    @classmethod
    def _read(cls, reader: _Reader) -> "Header":
        seq = int.from_bytes(reader.take(8), "big")
        try:
            version = reader.field().decode("ascii")
            date = _dt.date.fromisoformat(reader.field().decode("ascii"))
        except (UnicodeDecodeError, ValueError) as exc:
            raise EncodingError(f"bad header: {exc}") from exc
        return cls(seq, version, date)

    @classmethod
    def decode(cls, data: bytes) -> "Header":
        reader = _Reader(data)
        header = cls._read(reader)
        reader.done()
        return header


@dataclass(frozen=True)
class SubjectBlock:
    """A BIX ID bound to a serialized public key."""

    bix_id: bytes
    public_key: bytes

    def __post_init__(self):
        if len(self.bix_id) != BIX_ID_LEN:
            raise EncodingError(f"BIX ID must be {BIX_ID_LEN} bytes, got {len(self.bix_id)}")

    @classmethod
    def for_key(cls, bix_id: bytes, key: KeyPair) -> "SubjectBlock":
        return cls(bytes(bix_id), key.public_bytes)

    def public_point(self, scheme: SchemeHandle):
        return decode_point(self.public_key, scheme)


def canonical_bytes(block: SubjectBlock) -> bytes:
    return _lp(block.bix_id) + _lp(block.public_key)


def decode_block(data: bytes) -> SubjectBlock:
    reader = _Reader(data)
    block = SubjectBlock(reader.field(), reader.field())
    reader.done()
    return block


@dataclass(frozen=True)
class CrossSignaturePair:
    """Two signatures over one message; ``second`` is None while half-signed."""

    first: Signature
    second: Optional[Signature] = None

    @property
    def complete(self) -> bool:
        return self.second is not None


@dataclass(frozen=True)
class Certificate:
    header: Header
    issuer: SubjectBlock
    subject: SubjectBlock
    issuer_signature: Signature
    subject_signature: Signature
    backward_cross: CrossSignaturePair
    next_subject: Optional[SubjectBlock] = None
    next_subject_signature: Optional[Signature] = None
    forward_cross: Optional[CrossSignaturePair] = None

    def __post_init__(self):
        present = [f is not None for f in
                   (self.next_subject, self.next_subject_signature, self.forward_cross)]
        if any(present) and not all(present):
            raise EncodingError("next subject, its signature and the forward cross pair "
                                "must be present or absent together")

    @property
    def is_tail_form(self) -> bool:
        return self.next_subject is None

    @property
    def is_root_form(self) -> bool:
        return self.header.sequence_number == 0 and self.issuer == self.subject

    @property
    def sequence_number(self) -> int:
        return self.header.sequence_number


def strip_forward(cert: Certificate) -> Certificate:
    """The certificate as it stood when it was the chain's tail."""
    if cert.is_tail_form:
        return cert
    return replace(cert, next_subject=None, next_subject_signature=None, forward_cross=None)


def _sig_field(sig: Optional[Signature], scheme: SchemeHandle) -> bytes:
    return _lp(b"" if sig is None else sig.to_bytes(scheme))


def _pair_field(pair: Optional[CrossSignaturePair], scheme: SchemeHandle) -> bytes:
    if pair is None:
        return _lp(b"")
    return _lp(_sig_field(pair.first, scheme) + _sig_field(pair.second, scheme))


def encode_certificate(cert: Certificate, scheme: SchemeHandle) -> bytes:
    nxt = b"" if cert.next_subject is None else canonical_bytes(cert.next_subject)
    return b"".join([
        _lp(cert.header.encode()),
        _lp(canonical_bytes(cert.issuer)),
        _lp(canonical_bytes(cert.subject)),
        _lp(nxt),
        _sig_field(cert.issuer_signature, scheme),
        _sig_field(cert.subject_signature, scheme),
        _sig_field(cert.next_subject_signature, scheme),
        _pair_field(cert.backward_cross, scheme),
        _pair_field(cert.forward_cross, scheme),
    ])


def _read_sig(raw: bytes, scheme: SchemeHandle) -> Optional[Signature]:
    return None if raw == b"" else Signature.from_bytes(raw, scheme)


def _read_pair(raw: bytes, scheme: SchemeHandle) -> Optional[CrossSignaturePair]:
    if raw == b"":
        return None
    reader = _Reader(raw)
    first = _read_sig(reader.field(), scheme)
    second = _read_sig(reader.field(), scheme)
    reader.done()
    if first is None:
        raise EncodingError("cross pair without its first signature")
    return CrossSignaturePair(first, second)


def decode_certificate(data: bytes, scheme: SchemeHandle) -> Certificate:
    reader = _Reader(data)
    header = Header.decode(reader.field())
    issuer = decode_block(reader.field())
    subject = decode_block(reader.field())
    raw_next = reader.field()
    next_subject = decode_block(raw_next) if raw_next else None
    issuer_sig = _read_sig(reader.field(), scheme)
    subject_sig = _read_sig(reader.field(), scheme)
    next_sig = _read_sig(reader.field(), scheme)
    backward = _read_pair(reader.field(), scheme)
    forward = _read_pair(reader.field(), scheme)
    reader.done()
    if issuer_sig is None or subject_sig is None or backward is None:
        raise EncodingError("certificate missing a mandatory signature")
    return Certificate(header, issuer, subject, issuer_sig, subject_sig, backward,
                       next_subject, next_sig, forward)


def signed_regions(cert: Certificate, scheme: SchemeHandle) -> List[Tuple[str, int, int]]:
    """(field name, start, end) byte ranges of the encoding that are hashed or signed.

    These are the header and the three subject blocks; signature bytes are
    excluded.  Offsets index into ``encode_certificate(cert, scheme)``.
    """
    parts = [
        ("header", cert.header.encode()),
        ("issuer", canonical_bytes(cert.issuer)),
        ("subject", canonical_bytes(cert.subject)),
        ("next_subject", b"" if cert.next_subject is None else canonical_bytes(cert.next_subject)),
    ]
    regions, pos = [], 0
    for name, payload in parts:
        if payload:
            regions.append((name, pos, pos + 2 + len(payload)))
        pos += 2 + len(payload)
    return regions


def backward_message(header: Header, issuer: SubjectBlock, subject: SubjectBlock,
                     scheme: SchemeHandle) -> bytes:
    """H_i || h(S_{i-1}) || h(S_i)."""
    return (header.encode() + hash_bytes(canonical_bytes(issuer), scheme)
            + hash_bytes(canonical_bytes(subject), scheme))


def forward_message(header: Header, subject: SubjectBlock, next_subject: SubjectBlock,
                    scheme: SchemeHandle) -> bytes:
    """H_i || h(S_i) || h(S_{i+1}); same rule, different blocks."""
    return backward_message(header, subject, next_subject, scheme)


def sign_subject(block: SubjectBlock, key: KeyPair, scheme: SchemeHandle, rng) -> Signature:
    return ecdsa_sign(canonical_bytes(block), key, scheme, rng)


def verify_subject(block: SubjectBlock, sig: Optional[Signature], public: bytes,
                   scheme: SchemeHandle) -> bool:
    return sig is not None and ecdsa_verify(canonical_bytes(block), sig, public, scheme)


def make_root(subject: SubjectBlock, key: KeyPair, scheme: SchemeHandle, rng,
              version: str = DEFAULT_VERSION, date: _dt.date = DEFAULT_DATE) -> Certificate:
    if key.public_bytes != subject.public_key:
        raise ValueError("root key does not match the subject's public key")
    header = Header(0, version, date)
    message = backward_message(header, subject, subject, scheme)
    return Certificate(
        header=header,
        issuer=subject,
        subject=subject,
        issuer_signature=sign_subject(subject, key, scheme, rng),
        subject_signature=sign_subject(subject, key, scheme, rng),
        backward_cross=CrossSignaturePair(ecdsa_sign(message, key, scheme, rng),
                                          ecdsa_sign(message, key, scheme, rng)),
    )


def _sig_hex(sig: Optional[Signature], scheme: SchemeHandle) -> str:
    return "-" if sig is None else sig.to_bytes(scheme).hex()


def render_lines(cert: Certificate, scheme: SchemeHandle) -> Iterator[str]:
    h = cert.header
    yield f"sequence_number: {h.sequence_number}"
    yield f"version: {h.version}"
    yield f"date: {h.date.isoformat()}"
    for name, block in (("issuer", cert.issuer), ("subject", cert.subject),
                        ("next_subject", cert.next_subject)):
        if block is None:
            yield f"{name}: -"
        else:
            yield f"{name}.bix_id: {block.bix_id.hex()}"
            yield f"{name}.public_key: {block.public_key.hex()}"
    yield f"issuer_signature: {_sig_hex(cert.issuer_signature, scheme)}"
    yield f"subject_signature: {_sig_hex(cert.subject_signature, scheme)}"
    yield f"next_subject_signature: {_sig_hex(cert.next_subject_signature, scheme)}"
    for name, pair in (("backward_cross", cert.backward_cross), ("forward_cross", cert.forward_cross)):
        if pair is None:
            yield f"{name}: -"
        else:
            yield f"{name}.first: {_sig_hex(pair.first, scheme)}"
            yield f"{name}.second: {_sig_hex(pair.second, scheme)}"


def render_certificate(cert: Certificate, scheme: SchemeHandle) -> str:
    """Human-readable ``field: hex`` dump."""
    return "\n".join(render_lines(cert, scheme))
