import datetime as dt
import hashlib
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import honest
from bixcert.certificate import (Certificate, CrossSignaturePair, Header, SubjectBlock, backward_message,
                                 canonical_bytes, decode_block, decode_certificate, encode_certificate,
                                 forward_message, make_root, render_certificate, sign_subject,
                                 signed_regions, strip_forward, verify_subject)
from bixcert.crypto import PRODUCTION, TOY, Signature, keygen
from bixcert.errors import EncodingError

ID_A = bytes(range(20))
ID_B = bytes(range(20, 40))


def _toy_block(bix_id, x, y):
    return SubjectBlock(bix_id, bytes([x, y]))


def test_hand_assembled_encoding():
    a, b = _toy_block(ID_A, 5, 1), _toy_block(ID_B, 6, 3)
    cert = Certificate(Header(1), issuer=a, subject=b, issuer_signature=Signature(1, 2),
                       subject_signature=Signature(3, 4),
                       backward_cross=CrossSignaturePair(Signature(5, 6), Signature(7, 8)))
    header = bytes(7) + b"\x01" + b"\x00\x01" + b"1" + b"\x00\x0a" + b"2020-01-01"
    block_a = b"\x00\x14" + ID_A + b"\x00\x02\x05\x01"
    block_b = b"\x00\x14" + ID_B + b"\x00\x02\x06\x03"
    expected = (b"\x00\x17" + header + b"\x00\x1a" + block_a + b"\x00\x1a" + block_b + b"\x00\x00"
                + b"\x00\x02\x01\x02" + b"\x00\x02\x03\x04" + b"\x00\x00"
                + b"\x00\x08" + b"\x00\x02\x05\x06" + b"\x00\x02\x07\x08" + b"\x00\x00")
    assert encode_certificate(cert, TOY) == expected
    assert decode_certificate(expected, TOY) == cert


def test_half_signed_pair_encodes_empty_second():
    a = _toy_block(ID_A, 5, 1)
    cert = Certificate(Header(0), a, a, Signature(1, 1), Signature(1, 1),
                       CrossSignaturePair(Signature(2, 2)))
    assert encode_certificate(cert, TOY).endswith(b"\x00\x06\x00\x02\x02\x02\x00\x00\x00\x00")
    assert decode_certificate(encode_certificate(cert, TOY), TOY) == cert


def test_messages_follow_the_hash_layout():
    a, b = _toy_block(ID_A, 5, 1), _toy_block(ID_B, 6, 3)
    h = Header(4, "2", dt.date(2021, 5, 6))
    digest = lambda blk: hashlib.sha256(canonical_bytes(blk)).digest()  # noqa: E731
    assert backward_message(h, a, b, PRODUCTION) == h.encode() + digest(a) + digest(b)
    assert forward_message(h, a, b, PRODUCTION) == h.encode() + digest(a) + digest(b)
    assert backward_message(h, a, b, PRODUCTION) != backward_message(h, b, a, PRODUCTION)


@given(st.integers(0, 2 ** 64 - 1), st.text(alphabet="0123456789.abc", max_size=8),
       st.dates(min_value=dt.date(1, 1, 1)))
def test_header_round_trip(seq, version, date):
    h = Header(seq, version, date)
    assert Header.decode(h.encode()) == h


@given(st.binary(min_size=20, max_size=20), st.binary(max_size=80))
def test_block_round_trip(bix, key):
    block = SubjectBlock(bix, key)
    assert decode_block(canonical_bytes(block)) == block


def test_validation():
    with pytest.raises(EncodingError):
        SubjectBlock(b"short", b"")
    with pytest.raises(EncodingError):
        Header(-1).encode()
    with pytest.raises(EncodingError):
        Header(1, "vé").encode()
    a = _toy_block(ID_A, 5, 1)
    with pytest.raises(EncodingError):
        Certificate(Header(0), a, a, Signature(1, 1), Signature(1, 1), CrossSignaturePair(Signature(1, 1)),
                    next_subject=a)
    with pytest.raises(EncodingError):
        Header.decode(Header(1).encode()[:-1] + b"x")
    with pytest.raises(EncodingError):
        decode_certificate(b"\x00\x05abc", TOY)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([(3, "toy", 0), (4, "toy", 1), (3, "production", 0)]), st.data())
def test_chain_certificates_round_trip(entry, data):
    chain, _ = honest(*entry)
    cert = chain[data.draw(st.integers(0, len(chain) - 1))]
    raw = encode_certificate(cert, chain.scheme)
    assert decode_certificate(raw, chain.scheme) == cert
    assert encode_certificate(decode_certificate(raw, chain.scheme), chain.scheme) == raw


def test_signed_regions_cover_header_and_blocks(prod6):
    cert = prod6[2]
    raw = encode_certificate(cert, prod6.scheme)
    regions = {name: raw[a + 2:b] for name, a, b in signed_regions(cert, prod6.scheme)}
    assert regions == {
        "header": cert.header.encode(),
        "issuer": canonical_bytes(cert.issuer),
        "subject": canonical_bytes(cert.subject),
        "next_subject": canonical_bytes(cert.next_subject),
    }
    assert "next_subject" not in {n for n, _, _ in signed_regions(prod6.tail, prod6.scheme)}


def test_root_and_strip_forward():
    rng = random.Random(5)
    key = keygen(PRODUCTION, rng)
    block = SubjectBlock.for_key(ID_A, key)
    root = make_root(block, key, PRODUCTION, rng)
    assert root.is_root_form and root.is_tail_form and root.sequence_number == 0
    assert verify_subject(block, root.subject_signature, key.public_bytes, PRODUCTION)
    assert root.backward_cross.complete
    assert strip_forward(root) is root


def test_strip_forward_undoes_completion(prod6):
    cert = prod6[3]
    assert not cert.is_tail_form
    stripped = strip_forward(cert)
    assert stripped.is_tail_form and stripped.subject == cert.subject and stripped.header == cert.header


def test_sign_subject_binds_block():
    rng = random.Random(6)
    key = keygen(PRODUCTION, rng)
    block = SubjectBlock.for_key(ID_A, key)
    sig = sign_subject(block, key, PRODUCTION, rng)
    assert verify_subject(block, sig, key.public_bytes, PRODUCTION)
    assert not verify_subject(SubjectBlock(ID_B, key.public_bytes), sig, key.public_bytes, PRODUCTION)
    assert not verify_subject(block, None, key.public_bytes, PRODUCTION)


def test_render(prod6):
    text = render_certificate(prod6[1], prod6.scheme)
    assert text.splitlines()[0] == "sequence_number: 1"
    assert f"subject.bix_id: {prod6[1].subject.bix_id.hex()}" in text
    tail = render_certificate(prod6.tail, prod6.scheme)
    assert "next_subject: -" in tail.splitlines()
