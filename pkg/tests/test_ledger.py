import random
from dataclasses import replace

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import honest
from bixcert.adversary import midchain_alter_attack
from bixcert.certificate import CrossSignaturePair, Header, SubjectBlock, strip_forward
from bixcert.crypto import PRODUCTION, Signature
from bixcert.errors import (AppendError, BadMagicError, ChainFormatError, EncodingError,
                            IncomparableChainsError, TruncatedChainError, UnknownSchemeIdError,
                            UnsupportedVersionError)
from bixcert.ledger import (CertificateChain, Direction, Fault, all_prefix_compatible, append_certificate,
                            decode_chain, detect_fork, encode_chain, find_chain_fault,
                            find_certificate_fault, length, same_certificate, verify_certificate,
                            verify_chain)

FWD, BWD = Direction.FORWARD, Direction.BACKWARD


def _replace_cert(chain, index, **changes):
    certs = list(chain.certificates)
    certs[index] = replace(certs[index], **changes)
    return CertificateChain(tuple(certs), chain.scheme)


def _bad(sig):
    return Signature(sig.r, sig.s ^ 1)


def test_honest_chains_verify_both_ways(prod6):
    assert length(prod6) == 6
    for direction in (FWD, BWD):
        assert verify_chain(prod6, prod6.root, direction)
    for k in range(1, 7):
        assert verify_chain(prod6.truncated(k), prod6.root)


def test_every_certificate_verifies_alone(prod6):
    assert all(verify_certificate(c, prod6) for c in prod6)
    assert find_certificate_fault(prod6[3], PRODUCTION) is None


def test_wrong_trusted_root(prod6):
    other = honest(2, "production", seed=99)[0]
    assert find_chain_fault(prod6, other.root) == Fault(0, "trusted_root")


def test_completed_root_still_matches_its_tail_form(prod6):
    assert not prod6.root.is_tail_form
    assert verify_chain(prod6, strip_forward(prod6.root))


def test_empty_chain():
    chain = CertificateChain((), PRODUCTION)
    assert find_chain_fault(chain, honest(2)[0].root) == Fault(None, "empty")
    assert str(Fault(3, "issuer_link")) == "certificate 3: issuer_link"


@pytest.mark.parametrize("index, field, check", [
    (2, "subject_signature", "subject_signature"),
    (2, "issuer_signature", "issuer_signature"),
    (4, "next_subject_signature", "next_subject_signature"),
])
def test_single_signature_faults(prod6, index, field, check):
    bad = _replace_cert(prod6, index, **{field: _bad(getattr(prod6[index], field))})
    assert find_chain_fault(bad, prod6.root) == Fault(index, check)


@pytest.mark.parametrize("pair, half", [("backward_cross", "first"), ("backward_cross", "second"),
                                        ("forward_cross", "first"), ("forward_cross", "second")])
def test_cross_signature_faults(prod6, pair, half):
    old = getattr(prod6[2], pair)
    new = replace(old, **{half: _bad(getattr(old, half))})
    bad = _replace_cert(prod6, 2, **{pair: new})
    assert find_chain_fault(bad, prod6.root) == Fault(2, f"{pair}.{half}")


def test_structural_faults(prod6):
    assert find_chain_fault(_replace_cert(prod6, 3, header=Header(7)), prod6.root) == Fault(3, "sequence_number")
    assert find_chain_fault(_replace_cert(prod6, 3, issuer=prod6[1].subject), prod6.root) == Fault(3, "issuer_link")
    swapped = CertificateChain(prod6.certificates[:2] + (prod6[3], prod6[2]) + prod6.certificates[4:], PRODUCTION)
    assert find_chain_fault(swapped, prod6.root).index == 2
    stripped = _replace_cert(prod6, 2, next_subject=None, next_subject_signature=None, forward_cross=None)
    assert find_chain_fault(stripped, prod6.root) == Fault(2, "complete_form")
    half = _replace_cert(prod6, 2, forward_cross=CrossSignaturePair(prod6[2].forward_cross.first))
    assert find_chain_fault(half, prod6.root) == Fault(2, "complete_form")
    assert find_chain_fault(CertificateChain(prod6.certificates[:5], PRODUCTION), prod6.root) == Fault(4, "tail_form")


def test_bad_public_key(prod6):
    junk = SubjectBlock(prod6.tail.subject.bix_id, b"\x01" * 64)
    assert find_certificate_fault(replace(prod6.tail, subject=junk), PRODUCTION) == "subject.public_key"
    assert find_chain_fault(_replace_cert(prod6, 5, subject=junk), prod6.root) == Fault(5, "next_subject_link")


def test_directions_report_their_first_fault(prod6):
    bad = _replace_cert(prod6, 1, subject_signature=_bad(prod6[1].subject_signature))
    bad = _replace_cert(bad, 4, issuer_signature=_bad(prod6[4].issuer_signature))
    assert find_chain_fault(bad, prod6.root, FWD).index == 1
    assert find_chain_fault(bad, prod6.root, BWD).index == 4


def test_duplicate_bix_id(prod6):
    bad = _replace_cert(prod6, 3, subject=SubjectBlock(prod6[1].subject.bix_id, prod6[3].subject.public_key))
    assert find_chain_fault(bad, prod6.root) is not None


def test_verifier_never_raises(prod6):
    bogus = CertificateChain((prod6.root, "not a certificate"), PRODUCTION)
    fault = find_chain_fault(bogus, prod6.root)
    assert fault.check.startswith("malformed")
    assert verify_chain(bogus, prod6.root) is False


def test_append(prod6):
    base = prod6.truncated(4)
    grown = append_certificate(base, prod6[3], strip_forward(prod6[4]))
    assert grown == prod6.truncated(5)
    with pytest.raises(AppendError, match="'issuer'"):
        append_certificate(base, replace(prod6[3], issuer=prod6[0].subject), strip_forward(prod6[4]))
    with pytest.raises(AppendError, match="sequence number"):
        append_certificate(base, prod6[3], replace(strip_forward(prod6[4]), header=Header(9)))
    with pytest.raises(AppendError, match="tail form"):
        append_certificate(base, prod6[3], prod6[4])
    with pytest.raises(AppendError, match="still lacks"):
        append_certificate(base, strip_forward(prod6[3]), strip_forward(prod6[4]))
    with pytest.raises(AppendError, match="not in tail form"):
        append_certificate(CertificateChain(prod6.certificates[:4], PRODUCTION), prod6[3], strip_forward(prod6[4]))


def test_same_certificate(prod6):
    assert same_certificate(prod6[2], strip_forward(prod6[2]))
    assert not same_certificate(prod6[2], prod6[3])


def test_detect_fork(prod6, prod6_parties):
    assert detect_fork(prod6, prod6) is None
    assert detect_fork(prod6.truncated(3), prod6) is None
    assert detect_fork(prod6, prod6.truncated(3)) is None
    forged = midchain_alter_attack(prod6, 1, 4, prod6_parties[1].key_pair, prod6_parties[4].key_pair,
                                   random.Random(1))
    assert detect_fork(prod6, forged) == 2
    # a holder that stopped at c_1 has nothing to compare against
    assert detect_fork(prod6.truncated(2), forged) is None
    assert detect_fork(prod6.truncated(3), forged) == 2
    assert detect_fork(forged.truncated(3), prod6) == 2
    other = honest(3, "production", seed=42)[0]
    with pytest.raises(IncomparableChainsError):
        detect_fork(prod6, other)
    assert all_prefix_compatible([prod6, prod6.truncated(2), prod6.truncated(5)])
    assert not all_prefix_compatible([prod6, forged])


def test_chain_file_round_trip(prod6, toy3):
    for chain in (prod6, toy3, prod6.truncated(1)):
        assert decode_chain(encode_chain(chain)) == chain
    raw = encode_chain(prod6)
    assert raw[:8] == b"BIXC\x01\x01\x01\x00"


def test_chain_file_errors_are_distinct(prod6):
    raw = encode_chain(prod6)
    cases = [
        (b"XXXX" + raw[4:], BadMagicError),
        (b"BI", BadMagicError),
        (raw[:4] + b"\x02" + raw[5:], UnsupportedVersionError),
        (raw[:5] + b"\x09" + raw[6:], UnknownSchemeIdError),
        (raw[:6] + b"\x09" + raw[7:], UnknownSchemeIdError),
        (raw[:9], TruncatedChainError),
        (raw[:-1], TruncatedChainError),
        (raw[:11 + 2], TruncatedChainError),
    ]
    for data, error in cases:
        with pytest.raises(error):
            decode_chain(data)
    with pytest.raises(EncodingError):
        decode_chain(raw + b"\x00")
    assert not issubclass(TruncatedChainError, BadMagicError)
    assert issubclass(UnsupportedVersionError, ChainFormatError)


@settings(max_examples=300, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.data())
def test_byte_mutation_never_crashes_or_passes(toy3, data):
    raw = bytearray(encode_chain(toy3))
    pos = data.draw(st.integers(0, len(raw) - 1))
    raw[pos] ^= data.draw(st.integers(1, 255))
    try:
        chain = decode_chain(bytes(raw))
    except (ChainFormatError, EncodingError):
        return
    for direction in (FWD, BWD):
        result = find_chain_fault(chain, toy3.root, direction)
        assert result is None or isinstance(result, Fault)
    assert verify_chain(chain, toy3.root, FWD) == verify_chain(chain, toy3.root, BWD)
