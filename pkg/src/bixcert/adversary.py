"""Executable attack games against a certificate chain.

Two static games that the protocol should win, SCL (append a certificate
without the tail owner) and STS (rewrite the subject of a mid-chain
certificate), and one collusion attack that it loses: two members i < j
rewrite every certificate between them.

An adversary strategy is a plain callable.  SCL strategies take
``(chain, rng)`` and STS strategies take ``(chain, target_index, rng)``;
both return the forged chain.  They only ever see public chain data.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Sequence

from .certificate import (Certificate, CrossSignaturePair, Header, SubjectBlock, backward_message,
                          canonical_bytes, forward_message, sign_subject, strip_forward)
from .crypto.curves import base_mul
from .crypto.ecdsa import KeyPair, Signature, decode_point, ecdsa_sign, keygen, keypair_from_secret
from .crypto.scheme import SchemeHandle, hash_bytes
from .errors import GamePreconditionError
from .ledger import (CertificateChain, Fault, detect_fork, find_certificate_fault,
                     find_chain_fault, same_certificate, verify_chain)

SclStrategy = Callable[[CertificateChain, object], CertificateChain]
StsStrategy = Callable[[CertificateChain, int, object], CertificateChain]

BRUTE_FORCE_LIMIT = 1 << 20
DEFAULT_COLLISION_BUDGET = 1 << 12


class GameKind(enum.Enum):
    SCL = "SCL"
    STS = "STS"
    MIDCHAIN = "MIDCHAIN"


@dataclass(frozen=True)
class GameResult:
    game: GameKind
    strategy: str
    adversary_won: bool
    evidence: Optional[CertificateChain]
    rejected_by: Optional[Fault] = None
    forfeit: Optional[str] = None
    fork_index: Optional[int] = None

    def summary(self) -> str:
        verdict = "WON" if self.adversary_won else "LOST"
        parts = [f"game={self.game.value}", f"strategy={self.strategy}", f"adversary={verdict}"]
        if self.forfeit:
            parts.append(f"forfeit={self.forfeit.replace(' ', '_')}")
        if self.rejected_by is not None:
            where = "chain" if self.rejected_by.index is None else self.rejected_by.index
            parts.append(f"rejected_by={where}:{self.rejected_by.check.replace(' ', '_')}")
        if self.evidence is not None:
            parts.append(f"evidence_length={len(self.evidence)}")
        if self.fork_index is not None:
            parts.append(f"fork_index={self.fork_index}")
        return " ".join(parts)


def game_verifier_fault(target: Certificate, chain: CertificateChain,
                        root: Certificate) -> Optional[Fault]:
    """The honest verifier V(c*, CC*): right root, c* valid, CC* valid.

    The target is examined before the rest of the chain so that the
    reported fault points at the forged certificate when it is at fault.
    """
    if not len(chain) or not same_certificate(chain.root, root):
        return Fault(0, "trusted_root")
    try:
        index = chain.certificates.index(target)
    except ValueError:
        return Fault(None, "target_not_in_chain")
    try:
        name = find_certificate_fault(target, chain.scheme)
    except Exception as exc:  # noqa: BLE001
        name = f"malformed: {type(exc).__name__}"
    if name is not None:
        return Fault(index, name)
    return find_chain_fault(chain, root)


# -- adversary helpers ---------------------------------------------------------

def fresh_bix_id(taken: Sequence[bytes], rng) -> bytes:
    while True:
        candidate = bytes(rng.randrange(256) for _ in range(20))
        if candidate not in taken:
            return candidate


def brute_force_secret(public_key: bytes, scheme: SchemeHandle,
                       limit: int = BRUTE_FORCE_LIMIT) -> KeyPair:
    """Recover a secret scalar by exhaustive search; only feasible on toy curves."""
    curve = scheme.params
    if curve.n - 1 > limit:
        raise GamePreconditionError(f"exhaustive search over n={curve.n} exceeds the limit")
    target = decode_point(public_key, scheme)
    for d in range(1, curve.n):
        if base_mul(curve, d) == target:
            return keypair_from_secret(d, scheme)
    raise GamePreconditionError("public key is not a multiple of the base point")


def _random_signature(scheme: SchemeHandle, rng) -> Signature:
    n = scheme.params.n
    return Signature(rng.randrange(1, n), rng.randrange(1, n))


def _chain_ids(chain: CertificateChain) -> List[bytes]:
    return [c.subject.bix_id for c in chain]


def _scl_forgery(chain: CertificateChain, rng, issuer_halves) -> CertificateChain:
    """Attach an adversary certificate; ``issuer_halves`` supplies the two
    signatures that should have come from the tail owner."""
    scheme = chain.scheme
    tail = chain.tail
    me_key = keygen(scheme, rng)
    me = SubjectBlock(fresh_bix_id(_chain_ids(chain), rng), me_key.public_bytes)
    my_sig = sign_subject(me, me_key, scheme, rng)
    header = Header(len(chain), tail.header.version, tail.header.date)
    bwd = backward_message(header, tail.subject, me, scheme)
    fwd = forward_message(tail.header, tail.subject, me, scheme)
    fwd_first, bwd_first = issuer_halves(tail, bwd, fwd)
    completed = replace(tail, next_subject=me, next_subject_signature=my_sig,
                        forward_cross=CrossSignaturePair(fwd_first, ecdsa_sign(fwd, me_key, scheme, rng)))
    new_tail = Certificate(
        header=header, issuer=tail.subject, subject=me,
        issuer_signature=tail.subject_signature,
        subject_signature=my_sig,
        backward_cross=CrossSignaturePair(bwd_first, ecdsa_sign(bwd, me_key, scheme, rng)),
    )
    return CertificateChain(chain.certificates[:-1] + (completed, new_tail), scheme)


def scl_signature_copy(chain: CertificateChain, rng) -> CertificateChain:
    """Splice in the tail owner's existing cross signature as both missing halves."""
    def halves(tail, bwd, fwd):
        copied = tail.backward_cross.second
        return copied, copied
    return _scl_forgery(chain, rng, halves)


def scl_random_signature(chain: CertificateChain, rng) -> CertificateChain:
    """Guess the tail owner's signatures uniformly at random."""
    return _scl_forgery(chain, rng, lambda tail, bwd, fwd: (_random_signature(chain.scheme, rng),
                                                            _random_signature(chain.scheme, rng)))


def scl_subject_swap(chain: CertificateChain, rng) -> CertificateChain:
    """Swap the adversary's subject in and reuse the tail's honest cross pair verbatim."""
    forged = _scl_forgery(chain, rng, lambda tail, bwd, fwd: (tail.backward_cross.first,
                                                              tail.backward_cross.first))
    tail = chain.tail
    completed, new_tail = forged[-2], forged[-1]
    completed = replace(completed, forward_cross=tail.backward_cross)
    new_tail = replace(new_tail, backward_cross=tail.backward_cross)
    return CertificateChain(forged.certificates[:-2] + (completed, new_tail), chain.scheme)


def scl_brute_force(chain: CertificateChain, rng) -> CertificateChain:
    """Recover the tail owner's secret by exhaustive search, then sign honestly."""
    scheme = chain.scheme
    stolen = brute_force_secret(chain.tail.subject.public_key, scheme)
    return _scl_forgery(chain, rng, lambda tail, bwd, fwd: (ecdsa_sign(fwd, stolen, scheme, rng),
                                                            ecdsa_sign(bwd, stolen, scheme, rng)))


SCL_STRATEGIES: Dict[str, SclStrategy] = {
    "signature-copy": scl_signature_copy,
    "random-signature": scl_random_signature,
    "subject-swap": scl_subject_swap,
}


def _sts_forgery(chain: CertificateChain, i: int, new_subject: SubjectBlock, new_key: Optional[KeyPair],
                 rng, prev_signer: Optional[KeyPair] = None, replay: bool = False) -> CertificateChain:
    """Truncate after c_i and put ``new_subject`` in it.

    Signatures the adversary can make (with ``new_key`` and, if stolen,
    ``prev_signer`` for S_{i-1}) are made; the rest are copied from the
    honest chain.  With ``replay`` every cross pair is copied unchanged.
    """
    scheme = chain.scheme
    prev, target = chain[i - 1], chain[i]
    bwd = backward_message(target.header, prev.subject, new_subject, scheme)
    fwd = forward_message(prev.header, prev.subject, new_subject, scheme)

    def mine(message):
        return ecdsa_sign(message, new_key, scheme, rng)

    if new_key is not None:
        subject_sig = sign_subject(new_subject, new_key, scheme, rng)
    else:
        subject_sig = target.subject_signature
    if replay or new_key is None:
        bwd_pair, fwd_pair = target.backward_cross, prev.forward_cross
    elif prev_signer is not None:
        bwd_pair = CrossSignaturePair(ecdsa_sign(bwd, prev_signer, scheme, rng), mine(bwd))
        fwd_pair = CrossSignaturePair(ecdsa_sign(fwd, prev_signer, scheme, rng), mine(fwd))
    else:
        bwd_pair = CrossSignaturePair(target.backward_cross.first, mine(bwd))
        fwd_pair = CrossSignaturePair(prev.forward_cross.first, mine(fwd))
    new_prev = replace(prev, next_subject=new_subject, next_subject_signature=subject_sig,
                       forward_cross=fwd_pair)
    new_target = replace(strip_forward(target), subject=new_subject,
                         subject_signature=subject_sig, backward_cross=bwd_pair)
    return CertificateChain(chain.certificates[:i - 1] + (new_prev, new_target), scheme)


def sts_key_substitution(chain: CertificateChain, i: int, rng) -> CertificateChain:
    """Keep S_i's BIX ID, swap in an adversary key, re-sign what that key can sign."""
    key = keygen(chain.scheme, rng)
    subject = SubjectBlock(chain[i].subject.bix_id, key.public_bytes)
    return _sts_forgery(chain, i, subject, key, rng)


def sts_cross_replay(chain: CertificateChain, i: int, rng) -> CertificateChain:
    """New subject and key, honest cross signature pairs replayed unchanged."""
    key = keygen(chain.scheme, rng)
    subject = SubjectBlock(fresh_bix_id(_chain_ids(chain), rng), key.public_bytes)
    return _sts_forgery(chain, i, subject, key, rng, replay=True)


def sts_collision_search(chain: CertificateChain, i: int, rng,
                         budget: int = DEFAULT_COLLISION_BUDGET) -> CertificateChain:
    """Mutate S_i's BIX ID looking for a hash collision with the honest subject.

    A collision would let every honest signature be reused.  Without one
    the last candidate is submitted anyway.
    """
    scheme = chain.scheme
    original = chain[i].subject
    target_digest = hash_bytes(canonical_bytes(original), scheme)
    taken = set(_chain_ids(chain))
    candidate = original
    for _ in range(budget):
        bix = bytearray(original.bix_id)
        bix[rng.randrange(len(bix))] ^= rng.randrange(1, 256)
        bix[rng.randrange(len(bix))] = rng.randrange(256)
        if bytes(bix) == original.bix_id or bytes(bix) in taken:
            continue
        candidate = SubjectBlock(bytes(bix), original.public_key)
        if hash_bytes(canonical_bytes(candidate), scheme) == target_digest:
            break
    if candidate == original:
        candidate = SubjectBlock(fresh_bix_id(list(taken), rng), original.public_key)
    return _sts_forgery(chain, i, candidate, None, rng)


def sts_brute_force(chain: CertificateChain, i: int, rng) -> CertificateChain:
    """Recover SK_{i-1} by exhaustive search and re-sign c_{i-1} and c_i."""
    scheme = chain.scheme
    stolen = brute_force_secret(chain[i - 1].subject.public_key, scheme)
    old = chain[i].subject.public_key
    key = keygen(scheme, rng)
    while key.public_bytes == old:
        key = keygen(scheme, rng)
    subject = SubjectBlock(chain[i].subject.bix_id, key.public_bytes)
    return _sts_forgery(chain, i, subject, key, rng, prev_signer=stolen)


STS_STRATEGIES: Dict[str, StsStrategy] = {
    "key-substitution": sts_key_substitution,
    "collision-search": sts_collision_search,
    "cross-replay": sts_cross_replay,
}


def _strategy_name(strategy) -> str:
    for table in (SCL_STRATEGIES, STS_STRATEGIES):
        for name, fn in table.items():
            if fn is strategy:
                return name
    return getattr(strategy, "__name__", type(strategy).__name__)


def _require_honest(chain: CertificateChain) -> None:
    if not len(chain) or not verify_chain(chain, chain.root):
        raise GamePreconditionError("the challenger's chain must be honest and valid")


def play_scl_game(chain: CertificateChain, adversary: SclStrategy, rng) -> GameResult:
    """Static chain lengthening: can the adversary append without the tail owner?"""
    n = len(chain)
    if n < 2:
        raise GamePreconditionError("SCL needs a chain of length at least 2")
    _require_honest(chain)
    name = _strategy_name(adversary)
    forged = adversary(chain, rng)

    def forfeit(reason: str) -> GameResult:
        return GameResult(GameKind.SCL, name, False, forged, forfeit=reason)

    if not isinstance(forged, CertificateChain) or forged.scheme != chain.scheme:
        return forfeit("not a chain under the challenge scheme")
    if len(forged) != n + 1:
        return forfeit(f"length {len(forged)} != {n + 1}")
    if forged.certificates[:n - 1] != chain.certificates[:n - 1]:
        return forfeit("prefix differs from the honest chain")
    if strip_forward(forged[n - 1]) != chain[n - 1]:
        return forfeit("second-to-last certificate altered beyond its forward fields")
    fault = game_verifier_fault(forged[-1], forged, strip_forward(chain.root))
    return GameResult(GameKind.SCL, name, fault is None, forged, rejected_by=fault)


def play_sts_game(chain: CertificateChain, target_index: int, adversary: StsStrategy, rng) -> GameResult:
    """Static tampering with subject: can c_i's subject be changed in a truncated chain?"""
    n = len(chain)
    if not 1 <= target_index <= n - 2:
        raise GamePreconditionError(f"target index {target_index} outside [1, {n - 2}]")
    _require_honest(chain)
    name = _strategy_name(adversary)
    forged = adversary(chain, target_index, rng)

    def forfeit(reason: str) -> GameResult:
        return GameResult(GameKind.STS, name, False, forged, forfeit=reason)

    if not isinstance(forged, CertificateChain) or forged.scheme != chain.scheme:
        return forfeit("not a chain under the challenge scheme")
    if len(forged) != target_index + 1:
        return forfeit(f"length {len(forged)} != {target_index + 1}")
    if forged[target_index].subject == chain[target_index].subject:
        return forfeit("target subject unchanged")
    fault = game_verifier_fault(forged[-1], forged, strip_forward(chain.root))
    return GameResult(GameKind.STS, name, fault is None, forged, rejected_by=fault)


def midchain_alter_attack(chain: CertificateChain, i: int, j: int, keys_i: KeyPair, keys_j: KeyPair,
                          rng, new_ids: Optional[Sequence[bytes]] = None) -> CertificateChain:
    """Colluders S_i and S_j replace every subject strictly between them.

    Fresh key pairs are generated for the ``j - i - 1`` replacement subjects.
    ``new_ids`` optionally fixes their BIX IDs.  Certificates outside
    ``i..j`` are returned untouched.
    """
    if not (j > i + 1 > i > 0):
        raise GamePreconditionError(f"need j > i+1 > i > 0, got i={i}, j={j}")
    if j >= len(chain):
        raise GamePreconditionError(f"j={j} is past the end of a chain of length {len(chain)}")
    scheme = chain.scheme
    if keys_i.public_bytes != chain[i].subject.public_key:
        raise GamePreconditionError("keys_i do not belong to S_i")
    if keys_j.public_bytes != chain[j].subject.public_key:
        raise GamePreconditionError("keys_j do not belong to S_j")
    count = j - i - 1
    if new_ids is None:
        taken = _chain_ids(chain)
        new_ids = []
        for _ in range(count):
            new_ids.append(fresh_bix_id(taken + new_ids, rng))
    if len(new_ids) != count:
        raise GamePreconditionError(f"need {count} replacement BIX IDs, got {len(new_ids)}")

    subjects: Dict[int, SubjectBlock] = {i: chain[i].subject, j: chain[j].subject}
    keys: Dict[int, KeyPair] = {i: keys_i, j: keys_j}
    self_sigs: Dict[int, Signature] = {j: chain[j].subject_signature}
    for offset, bix in enumerate(new_ids, start=i + 1):
        keys[offset] = keygen(scheme, rng)
        subjects[offset] = SubjectBlock(bytes(bix), keys[offset].public_bytes)
        self_sigs[offset] = sign_subject(subjects[offset], keys[offset], scheme, rng)

    def pair(message: bytes, a: int, b: int) -> CrossSignaturePair:
        return CrossSignaturePair(ecdsa_sign(message, keys[a], scheme, rng),
                                  ecdsa_sign(message, keys[b], scheme, rng))

    certs = list(chain.certificates)
    ci = chain[i]
    certs[i] = replace(ci, next_subject=subjects[i + 1], next_subject_signature=self_sigs[i + 1],
                       forward_cross=pair(forward_message(ci.header, subjects[i], subjects[i + 1], scheme),
                                          i, i + 1))
    for k in range(i + 1, j):
        header = chain[k].header
        certs[k] = Certificate(
            header=header,
            issuer=subjects[k - 1],
            subject=subjects[k],
            issuer_signature=sign_subject(subjects[k - 1], keys[k - 1], scheme, rng),
            subject_signature=self_sigs[k],
            backward_cross=pair(backward_message(header, subjects[k - 1], subjects[k], scheme), k - 1, k),
            next_subject=subjects[k + 1],
            next_subject_signature=self_sigs[k + 1],
            forward_cross=pair(forward_message(header, subjects[k], subjects[k + 1], scheme), k, k + 1),
        )
    cj = chain[j]
    certs[j] = replace(cj, issuer=subjects[j - 1],
                       issuer_signature=sign_subject(subjects[j - 1], keys[j - 1], scheme, rng),
                       backward_cross=pair(backward_message(cj.header, subjects[j - 1], subjects[j], scheme),
                                           j - 1, j))
    return CertificateChain(tuple(certs), scheme)


def play_midchain_attack(chain: CertificateChain, i: int, j: int, keys_i: KeyPair, keys_j: KeyPair,
                         rng) -> GameResult:
    """Run the collusion attack and judge the result with the honest verifier."""
    forged = midchain_alter_attack(chain, i, j, keys_i, keys_j, rng)
    fault = find_chain_fault(forged, strip_forward(chain.root))
    return GameResult(GameKind.MIDCHAIN, "collusion", fault is None, forged, rejected_by=fault,
                      fork_index=detect_fork(chain, forged))
