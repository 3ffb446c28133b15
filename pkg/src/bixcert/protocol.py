"""Certification requests and certificate exchange between parties.

Parties are small state machines talking over :class:`SimBus`, an in-process
queue delivered in ``(tick, insertion order)``.  Given the same seed and the
same sequence of calls, the bus transcript is byte-for-byte reproducible.

Joining, as seen on the bus::

    newcomer  --CertRequest-->     every certified party
    tail      --IssuerOffer-->     newcomer        (c_0, c_{n-1}, draft c_n)
    newcomer  --ChainQuery-->      tail
    tail      --ChainResponse-->   newcomer
    newcomer  --CounterSigned-->   tail            (completed c_{n-1}, c_n)
    newcomer  --ChainBroadcast-->  everyone else
"""
from __future__ import annotations

import datetime as _dt
import enum
import hashlib
import heapq
import itertools
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

from .certificate import (Certificate, CrossSignaturePair, Header, SubjectBlock, backward_message,
                          canonical_bytes, encode_certificate, forward_message, make_root,
                          sign_subject, verify_subject)
from .crypto.ecdsa import KeyPair, Signature, ecdsa_sign, ecdsa_verify, keygen
from .crypto.scheme import SchemeHandle
from .errors import AppendError, IncomparableChainsError, ProtocolAbort, ProtocolError
from .ledger import (CertificateChain, Direction, append_certificate, detect_fork, encode_chain,
                     find_chain_fault, same_certificate, verify_certificate, verify_chain)


class MessageKind(enum.Enum):
    CERT_REQUEST = "CertRequest"
    ISSUER_OFFER = "IssuerOffer"
    COUNTER_SIGNED = "CounterSigned"
    CHAIN_BROADCAST = "ChainBroadcast"
    CHAIN_QUERY = "ChainQuery"
    CHAIN_RESPONSE = "ChainResponse"


@dataclass(frozen=True)
class CertRequest:
    subject: SubjectBlock
    signature: Signature


@dataclass(frozen=True)
class IssuerOffer:
    root: Certificate
    issuer_cert: Certificate
    draft: Certificate


@dataclass(frozen=True)
class CompletedPair:
    completed_tail: Certificate
    new_tail: Certificate


@dataclass(frozen=True)
class ChainQuery:
    purpose: str = "sync"


@dataclass(frozen=True)
class ChainResponse:
    chain: Optional[CertificateChain]


@dataclass(frozen=True)
class ProtocolMessage:
    kind: MessageKind
    sender: bytes
    payload: object

    def payload_bytes(self, scheme: SchemeHandle) -> bytes:
        p = self.payload
        if isinstance(p, CertRequest):
            return canonical_bytes(p.subject) + p.signature.to_bytes(scheme)
        if isinstance(p, IssuerOffer):
            return b"".join(encode_certificate(c, scheme) for c in (p.root, p.issuer_cert, p.draft))
        if isinstance(p, CompletedPair):
            return encode_certificate(p.completed_tail, scheme) + encode_certificate(p.new_tail, scheme)
        if isinstance(p, ChainQuery):
            return p.purpose.encode()
        if isinstance(p, ChainResponse):
            return b"" if p.chain is None else encode_chain(p.chain)
        raise TypeError(f"unknown payload {type(p).__name__}")


class PartyState(enum.Enum):
    UNCERTIFIED = "uncertified"
    REQUESTED = "requested"
    AWAITING_CHAIN = "awaiting-chain"
    CERTIFIED = "certified"


class ExchangeOutcome(enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    INCONCLUSIVE = "inconclusive"

    def __bool__(self) -> bool:
        return self is ExchangeOutcome.ACCEPT


@dataclass(eq=False)
class Party:
    name: str
    bix_id: bytes
    key_pair: KeyPair
    trusted_root: Optional[Certificate] = None
    local_chain: Optional[CertificateChain] = None
    state: PartyState = PartyState.UNCERTIFIED
    direction: Direction = Direction.FORWARD
    pending_offer: Optional[ProtocolMessage] = None
    issuing_for: Optional[bytes] = None
    deferred: List[ProtocolMessage] = field(default_factory=list)
    forks: List[int] = field(default_factory=list)
    last_abort: Optional[str] = None

    @property
    def scheme(self) -> SchemeHandle:
        return self.key_pair.scheme

    @property
    def subject(self) -> SubjectBlock:
        return SubjectBlock.for_key(self.bix_id, self.key_pair)

    @property
    def index(self) -> Optional[int]:
        if self.local_chain is None:
            return None
        return self.local_chain.index_of(self.bix_id)

    @property
    def certificate(self) -> Optional[Certificate]:
        idx = self.index
        return None if idx is None else self.local_chain[idx]

    @property
    def is_tail_owner(self) -> bool:
        return (self.state is PartyState.CERTIFIED and self.local_chain is not None
                and self.local_chain.tail.subject == self.subject)

    def handle(self, msg: ProtocolMessage, bus: "SimBus") -> None:
        handler = _HANDLERS[msg.kind]
        handler(self, msg, bus)


class SimBus:
    """Deterministic message queue; also owns the transcript."""

    def __init__(self, rng, scheme: SchemeHandle):
        self.rng = rng
        self.scheme = scheme
        self.tick = 0
        self._queue: list = []
        self._counter = itertools.count()
        self.parties: Dict[bytes, Party] = {}
        self.transcript: List[str] = []
        self.faults: List[Callable[[bytes, ProtocolMessage], bool]] = []

    def register(self, party: Party) -> None:
        if party.bix_id in self.parties:
            raise ProtocolError(f"BIX ID of {party.name} already registered")
        self.parties[party.bix_id] = party

    def name_of(self, bix_id: bytes) -> str:
        party = self.parties.get(bix_id)
        return party.name if party is not None else bix_id.hex()[:8]

    def certified(self, exclude: Tuple[bytes, ...] = ()) -> List[Party]:
        return [p for p in self.parties.values()
                if p.state is PartyState.CERTIFIED and p.bix_id not in exclude]

    def log(self, line: str) -> None:
        self.transcript.append(f"{self.tick:05d} {line}")

    def send(self, recipient: bytes, msg: ProtocolMessage, delay: int = 1) -> None:
        heapq.heappush(self._queue, (self.tick + delay, next(self._counter), recipient, msg))

    def broadcast(self, msg: ProtocolMessage, exclude: Tuple[bytes, ...] = ()) -> int:
        recipients = self.certified(exclude=exclude + (msg.sender,))
        for party in recipients:
            self.send(party.bix_id, msg)
        return len(recipients)

    def pending(self) -> int:
        return len(self._queue)

    def step(self) -> bool:
        if not self._queue:
            return False
        tick, _, recipient, msg = heapq.heappop(self._queue)
        self.tick = tick
        digest = hashlib.sha256(msg.payload_bytes(self.scheme)).hexdigest()[:12]
        route = f"{msg.kind.value} {self.name_of(msg.sender)}->{self.name_of(recipient)} #{digest}"
        if any(fault(recipient, msg) for fault in self.faults):
            self.log(f"drop {route}")
            return True
        self.log(f"deliver {route}")
        party = self.parties.get(recipient)
        if party is not None:
            party.handle(msg, self)
        return True

    def run(self, max_steps: int = 1_000_000) -> int:
        steps = 0
        while steps < max_steps and self.step():
            steps += 1
        return steps


def make_request(newcomer: Party, rng) -> ProtocolMessage:
    subject = newcomer.subject
    return ProtocolMessage(MessageKind.CERT_REQUEST, newcomer.bix_id,
                           CertRequest(subject, sign_subject(subject, newcomer.key_pair,
                                                             newcomer.scheme, rng)))


def request_certification(newcomer: Party, bus: SimBus, rng=None) -> ProtocolMessage:
    """Self-sign the newcomer's subject and send the request to every certified party."""
    if newcomer.state in (PartyState.REQUESTED, PartyState.AWAITING_CHAIN):
        raise ProtocolError(f"{newcomer.name} already has a request in flight")
    if newcomer.state is PartyState.CERTIFIED:
        raise ProtocolError(f"{newcomer.name} is already certified")
    msg = make_request(newcomer, bus.rng if rng is None else rng)
    newcomer.state = PartyState.REQUESTED
    newcomer.last_abort = None
    count = bus.broadcast(msg)
    bus.log(f"request {newcomer.name} recipients={count}")
    return msg


def process_request(tail_owner: Party, request: ProtocolMessage, rng,
                    date: Optional[_dt.date] = None) -> Optional[ProtocolMessage]:
    """Issuer side of a join: half-sign c_{n-1} forward and draft c_n.

    Returns None when the request must be ignored (not the tail owner, bad
    self-signature, or a BIX ID already in the chain).
    """
    if not tail_owner.is_tail_owner:
        return None
    req: CertRequest = request.payload
    scheme = tail_owner.scheme
    new = req.subject
    if not verify_subject(new, req.signature, new.public_key, scheme):
        return None
    chain = tail_owner.local_chain
    if chain.index_of(new.bix_id) is not None:
        return None
    key = tail_owner.key_pair
    tail = chain.tail
    me = tail.subject
    n = len(chain)
    header = Header(n, tail.header.version, tail.header.date if date is None else date)

    fwd_half = ecdsa_sign(forward_message(tail.header, me, new, scheme), key, scheme, rng)
    issuer_cert = replace(tail, next_subject=new, next_subject_signature=req.signature,
                          forward_cross=CrossSignaturePair(fwd_half))
    draft = Certificate(
        header=header,
        issuer=me,
        subject=new,
        issuer_signature=sign_subject(me, key, scheme, rng),
        subject_signature=req.signature,
        backward_cross=CrossSignaturePair(
            ecdsa_sign(backward_message(header, me, new, scheme), key, scheme, rng)),
    )
    tail_owner.issuing_for = new.bix_id
    return ProtocolMessage(MessageKind.ISSUER_OFFER, tail_owner.bix_id,
                           IssuerOffer(chain.root, issuer_cert, draft))


def _abort(newcomer: Party, reason: str):
    newcomer.state = PartyState.UNCERTIFIED
    newcomer.pending_offer = None
    newcomer.last_abort = reason
    raise ProtocolAbort(reason)


def countersign(newcomer: Party, offer: ProtocolMessage, trusted_root: Certificate, rng,
                chain: Optional[CertificateChain]) -> ProtocolMessage:
    """Check the offer, add the newcomer's two signatures, verify the extended chain.

    ``chain`` is the CC fetched from the issuer.  On any failure the
    newcomer goes back to ``UNCERTIFIED`` and :class:`ProtocolAbort` is raised.
    """
    body: IssuerOffer = offer.payload
    scheme = newcomer.scheme
    me = newcomer.subject
    if not same_certificate(body.root, trusted_root):
        _abort(newcomer, "offer root differs from trusted root")
    if chain is None or not len(chain):
        _abort(newcomer, "no chain available")
    if chain.scheme != scheme:
        _abort(newcomer, "chain uses a different scheme")
    issuer_cert, draft = body.issuer_cert, body.draft
    if draft.subject != me or issuer_cert.next_subject != me:
        _abort(newcomer, "offer does not certify the requested subject")
    if not verify_subject(me, draft.subject_signature, me.public_key, scheme):
        _abort(newcomer, "draft subject signature invalid")
    if draft.header.sequence_number != len(chain) or draft.issuer != chain.tail.subject:
        _abort(newcomer, "draft does not extend the fetched chain")
    issuer = draft.issuer
    bwd_msg = backward_message(draft.header, issuer, me, scheme)
    fwd_msg = forward_message(issuer_cert.header, issuer, me, scheme)
    if draft.backward_cross.first is None or not ecdsa_verify(
            bwd_msg, draft.backward_cross.first, issuer.public_key, scheme):
        _abort(newcomer, "issuer half of backward cross signature invalid")
    if issuer_cert.forward_cross is None or not ecdsa_verify(
            fwd_msg, issuer_cert.forward_cross.first, issuer.public_key, scheme):
        _abort(newcomer, "issuer half of forward cross signature invalid")
    fault = find_chain_fault(chain, trusted_root, newcomer.direction)
    if fault is not None:
        _abort(newcomer, f"fetched chain invalid ({fault})")

    key = newcomer.key_pair
    completed = replace(issuer_cert, forward_cross=CrossSignaturePair(
        issuer_cert.forward_cross.first, ecdsa_sign(fwd_msg, key, scheme, rng)))
    new_tail = replace(draft, backward_cross=CrossSignaturePair(
        draft.backward_cross.first, ecdsa_sign(bwd_msg, key, scheme, rng)))
    try:
        extended = append_certificate(chain, completed, new_tail)
    except AppendError as exc:
        _abort(newcomer, f"offer does not extend the chain: {exc}")
    fault = find_chain_fault(extended, trusted_root, newcomer.direction)
    if fault is not None:
        _abort(newcomer, f"extended chain invalid ({fault})")
    newcomer.local_chain = extended
    newcomer.trusted_root = trusted_root
    newcomer.state = PartyState.CERTIFIED
    newcomer.pending_offer = None
    return ProtocolMessage(MessageKind.CHAIN_BROADCAST, newcomer.bix_id,
                           CompletedPair(completed, new_tail))


def _adopt_if_extension(party: Party, received: Optional[CertificateChain], bus: SimBus,
                        peer: bytes) -> None:
    if received is None or party.trusted_root is None:
        bus.log(f"sync {party.name} from={bus.name_of(peer)} result=unavailable")
        return
    if not verify_chain(received, party.trusted_root, party.direction):
        bus.log(f"sync {party.name} from={bus.name_of(peer)} result=invalid")
        return
    if party.local_chain is None:
        party.local_chain = received
        bus.log(f"sync {party.name} from={bus.name_of(peer)} result=adopted length={len(received)}")
        return
    try:
        fork = detect_fork(party.local_chain, received)
    except IncomparableChainsError:
        bus.log(f"sync {party.name} from={bus.name_of(peer)} result=incomparable")
        return
    if fork is not None:
        party.forks.append(fork)
        bus.log(f"fork {party.name} from={bus.name_of(peer)} index={fork}")
        return
    if len(received) > len(party.local_chain):
        party.local_chain = received
        bus.log(f"sync {party.name} from={bus.name_of(peer)} result=extended length={len(received)}")
    else:
        bus.log(f"sync {party.name} from={bus.name_of(peer)} result=current length={len(party.local_chain)}")


def _on_request(party: Party, msg: ProtocolMessage, bus: SimBus) -> None:
    if not party.is_tail_owner:
        return
    if party.issuing_for is not None:
        party.deferred.append(msg)
        bus.log(f"defer {party.name} request={bus.name_of(msg.payload.subject.bix_id)}")
        return
    offer = process_request(party, msg, bus.rng)
    if offer is None:
        bus.log(f"ignore {party.name} request={bus.name_of(msg.payload.subject.bix_id)}")
        return
    bus.send(msg.payload.subject.bix_id, offer)


def _on_offer(party: Party, msg: ProtocolMessage, bus: SimBus) -> None:
    if party.state is not PartyState.REQUESTED:
        return
    party.pending_offer = msg
    party.state = PartyState.AWAITING_CHAIN
    bus.send(msg.sender, ProtocolMessage(MessageKind.CHAIN_QUERY, party.bix_id, ChainQuery("join")))


def _on_query(party: Party, msg: ProtocolMessage, bus: SimBus) -> None:
    bus.send(msg.sender, ProtocolMessage(MessageKind.CHAIN_RESPONSE, party.bix_id,
                                         ChainResponse(party.local_chain)))


def _on_response(party: Party, msg: ProtocolMessage, bus: SimBus) -> None:
    chain = msg.payload.chain
    offer = party.pending_offer
    if party.state is PartyState.AWAITING_CHAIN and offer is not None and offer.sender == msg.sender:
        try:
            announce = countersign(party, offer, party.trusted_root, bus.rng, chain)
        except ProtocolAbort as exc:
            bus.log(f"abort {party.name} reason={str(exc).replace(' ', '_')}")
            return
        bus.log(f"certified {party.name} index={len(party.local_chain) - 1}")
        bus.send(msg.sender, replace(announce, kind=MessageKind.COUNTER_SIGNED))
        bus.broadcast(announce, exclude=(msg.sender,))
        return
    _adopt_if_extension(party, chain, bus, msg.sender)


def _on_completed(party: Party, msg: ProtocolMessage, bus: SimBus) -> None:
    pair: CompletedPair = msg.payload
    if party.local_chain is None or party.state is not PartyState.CERTIFIED:
        return
    try:
        extended = append_certificate(party.local_chain, pair.completed_tail, pair.new_tail)
    except AppendError as exc:
        bus.log(f"mismatch {party.name} reason={str(exc).replace(' ', '_')}")
        bus.send(msg.sender, ProtocolMessage(MessageKind.CHAIN_QUERY, party.bix_id, ChainQuery()))
        extended = None
    if extended is not None:
        if verify_chain(extended, party.trusted_root, party.direction):
            party.local_chain = extended
            bus.log(f"append {party.name} length={len(extended)}")
        else:
            bus.log(f"reject {party.name} broadcast_from={bus.name_of(msg.sender)}")
    if party.issuing_for is not None and party.issuing_for == pair.new_tail.subject.bix_id:
        party.issuing_for = None
        new_tail_owner = pair.new_tail.subject.bix_id
        for req in party.deferred:
            bus.send(new_tail_owner, replace(req, sender=party.bix_id))
        party.deferred.clear()


_HANDLERS = {
    MessageKind.CERT_REQUEST: _on_request,
    MessageKind.ISSUER_OFFER: _on_offer,
    MessageKind.CHAIN_QUERY: _on_query,
    MessageKind.CHAIN_RESPONSE: _on_response,
    MessageKind.COUNTER_SIGNED: _on_completed,
    MessageKind.CHAIN_BROADCAST: _on_completed,
}


def _check_peer(x: Party, y: Party, bus: SimBus) -> ExchangeOutcome:
    cert = y.certificate
    if cert is None or x.local_chain is None:
        return ExchangeOutcome.REJECT
    if not verify_certificate(cert, x.local_chain):
        return ExchangeOutcome.REJECT
    idx = cert.header.sequence_number
    local = x.local_chain
    if idx < len(local) and same_certificate(local[idx], cert):
        return ExchangeOutcome.ACCEPT
    forks_before = len(x.forks)
    bus.send(y.bix_id, ProtocolMessage(MessageKind.CHAIN_QUERY, x.bix_id, ChainQuery()))
    bus.run()
    if len(x.forks) > forks_before:
        return ExchangeOutcome.REJECT
    local = x.local_chain
    if idx < len(local):
        return ExchangeOutcome.ACCEPT if same_certificate(local[idx], cert) else ExchangeOutcome.REJECT
    return ExchangeOutcome.INCONCLUSIVE


def exchange_verify(a: Party, b: Party, bus: SimBus) -> Tuple[ExchangeOutcome, ExchangeOutcome]:
    """Mutual certificate check; element 0 is a's verdict on b, element 1 b's on a."""
    if a.state is not PartyState.CERTIFIED or b.state is not PartyState.CERTIFIED:
        raise ProtocolError("both parties must be certified to exchange certificates")
    a_view = _check_peer(a, b, bus)
    b_view = _check_peer(b, a, bus)
    bus.log(f"exchange {a.name}->{b.name}={a_view.value} {b.name}->{a.name}={b_view.value}")
    return a_view, b_view


def new_party(name: str, bix_id: bytes, scheme: SchemeHandle, rng,
              trusted_root: Optional[Certificate] = None) -> Party:
    return Party(name, bytes(bix_id), keygen(scheme, rng), trusted_root=trusted_root)


def make_root_party(name: str, bix_id: bytes, scheme: SchemeHandle, rng, **header) -> Party:
    party = new_party(name, bix_id, scheme, rng)
    root = make_root(party.subject, party.key_pair, scheme, rng, **header)
    party.trusted_root = root
    party.local_chain = CertificateChain((root,), scheme)
    party.state = PartyState.CERTIFIED
    return party


def numbered_bix_id(number: int, prefix: bytes = b"BIX") -> bytes:
    return prefix + number.to_bytes(20 - len(prefix), "big")


def join_offline(issuer: Party, newcomer: Party, rng) -> CertificateChain:
    """Run one issuance round directly, without a bus.  Returns the new chain."""
    newcomer.state = PartyState.REQUESTED
    request = make_request(newcomer, rng)
    offer = process_request(issuer, request, rng)
    if offer is None:
        raise ProtocolError(f"{issuer.name} declined to issue for {newcomer.name}")
    newcomer.trusted_root = issuer.trusted_root
    announce = countersign(newcomer, offer, issuer.trusted_root, rng, issuer.local_chain)
    pair: CompletedPair = announce.payload
    issuer.local_chain = append_certificate(issuer.local_chain, pair.completed_tail, pair.new_tail)
    issuer.issuing_for = None
    return newcomer.local_chain


def build_honest_chain(length: int, scheme: SchemeHandle, rng,
                       names: Optional[List[str]] = None) -> Tuple[CertificateChain, List[Party]]:
    """Chain of ``length`` certificates grown by honest issuance rounds."""
    if length < 1:
        raise ValueError("a chain has at least its root certificate")
    names = names or [f"S{i}" for i in range(length)]
    parties = [make_root_party(names[0], numbered_bix_id(0), scheme, rng)]
    for i in range(1, length):
        newcomer = new_party(names[i], numbered_bix_id(i), scheme, rng)
        join_offline(parties[-1], newcomer, rng)
        parties.append(newcomer)
    chain = parties[-1].local_chain
    for p in parties:
        p.local_chain = chain
    return chain, parties
