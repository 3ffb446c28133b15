"""Scripted multi-party runs over the simulated bus.

Script lines (``#`` starts a comment)::

    root <name>
    join <name>
    attack midchain <i> <j>
    exchange <name> <name>
    query <name>

The whole script is validated before anything runs.  The transcript is a
list of lines with a fixed field order, identical for identical
``(script, seed, scheme)``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple, Union

from .adversary import midchain_alter_attack
from .crypto.scheme import PRODUCTION, SchemeHandle
from .errors import ScriptError
from .ledger import CertificateChain, all_prefix_compatible, chain_fingerprint, verify_chain
from .protocol import (ChainQuery, MessageKind, Party, PartyState, ProtocolMessage, SimBus,
                       exchange_verify, make_root_party, new_party, numbered_bix_id,
                       request_certification)


@dataclass(frozen=True)
class Command:
    line_no: int
    verb: str
    args: Tuple[str, ...]


def parse_script(script: Union[str, Sequence[str]]) -> List[Command]:
    lines = script.splitlines() if isinstance(script, str) else list(script)
    commands: List[Command] = []
    names: List[str] = []
    chain_length = 0
    for line_no, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        verb, *args = text.split()

        def fail(reason: str):
            raise ScriptError(f"line {line_no}: {reason}: {text!r}")

        def known(name: str):
            if name not in names:
                fail(f"unknown party {name!r}")

        if verb == "root":
            if len(args) != 1:
                fail("usage: root <name>")
            if commands:
                fail("root must be the first command and appear once")
            names.append(args[0])
            chain_length = 1
        elif not commands:
            fail("script must start with 'root <name>'")
        elif verb == "join":
            if len(args) != 1:
                fail("usage: join <name>")
            if args[0] in names:
                fail(f"party {args[0]!r} already exists")
            names.append(args[0])
            chain_length += 1
        elif verb == "attack":
            if len(args) != 3 or args[0] != "midchain":
                fail("usage: attack midchain <i> <j>")
            try:
                i, j = int(args[1]), int(args[2])
            except ValueError:
                fail("attack indices must be integers")
            if not (j > i + 1 > i > 0):
                fail("attack indices need j > i+1 > i > 0")
            if j >= chain_length:
                fail(f"index {j} not yet in the chain (length {chain_length})")
        elif verb == "exchange":
            if len(args) != 2 or args[0] == args[1]:
                fail("usage: exchange <name> <other-name>")
            known(args[0])
            known(args[1])
        elif verb == "query":
            if len(args) != 1:
                fail("usage: query <name>")
            known(args[0])
        else:
            fail(f"unknown command {verb!r}")
        commands.append(Command(line_no, verb, tuple(args)))
    if not commands:
        raise ScriptError("empty script")
    return commands


@dataclass
class SimulationResult:
    lines: List[str]
    parties: Dict[str, Party] = field(default_factory=dict)

    @property
    def text(self) -> str:
        return "\n".join(self.lines) + "\n"

    def chains(self) -> Dict[str, CertificateChain]:
        return {name: p.local_chain for name, p in self.parties.items() if p.local_chain is not None}

    def forks(self) -> Dict[str, List[int]]:
        return {name: list(p.forks) for name, p in self.parties.items() if p.forks}


class Simulation:
    """Holds the bus and parties; executes commands one at a time."""

    def __init__(self, seed: int, scheme: SchemeHandle = PRODUCTION):
        self.rng = random.Random(seed)
        self.scheme = scheme
        self.bus = SimBus(self.rng, scheme)
        self.by_name: Dict[str, Party] = {}
        self._next_id = 0
        self.trusted_root = None

    def _allocate(self) -> bytes:
        bix = numbered_bix_id(self._next_id)
        self._next_id += 1
        return bix

    def execute(self, cmd: Command) -> None:
        getattr(self, f"_do_{cmd.verb}")(*cmd.args)
        self.bus.run()

    def _do_root(self, name: str) -> None:
        party = make_root_party(name, self._allocate(), self.scheme, self.rng)
        self.trusted_root = party.trusted_root
        self.bus.register(party)
        self.by_name[name] = party
        self.bus.log(f"root {name} bix={party.bix_id.hex()}")

    def _do_join(self, name: str) -> None:
        party = new_party(name, self._allocate(), self.scheme, self.rng, trusted_root=self.trusted_root)
        self.bus.register(party)
        self.by_name[name] = party
        request_certification(party, self.bus)

    def _do_attack(self, kind: str, i: str, j: str) -> None:
        i, j = int(i), int(j)
        holders = [p for p in self.by_name.values()
                   if p.local_chain is not None and p.index == j]
        if not holders:
            raise ScriptError(f"no certified party holds index {j}")
        s_j = holders[0]
        chain = s_j.local_chain
        s_i = self.bus.parties[chain[i].subject.bix_id]
        forged = midchain_alter_attack(chain, i, j, s_i.key_pair, s_j.key_pair, self.rng,
                                       new_ids=[self._allocate() for _ in range(j - i - 1)])
        s_i.local_chain = forged
        s_j.local_chain = forged
        self.bus.log(f"attack midchain i={i} j={j} colluders={s_i.name},{s_j.name} "
                     f"forged={chain_fingerprint(forged)}")

    def _do_exchange(self, a: str, b: str) -> None:
        exchange_verify(self.by_name[a], self.by_name[b], self.bus)

    def _do_query(self, name: str) -> None:
        party = self.by_name[name]
        chain = party.local_chain
        if chain is None:
            self.bus.log(f"query {name} result=uncertified")
            return
        server = chain.tail.subject.bix_id
        if server == party.bix_id:
            self.bus.log(f"query {name} result=self-tail length={len(chain)}")
            return
        self.bus.send(server, ProtocolMessage(MessageKind.CHAIN_QUERY, party.bix_id, ChainQuery()))

    def finish(self) -> SimulationResult:
        lines = list(self.bus.transcript)
        for name, party in self.by_name.items():
            chain = party.local_chain
            if chain is None:
                lines.append(f"final {name} state={party.state.value} length=0")
                continue
            ok = verify_chain(chain, self.trusted_root)
            forks = ",".join(str(f) for f in party.forks) or "-"
            lines.append(f"final {name} state={party.state.value} length={len(chain)} "
                         f"verify={'OK' if ok else 'FAIL'} forks={forks} chain={chain_fingerprint(chain)}")
        chains = [p.local_chain for p in self.by_name.values() if p.local_chain is not None]
        lines.append(f"summary parties={len(self.by_name)} prefix_compatible="
                     f"{'yes' if chains and all_prefix_compatible(chains) else 'no'}")
        return SimulationResult(lines, dict(self.by_name))


def run_simulation(script: Union[str, Sequence[str]], seed: int,
                   scheme: SchemeHandle = PRODUCTION) -> SimulationResult:
    commands = parse_script(script)
    sim = Simulation(seed, scheme)
    for cmd in commands:
        sim.bus.log(f"cmd {cmd.verb} {' '.join(cmd.args)}".rstrip())
        sim.execute(cmd)
    return sim.finish()
