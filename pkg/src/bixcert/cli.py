"""Command-line front end.

Exit codes: 0 success or acceptance; 1 verification rejected, protocol
aborted, or an attack outcome contrary to the expected one (SCL/STS won by
the adversary, mid-chain attack failing); 2 usage, I/O or format error.
"""
from __future__ import annotations

import argparse
import random
import secrets
import sys
from pathlib import Path
from typing import List, Optional

from . import adversary as adv
from .certificate import render_certificate
from .crypto.scheme import SCHEMES
from .errors import BixError, ProtocolAbort
from .ledger import Direction, find_chain_fault
from .protocol import (Party, PartyState, SimBus, build_honest_chain, exchange_verify,
                       join_offline, make_root_party, new_party)
from .simulation import run_simulation
from .store import StoreLayout, load_chain


class UsageError(BixError):
    pass


def _rng(seed: Optional[int]):
    return secrets.SystemRandom() if seed is None else random.Random(seed)


def _store(args) -> StoreLayout:
    return StoreLayout(Path(args.store))


def _next_bix_id(rng) -> bytes:
    return bytes(rng.randrange(256) for _ in range(20))


def cmd_init_root(args, out) -> int:
    store = _store(args)
    if store.exists():
        raise UsageError(f"store {store.root} already holds a chain")
    rng = _rng(args.seed)
    scheme = SCHEMES[args.scheme]
    party = make_root_party(args.name, _next_bix_id(rng), scheme, rng)
    store.create()
    store.save_key(args.name, party.bix_id, party.key_pair)
    store.save_trusted_root(party.trusted_root, scheme)
    store.save_chain(party.local_chain)
    print(f"root {args.name} bix={party.bix_id.hex()} scheme={scheme}", file=out)
    return 0


def _load_party(store: StoreLayout, name: str, chain) -> Party:
    bix, key = store.load_key(name)
    return Party(name, bix, key, trusted_root=store.load_trusted_root(), local_chain=chain,
                 state=PartyState.CERTIFIED if chain.index_of(bix) is not None else PartyState.UNCERTIFIED)


def cmd_join(args, out) -> int:
    store = _store(args)
    chain = store.load_chain()
    if store.key_file(args.name).exists():
        raise UsageError(f"party {args.name!r} already exists")
    tail_name = store.name_for(chain.tail.subject.bix_id)
    if tail_name is None:
        raise UsageError("no key file for the tail owner; cannot issue")
    rng = _rng(args.seed)
    issuer = _load_party(store, tail_name, chain)
    taken = {c.subject.bix_id for c in chain}
    bix = _next_bix_id(rng)
    while bix in taken:
        bix = _next_bix_id(rng)
    newcomer = new_party(args.name, bix, chain.scheme, rng)
    try:
        extended = join_offline(issuer, newcomer, rng)
    except ProtocolAbort as exc:
        print(f"join aborted: {exc}", file=out)
        return 1
    store.save_key(args.name, bix, newcomer.key_pair)
    store.save_chain(extended)
    print(f"joined {args.name} index={len(extended) - 1} issuer={tail_name}", file=out)
    return 0


def cmd_verify(args, out) -> int:
    store = _store(args)
    chain = load_chain(args.chain) if args.chain else store.load_chain()
    root = load_chain(args.root).root if args.root else store.load_trusted_root()
    direction = Direction(args.direction)
    fault = find_chain_fault(chain, root, direction)
    if fault is None:
        print(f"chain OK length={len(chain)}", file=out)
        return 0
    print(f"chain REJECTED {fault}", file=out)
    return 1


def cmd_show(args, out) -> int:
    chain = load_chain(args.chain) if args.chain else _store(args).load_chain()
    if not 0 <= args.index < len(chain):
        raise UsageError(f"index {args.index} outside chain of length {len(chain)}")
    print(render_certificate(chain[args.index], chain.scheme), file=out)
    return 0


def cmd_exchange(args, out) -> int:
    store = _store(args)
    chain = store.load_chain()
    a = _load_party(store, args.a, chain)
    b = _load_party(store, args.b, chain)
    bus = SimBus(random.Random(0), chain.scheme)
    bus.register(a)
    bus.register(b)
    a_view, b_view = exchange_verify(a, b, bus)
    print(f"exchange {a.name}->{b.name}={a_view.value} {b.name}->{a.name}={b_view.value}", file=out)
    return 0 if (a_view and b_view) else 1


def cmd_simulate(args, out) -> int:
    script = Path(args.script).read_text()
    result = run_simulation(script, args.seed, SCHEMES[args.scheme])
    out.write(result.text)
    return 0


def cmd_attack(args, out) -> int:
    rng = random.Random(args.seed)
    scheme = SCHEMES[args.scheme]
    chain, parties = build_honest_chain(args.length, scheme, rng)
    print(f"honest chain length={len(chain)} scheme={scheme}", file=out)
    if args.game == "midchain":
        i = 1 if args.i is None else args.i
        j = i + 2 if args.j is None else args.j
        if not (j > i + 1 > i > 0) or j >= len(chain):
            raise UsageError(f"need 0 < i, i+1 < j < {len(chain)}; got i={i} j={j}")
        result = adv.play_midchain_attack(chain, i, j, parties[i].key_pair, parties[j].key_pair, rng)
        print(result.summary(), file=out)
        accepted = "forged-chain-accepted" if result.adversary_won else "forged-chain-rejected"
        print(f"{accepted} fork_index={result.fork_index}", file=out)
        return 0 if result.adversary_won and result.fork_index == i + 1 else 1

    if args.game == "scl":
        table = dict(adv.SCL_STRATEGIES, **{"brute-force": adv.scl_brute_force})
    else:
        table = dict(adv.STS_STRATEGIES, **{"brute-force": adv.sts_brute_force})
    names = [args.strategy] if args.strategy else list(table)[:-1]
    if args.strategy and args.strategy not in table:
        raise UsageError(f"unknown strategy {args.strategy!r}; choose from {', '.join(table)}")
    any_won = False
    for name in names:
        if args.game == "scl":
            result = adv.play_scl_game(chain, table[name], rng)
        else:
            target = 1 if args.i is None else args.i
            result = adv.play_sts_game(chain, target, table[name], rng)
        any_won |= result.adversary_won
        print(result.summary().replace(f"strategy={result.strategy}", f"strategy={name}"), file=out)
    return 1 if any_won else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bixcert", description="BIX certificate chains")
    parser.add_argument("--store", default="bixstore", help="store directory (default: ./bixstore)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init-root", help="create a store with a fresh root certificate")
    p.add_argument("name")
    p.add_argument("--scheme", choices=sorted(SCHEMES), default="production")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_init_root)

    p = sub.add_parser("join", help="certify a new party; the tail owner issues")
    p.add_argument("name")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_join)

    p = sub.add_parser("verify", help="verify the chain against the trusted root")
    p.add_argument("--direction", choices=["fwd", "bwd"], default="fwd")
    p.add_argument("--chain", help="chain file to verify instead of the store's")
    p.add_argument("--root", help="chain file whose first certificate is the trusted root")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("show", help="print one certificate")
    p.add_argument("index", type=int)
    p.add_argument("--chain")
    p.set_defaults(func=cmd_show)

    p = sub.add_parser("exchange", help="mutual certificate check between two stored parties")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_exchange)

    p = sub.add_parser("simulate", help="run a scenario script and print the transcript")
    p.add_argument("script")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scheme", choices=sorted(SCHEMES), default="production")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("attack", help="play an attack game against a fresh honest chain")
    p.add_argument("game", choices=["scl", "sts", "midchain"])
    p.add_argument("--i", type=int)
    p.add_argument("--j", type=int)
    p.add_argument("--length", type=int, default=6)
    p.add_argument("--strategy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scheme", choices=sorted(SCHEMES), default="production")
    p.set_defaults(func=cmd_attack)
    return parser


def main(argv: Optional[List[str]] = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args, out)
    except (BixError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return 2


if __name__ == "__main__":
    sys.exit(main())
