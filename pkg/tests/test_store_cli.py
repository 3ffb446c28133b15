import hashlib
import io
import json
import random
import subprocess
import sys

import pytest

import bixcert.errors as errors
from conftest import FIXTURES
from bixcert.cli import main
from bixcert.crypto import PRODUCTION
from bixcert.ledger import detect_fork, find_chain_fault, verify_chain
from bixcert.protocol import build_honest_chain
from bixcert.store import KEY_WARNING, StoreLayout, load_chain, save_chain

MANIFEST = json.loads((FIXTURES / "manifest.json").read_text())


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def _root_file(name):
    root = MANIFEST[name]["root"]
    return FIXTURES / (name if root == "self" else root)


@pytest.mark.parametrize("name", sorted(MANIFEST))
def test_fixture_checksums(name):
    assert hashlib.sha256((FIXTURES / name).read_bytes()).hexdigest() == MANIFEST[name]["sha256"]


def test_fixtures_regenerate_identically():
    sys.path.insert(0, str(FIXTURES))
    from make_fixtures import build_fixtures
    files, manifest = build_fixtures()
    assert manifest == MANIFEST
    for name, data in files.items():
        assert (FIXTURES / name).read_bytes() == data


@pytest.mark.parametrize("name", sorted(MANIFEST))
def test_fixture_load_and_verify(name):
    entry = MANIFEST[name]
    if entry["load"] != "ok":
        with pytest.raises(getattr(errors, entry["load"])):
            load_chain(FIXTURES / name)
        return
    chain = load_chain(FIXTURES / name)
    assert len(chain) == entry["length"]
    from bixcert.ledger import find_chain_fault
    fault = find_chain_fault(chain, load_chain(_root_file(name)).root)
    expected = entry["verify"]
    assert (fault is None) if expected is None else ((fault.index, fault.check) == tuple(expected))
    if "fork_vs" in entry:
        assert detect_fork(load_chain(FIXTURES / entry["fork_vs"]), chain) == entry["fork_index"]


@pytest.mark.parametrize("name", sorted(MANIFEST))
def test_cli_verify_exit_codes(name):
    entry = MANIFEST[name]
    if entry["load"] != "ok":
        code, out, err = run("verify", "--chain", str(FIXTURES / name), "--root", str(FIXTURES / name))
        assert code == 2 and err.startswith("error: ")
        return
    for direction in ("fwd", "bwd"):
        code, out, _ = run("verify", "--direction", direction, "--chain", str(FIXTURES / name),
                           "--root", str(_root_file(name)))
        if entry["verify"] is None:
            assert (code, out) == (0, f"chain OK length={entry['length']}\n")
        else:
            assert code == 1
            assert out == f"chain REJECTED certificate {entry['verify'][0]}: {entry['verify'][1]}\n"


def test_save_load_round_trip(tmp_path):
    chain, _ = build_honest_chain(3, PRODUCTION, random.Random(1))
    path = tmp_path / "sub" / "c.bixc"
    save_chain(chain, path)
    assert load_chain(path) == chain
    assert not list(path.parent.glob(".c.bixc.*"))


def test_store_workflow(tmp_path):
    store = str(tmp_path / "s")
    assert run("--store", store, "init-root", "root", "--seed", "1")[0] == 0
    assert run("--store", store, "verify") == (0, "chain OK length=1\n", "")
    for k, name in enumerate(["alice", "bob", "carol"], start=1):
        code, out, _ = run("--store", store, "join", name, "--seed", str(10 + k))
        assert code == 0 and out.startswith(f"joined {name} index={k}")
    assert run("--store", store, "verify", "--direction", "bwd") == (0, "chain OK length=4\n", "")
    code, out, _ = run("--store", store, "show", "2")
    assert code == 0 and out.splitlines()[0] == "sequence_number: 2"
    assert run("--store", store, "exchange", "alice", "carol")[:2] == (
        0, "exchange alice->carol=accept carol->alice=accept\n")
    layout = StoreLayout(tmp_path / "s")
    record = json.loads(layout.key_file("bob").read_text())
    assert record["warning"] == KEY_WARNING
    assert set(record) == {"warning", "name", "bix_id", "hash_id", "sig_id", "secret"}
    assert layout.load_chain() == load_chain(layout.chain_file)
    assert verify_chain(layout.load_chain(), layout.load_trusted_root())


def test_store_errors(tmp_path):
    store = str(tmp_path / "s")
    assert run("--store", store, "verify")[0] == 2
    run("--store", store, "init-root", "root", "--seed", "1")
    assert run("--store", store, "init-root", "again")[0] == 2
    assert run("--store", store, "join", "root")[0] == 2
    assert run("--store", store, "show", "5")[0] == 2
    assert run("--store", store, "exchange", "root", "ghost")[0] == 2
    chain_file = StoreLayout(tmp_path / "s").chain_file
    chain_file.write_bytes(chain_file.read_bytes()[:-3])
    code, _, err = run("--store", store, "verify")
    assert code == 2 and "truncated" in err


def test_corrupted_signature_byte_names_the_certificate(tmp_path):
    store = str(tmp_path / "s")
    run("--store", store, "init-root", "root", "--seed", "2")
    run("--store", store, "join", "a", "--seed", "3")
    run("--store", store, "join", "b", "--seed", "4")
    layout = StoreLayout(tmp_path / "s")
    raw = bytearray(layout.chain_file.read_bytes())
    raw[-3] ^= 0x40  # last signature byte; the final two bytes are the empty forward pair
    layout.chain_file.write_bytes(bytes(raw))
    assert run("--store", store, "verify") == (1, "chain REJECTED certificate 2: backward_cross.second\n", "")


def test_usage_errors():
    assert run()[0] == 2
    assert run("frobnicate")[0] == 2
    assert run("verify", "--direction", "sideways")[0] == 2
    assert run("attack", "midchain", "--i", "2", "--j", "3")[0] == 2
    assert run("attack", "scl", "--strategy", "nope")[0] == 2


def test_attack_commands():
    code, out, _ = run("attack", "midchain", "--i", "1", "--j", "4")
    assert code == 0
    assert out.splitlines()[-1] == "forged-chain-accepted fork_index=2"
    code, out, _ = run("attack", "scl", "--seed", "1")
    assert code == 0 and out.count("adversary=LOST") == 3
    code, out, _ = run("attack", "sts", "--i", "2", "--strategy", "key-substitution")
    assert code == 0 and "rejected_by=2:backward_cross.first" in out
    code, out, _ = run("attack", "sts", "--scheme", "toy", "--strategy", "brute-force")
    assert code == 1 and "adversary=WON" in out


def test_simulate_command(tmp_path):
    script = tmp_path / "s.txt"
    script.write_text("root R\njoin A\njoin B\n")
    code, out, _ = run("simulate", str(script), "--seed", "5", "--scheme", "toy")
    assert code == 0 and out.endswith("summary parties=3 prefix_compatible=yes\n")
    assert run("simulate", str(script), "--seed", "5", "--scheme", "toy")[1] == out
    script.write_text("join A\n")
    assert run("simulate", str(script))[0] == 2
    assert run("simulate", str(tmp_path / "missing.txt"))[0] == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "bixcert", "--store", str(tmp_path / "s"),
                           "init-root", "r", "--seed", "1"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("root r bix=")
