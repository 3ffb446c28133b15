"""On-disk layout: one chain file, the trusted root, and per-party key files.

::

    <root>/chain.bixc          current chain (BIXC format)
    <root>/trusted-root.bixc   the root certificate as first issued
    <root>/keys/<name>.json    one secret key per party, UNENCRYPTED
    <root>/scripts/            simulation scripts

Key files are for test and demo stores only.  They hold the secret scalar
in the clear.
"""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple

from .certificate import Certificate
from .crypto.ecdsa import KeyPair, keypair_from_secret
from .crypto.scheme import SchemeHandle
from .errors import BixError, EncodingError
from .ledger import CertificateChain, decode_chain, encode_chain

KEY_WARNING = "TEST ONLY: unencrypted secret key"


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_chain(chain: CertificateChain, path) -> None:
    _atomic_write(Path(path), encode_chain(chain))


def load_chain(path) -> CertificateChain:
    """Parse a chain file; raises a ChainFormatError subclass or EncodingError."""
    return decode_chain(Path(path).read_bytes())


@dataclass(frozen=True)
class StoreLayout:
    root: Path

    @property
    def chain_file(self) -> Path:
        return self.root / "chain.bixc"

    @property
    def trusted_root_file(self) -> Path:
        return self.root / "trusted-root.bixc"

    @property
    def keys_dir(self) -> Path:
        return self.root / "keys"

    @property
    def scripts_dir(self) -> Path:
        return self.root / "scripts"

    def key_file(self, name: str) -> Path:
        if not name or "/" in name or name.startswith("."):
            raise BixError(f"invalid party name {name!r}")
        return self.keys_dir / f"{name}.json"

    def exists(self) -> bool:
        return self.chain_file.exists()

    def create(self) -> None:
        for d in (self.root, self.keys_dir, self.scripts_dir):
            d.mkdir(parents=True, exist_ok=True)

    def load_chain(self) -> CertificateChain:
        return load_chain(self.chain_file)

    def save_chain(self, chain: CertificateChain) -> None:
        save_chain(chain, self.chain_file)

    def load_trusted_root(self) -> Certificate:
        return load_chain(self.trusted_root_file).root

    def save_trusted_root(self, root: Certificate, scheme: SchemeHandle) -> None:
        save_chain(CertificateChain((root,), scheme), self.trusted_root_file)

    def save_key(self, name: str, bix_id: bytes, key: KeyPair) -> None:
        record = {
            "warning": KEY_WARNING,
            "name": name,
            "bix_id": bix_id.hex(),
            "hash_id": key.scheme.hash_id,
            "sig_id": key.scheme.sig_id,
            "secret": format(key.secret, "x"),
        }
        _atomic_write(self.key_file(name), (json.dumps(record, indent=2) + "\n").encode())

    def load_key(self, name: str) -> Tuple[bytes, KeyPair]:
        try:
            record = json.loads(self.key_file(name).read_text())
            scheme = SchemeHandle(record["hash_id"], record["sig_id"])
            return bytes.fromhex(record["bix_id"]), keypair_from_secret(int(record["secret"], 16), scheme)
        except (KeyError, ValueError) as exc:
            raise EncodingError(f"corrupt key file for {name!r}: {exc}") from exc

    def key_names(self) -> Dict[bytes, str]:
        names = {}
        if self.keys_dir.is_dir():
            for path in sorted(self.keys_dir.glob("*.json")):
                bix, _ = self.load_key(path.stem)
                names[bix] = path.stem
        return names

    def name_for(self, bix_id: bytes) -> Optional[str]:
        return self.key_names().get(bix_id)
