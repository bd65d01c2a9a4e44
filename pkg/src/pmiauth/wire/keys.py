"""JSON key files for service identities.

    {"name": "CN=cvs,O=PMI Test", "algorithm": "1.3.6.1.4.1.57264.99.1",
     "public": "<hex>", "private": "<hex>"}

The ``private`` member is omitted in files handed to peers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..certs import Name, PublicKeyInfo
from ..crypto import AlgorithmId, KeyPair
from ..der import oid


@dataclass(frozen=True)
class KeyFile:
    name: Name
    public: PublicKeyInfo
    key: KeyPair | None = None


def save_key_file(path, name: Name, key: KeyPair, include_private: bool = True) -> Path:
    data = {"name": str(name), "algorithm": str(key.algorithm.oid), "public": key.public.hex()}
    if include_private:
        data["private"] = key.private.hex()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2) + "\n")
    return path


def load_key_file(path) -> KeyFile:
    data = json.loads(Path(path).read_text())
    alg = AlgorithmId(oid(data["algorithm"]))
    public = bytes.fromhex(data["public"])
    key = None
    if "private" in data:
        key = KeyPair(public, bytes.fromhex(data["private"]), alg)
    return KeyFile(Name.parse(data["name"]), PublicKeyInfo(alg, public), key)


def load_trusted_keys(paths) -> dict:
    out = {}
    for p in paths:
        kf = load_key_file(p)
        out[kf.name] = kf.public
    return out
