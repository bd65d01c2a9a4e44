"""
An on-disk issuing workspace for the command-line tools.

Layout (the ``certs``/``acs``/``crls`` part is a loadable store)::

    <ws>/keys/<label>.json
    <ws>/certs/<label>.der
    <ws>/acs/<holder>-<serial>.der
    <ws>/crls/<issuer>.der
    <ws>/state.json        serial counters and pending revocations per issuer
"""

from __future__ import annotations

import json
from datetime import datetime
from pathlib import Path

from ..certs import RevokedEntry, load_attribute_certificate, load_certificate, save_item
from ..der import format_time, parse_time
from ..errors import SpecError
from ..wire import load_key_file, save_key_file
from .issuer import Authority, Entity, entity_name

STATE_FILE = "state.json"


class Workspace:
    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.authority = self._load_state()

    # state ------------------------------------------------------------------

    def _load_state(self) -> Authority:
        path = self.root / STATE_FILE
        if not path.exists():
            return Authority()
        data = json.loads(path.read_text())
        revoked = {
            issuer: {e["serial"]: RevokedEntry(e["serial"], parse_time(e["at"]), e.get("reason", 0)) for e in entries}
            for issuer, entries in data.get("revoked", {}).items()
        }
        return Authority(dict(data.get("serials", {})), revoked)

    def save(self) -> None:
        data = {
            "serials": dict(sorted(self.authority.serials.items())),
            "revoked": {
                issuer: [{"serial": e.serial, "at": format_time(e.revoked_at), "reason": e.reason}
                         for e in sorted(entries.values(), key=lambda e: e.serial)]
                for issuer, entries in sorted(self.authority.revoked.items())
            },
        }
        (self.root / STATE_FILE).write_text(json.dumps(data, indent=2) + "\n")

    # entities ---------------------------------------------------------------

    def key_path(self, label: str) -> Path:
        return self.root / "keys" / f"{label}.json"

    def cert_path(self, label: str) -> Path:
        return self.root / "certs" / f"{label}.der"

    def entity(self, label: str) -> Entity:
        """An existing entity; its key file and certificate must be present."""
        if not self.key_path(label).is_file():
            raise SpecError(f"no key material for {label!r} in {self.root / 'keys'}")
        if not self.cert_path(label).is_file():
            raise SpecError(f"no certificate for {label!r} in {self.root / 'certs'}")
        return Entity(label, load_key_file(self.key_path(label)).key, load_certificate(self.cert_path(label)))

    def _store(self, entity: Entity) -> Path:
        save_key_file(self.key_path(entity.label), entity_name(entity.label), entity.key)
        path = save_item(self.root, entity.label, entity.cert)
        self.save()
        return path

    def _fresh(self, label: str):
        if self.cert_path(label).exists():
            raise SpecError(f"{label!r} already has a certificate in this workspace")

    def issue_ca(self, label: str, not_before: datetime, not_after: datetime, issuer: str | None = None,
                 path_len: int | None = None) -> Path:
        self._fresh(label)
        parent = self.entity(issuer) if issuer else None
        return self._store(self.authority.issue_ca(label, not_before, not_after, parent, path_len))

    def issue_ee(self, label: str, issuer: str, not_before: datetime, not_after: datetime) -> Path:
        self._fresh(label)
        return self._store(self.authority.issue_ee(label, self.entity(issuer), not_before, not_after))

    def issue_aa(self, label: str, issuer: str, not_before: datetime, not_after: datetime) -> Path:
        self._fresh(label)
        return self._store(self.authority.issue_aa(label, self.entity(issuer), not_before, not_after))

    def issue_ac(self, holder: str, aa: str, not_before: datetime, not_after: datetime,
                 attributes: dict, targets=None, critical_extensions=()) -> Path:
        holder_cert = self.entity(holder).cert
        ac = self.authority.issue_ac(holder_cert, self.entity(aa), not_before, not_after,
                                     attributes, targets, critical_extensions)
        path = save_item(self.root, f"{holder}-{ac.serial}", ac)
        self.save()
        return path

    def _issued(self, kind: str, issuer: str, serial: int) -> bool:
        name = entity_name(issuer)
        if kind == "pkc":
            return any(c.issuer == name and c.serial == serial for c in map(load_certificate, self._files("certs")))
        return any(a.issuer == name and a.serial == serial
                   for a in map(load_attribute_certificate, self._files("acs")))

    def _files(self, sub: str):
        folder = self.root / sub
        return sorted(folder.glob("*.der")) if folder.is_dir() else []

    def revoke(self, kind: str, issuer: str, serial: int, at: datetime, reason: int = 0) -> None:
        if kind not in ("pkc", "ac"):
            raise SpecError(f"kind must be pkc or ac, not {kind!r}")
        if not self._issued(kind, issuer, serial):
            raise SpecError(f"{issuer!r} has issued no {kind} with serial {serial}")
        self.authority.revoke(issuer, serial, at, reason)
        self.save()

    def unrevoke(self, issuer: str, serial: int) -> None:
        self.authority.unrevoke(issuer, serial)
        self.save()

    def issue_crl(self, issuer: str, this_update: datetime, next_update: datetime) -> Path:
        crl = self.authority.issue_crl(self.entity(issuer), this_update, next_update)
        return save_item(self.root, issuer, crl)
