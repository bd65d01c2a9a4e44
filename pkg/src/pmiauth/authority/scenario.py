"""
Scenario generation: a JSON description of CAs, attribute authorities,
clients and revocations becomes a directory holding a complete world::

    <out>/scenario.json         the spec that produced it
    <out>/store/{certs,acs,crls}/*.der
    <out>/clients/<name>/{pkc.der,ac.der,key.json}
    <out>/keys/{cvs,cvs.pub,pv,pv.pub}.json
    <out>/policy.json  cvs.json  pv.json
    <out>/manifest.json         expected decisions from the reference oracle

Times in a spec are absolute (``2004-10-06T12:00:00Z``) or offsets from
``clockAt`` such as ``-365d``, ``+7d`` or ``-1h``. The same spec always
produces byte-identical files.
"""

from __future__ import annotations

import copy
import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from functools import cached_property
from pathlib import Path

from ..certs import (
    AttributeCertificate,
    CertStore,
    PublicKeyCertificate,
    load_attribute_certificate,
    load_certificate,
    load_store,
    save_item,
)
from ..crypto import KeyPair
from ..der import format_time, parse_time
from ..errors import SpecError
from ..wire import CvsConfig, load_key_file, save_key_file
from ..verifier import AccessRequest, GatewayConfig, PrivilegePolicy
from .issuer import Authority, Entity, entity_name
from .oracle import oracle_manifest

_OFFSET = re.compile(r"^([+-])(\d+)([dhms])$")
_UNITS = {"d": "days", "h": "hours", "m": "minutes", "s": "seconds"}

DEFAULT_PKC_VALIDITY = ("-365d", "+365d")
DEFAULT_AC_VALIDITY = ("-30d", "+30d")
DEFAULT_CRL_VALIDITY = ("-1d", "+7d")
DEFAULT_REVOKED_AT = "-1h"
CVS_LABEL = "cvs"
PV_LABEL = "pv"
CVS_PORT = 7001
PV_PORT = 7002


def resolve_time(text: str, clock: datetime) -> datetime:
    m = _OFFSET.match(text)
    if m:
        sign, n, unit = m.groups()
        delta = timedelta(**{_UNITS[unit]: int(n)})
        return clock + delta if sign == "+" else clock - delta
    return parse_time(text)


@dataclass(frozen=True)
class CaSpec:
    name: str
    chain_depth: int = 1

    def labels(self) -> list[str]:
        """Root first, then ``<name>-L1`` and further intermediates."""
        return [self.name] + [f"{self.name}-L{i}" for i in range(1, self.chain_depth)]


@dataclass(frozen=True)
class AaSpec:
    name: str
    issuing_ca: str
    validity: tuple[str, str] = DEFAULT_PKC_VALIDITY


@dataclass(frozen=True)
class ClientSpec:
    name: str
    issuing_ca: str
    ac_from: str
    attributes: dict = field(default_factory=dict)
    pkc_validity: tuple[str, str] = DEFAULT_PKC_VALIDITY
    ac_validity: tuple[str, str] = DEFAULT_AC_VALIDITY
    targets: tuple[str, ...] | None = None
    critical_extensions: tuple[str, ...] = ()
    resource: str | None = None


@dataclass(frozen=True)
class RevocationSpec:
    kind: str  # "pkc" or "ac"
    target: str
    at: str = DEFAULT_REVOKED_AT


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    clock_at: datetime
    service_name: str
    cas: tuple[CaSpec, ...]
    aas: tuple[AaSpec, ...]
    clients: tuple[ClientSpec, ...]
    revocations: tuple[RevocationSpec, ...] = ()
    resources: tuple = ()
    crl_validity: tuple[str, str] = DEFAULT_CRL_VALIDITY
    source: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioSpec":
        try:
            spec = cls(
                name=data["name"],
                clock_at=parse_time(data["clockAt"]),
                service_name=data.get("serviceName", "web-01"),
                cas=tuple(CaSpec(c["name"], int(c.get("chainDepth", 1))) for c in data["cas"]),
                aas=tuple(AaSpec(a["name"], a["issuingCA"],
                                 (a.get("notBefore", DEFAULT_PKC_VALIDITY[0]),
                                  a.get("notAfter", DEFAULT_PKC_VALIDITY[1])))
                          for a in data.get("aas", ())),
                clients=tuple(_client(c) for c in data.get("clients", ())),
                revocations=tuple(RevocationSpec(r["kind"], r["target"], r.get("at", DEFAULT_REVOKED_AT))
                                  for r in data.get("revocations", ())),
                resources=tuple(copy.deepcopy(data.get("resources", ()))),
                crl_validity=tuple(data.get("crlValidity", DEFAULT_CRL_VALIDITY)),
                source=copy.deepcopy(data),
            )
        except KeyError as exc:
            raise SpecError(f"scenario spec is missing {exc.args[0]!r}") from exc
        spec.check()
        return spec

    @classmethod
    def load(cls, path) -> "ScenarioSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return copy.deepcopy(self.source)

    def ca_labels(self) -> dict[str, str]:
        """Every CA label, plus each hierarchy name, mapped to the label that issues."""
        out = {}
        for ca in self.cas:
            labels = ca.labels()
            for label in labels:
                out[label] = label
            out[ca.name] = labels[-1]
        return out

    def check(self) -> None:
        for ca in self.cas:
            if ca.chain_depth < 1:
                raise SpecError(f"CA {ca.name}: chainDepth must be at least 1")
        cas = self.ca_labels()
        labels = [label for ca in self.cas for label in ca.labels()] + [a.name for a in self.aas] + \
            [c.name for c in self.clients]
        dupes = {x for x in labels if labels.count(x) > 1} | ({CVS_LABEL, PV_LABEL} & set(labels))
        if dupes:
            raise SpecError(f"duplicate or reserved entity name(s): {', '.join(sorted(dupes))}")
        aas = {a.name for a in self.aas}
        clients = {c.name for c in self.clients}
        resources = {r["resourceId"] for r in self.resources}
        for a in self.aas:
            if a.issuing_ca not in cas:
                raise SpecError(f"AA {a.name}: unknown issuingCA {a.issuing_ca!r}")
        for c in self.clients:
            if c.issuing_ca not in cas:
                raise SpecError(f"client {c.name}: unknown issuingCA {c.issuing_ca!r}")
            if c.ac_from not in aas:
                raise SpecError(f"client {c.name}: unknown acFrom {c.ac_from!r}")
            if c.resource is not None and c.resource not in resources:
                raise SpecError(f"client {c.name}: unknown resource {c.resource!r}")
        for r in self.revocations:
            if r.kind == "ac" and r.target not in clients:
                raise SpecError(f"revocation: unknown client {r.target!r}")
            if r.kind == "pkc" and r.target not in set(labels):
                raise SpecError(f"revocation: unknown entity {r.target!r}")
            if r.kind not in ("pkc", "ac"):
                raise SpecError(f"revocation: kind must be pkc or ac, not {r.kind!r}")


def _client(c: dict) -> ClientSpec:
    validity = c.get("validity", {})
    attributes = {k: [v] if isinstance(v, str) else list(v) for k, v in c.get("attributes", {}).items()}
    return ClientSpec(
        name=c["name"], issuing_ca=c["issuingCA"], ac_from=c["acFrom"], attributes=attributes,
        pkc_validity=tuple(validity.get("pkc", DEFAULT_PKC_VALIDITY)),
        ac_validity=tuple(validity.get("ac", DEFAULT_AC_VALIDITY)),
        targets=tuple(c["targets"]) if c.get("targets") is not None else None,
        critical_extensions=tuple(c.get("criticalExtensions", ())),
        resource=c.get("resource"),
    )


# --- generation -------------------------------------------------------------

def _write_json(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2) + "\n")


def generate_scenario(spec: ScenarioSpec | dict, out_dir) -> "Scenario":
    if isinstance(spec, dict):
        spec = ScenarioSpec.from_dict(spec)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    clock = spec.clock_at

    def at(text):
        return resolve_time(text, clock)

    auth = Authority()
    entities: dict[str, Entity] = {}
    issuer_of: dict[str, str] = {}
    roots: dict[str, str] = {}  # issuing label -> root label
    nb, na = at(DEFAULT_PKC_VALIDITY[0]), at(DEFAULT_PKC_VALIDITY[1])

    for ca in spec.cas:
        parent = None
        for label in ca.labels():
            entities[label] = auth.issue_ca(label, nb, na, issuer=parent)
            issuer_of[label] = parent.label if parent else label
            roots[label] = ca.name
            parent = entities[label]
    issuing = spec.ca_labels()
    for a in spec.aas:
        ca = entities[issuing[a.issuing_ca]]
        entities[a.name] = auth.issue_aa(a.name, ca, at(a.validity[0]), at(a.validity[1]))
        issuer_of[a.name] = ca.label
    for c in spec.clients:
        ca = entities[issuing[c.issuing_ca]]
        entities[c.name] = auth.issue_ee(c.name, ca, at(c.pkc_validity[0]), at(c.pkc_validity[1]))
        issuer_of[c.name] = ca.label
    acs: dict[str, AttributeCertificate] = {}
    for c in spec.clients:
        acs[c.name] = auth.issue_ac(entities[c.name].cert, entities[c.ac_from],
                                    at(c.ac_validity[0]), at(c.ac_validity[1]),
                                    attributes=c.attributes, targets=c.targets,
                                    critical_extensions=c.critical_extensions)
    for r in spec.revocations:
        if r.kind == "pkc":
            auth.revoke(issuer_of[r.target], entities[r.target].cert.serial, at(r.at))
        else:
            client = next(c for c in spec.clients if c.name == r.target)
            auth.revoke(client.ac_from, acs[r.target].serial, at(r.at))

    tu, nu = at(spec.crl_validity[0]), at(spec.crl_validity[1])
    store = out / "store"
    for label, entity in entities.items():
        save_item(store, label, entity.cert)
    for c in spec.clients:
        save_item(store, c.name, acs[c.name])
    crl_issuers = [label for ca in spec.cas for label in ca.labels()] + [a.name for a in spec.aas]
    for label in crl_issuers:
        save_item(store, label, auth.issue_crl(entities[label], tu, nu))

    for c in spec.clients:
        folder = out / "clients" / c.name
        folder.mkdir(parents=True, exist_ok=True)
        (folder / "pkc.der").write_bytes(entities[c.name].cert.der)
        (folder / "ac.der").write_bytes(acs[c.name].der)
        save_key_file(folder / "key.json", entity_name(c.name), entities[c.name].key)

    keys = out / "keys"
    for label in (CVS_LABEL, PV_LABEL):
        key = KeyPair.derive(label)
        save_key_file(keys / f"{label}.json", entity_name(label), key)
        save_key_file(keys / f"{label}.pub.json", entity_name(label), key, include_private=False)

    def anchor_paths(issuers):
        seen = []
        for label in issuers:
            root = roots[issuing[label]]
            if root not in seen:
                seen.append(root)
        return [f"store/certs/{r}.der" for r in seen]

    _write_json(out / "policy.json", {
        "schema": 1,
        "serviceName": spec.service_name,
        "resources": list(spec.resources),
        "recognizedCriticalExtensions": [],
        "pkcAnchors": anchor_paths(c.issuing_ca for c in spec.clients),
        "aaAnchors": anchor_paths(a.issuing_ca for a in spec.aas),
        "aaDirectory": [f"store/certs/{a.name}.der" for a in spec.aas],
        "acrlSource": [f"store/crls/{a.name}.der" for a in spec.aas],
        "revocationMode": "hard-fail",
        "cvsEndpoint": {"address": f"127.0.0.1:{CVS_PORT}", "keyFile": f"keys/{CVS_LABEL}.pub.json",
                        "clientKeyFile": f"keys/{PV_LABEL}.json", "timeout": 5},
    })
    _write_json(out / "cvs.json", {
        "listen": f"127.0.0.1:{CVS_PORT}",
        "store_dir": "store",
        "key_file": f"keys/{CVS_LABEL}.json",
        "cache": True,
        "clock": format_time(clock),
        "anchors": [f"store/certs/{ca.name}.der" for ca in spec.cas],
        "trusted_clients": [f"keys/{PV_LABEL}.pub.json"],
        "require_signed_requests": True,
    })
    _write_json(out / "pv.json", {
        "listen": f"127.0.0.1:{PV_PORT}",
        "policy": "policy.json",
        "key_file": f"keys/{PV_LABEL}.json",
        "audit_log": "audit.log",
        "clock": format_time(clock),
    })
    _write_json(out / "scenario.json", spec.to_dict())
    _write_json(out / "manifest.json", oracle_manifest(out))
    return Scenario(out)


# --- reading a generated world ------------------------------------------------

@dataclass(frozen=True)
class ClientFixture:
    name: str
    pkc: PublicKeyCertificate
    ac: AttributeCertificate
    key: KeyPair


class Scenario:
    """Read-only view of a generated scenario directory."""

    def __init__(self, directory):
        self.directory = Path(directory)
        if not (self.directory / "manifest.json").is_file():
            raise SpecError(f"{self.directory} is not a generated scenario")

    @cached_property
    def spec(self) -> ScenarioSpec:
        return ScenarioSpec.load(self.directory / "scenario.json")

    @cached_property
    def manifest(self) -> list[dict]:
        return json.loads((self.directory / "manifest.json").read_text())

    @property
    def clock_at(self) -> datetime:
        return self.spec.clock_at

    @cached_property
    def store(self) -> CertStore:
        return load_store(self.directory / "store").store

    @cached_property
    def policy(self) -> PrivilegePolicy:
        return PrivilegePolicy.load(self.directory / "policy.json")

    def client(self, name: str) -> ClientFixture:
        folder = self.directory / "clients" / name
        if not folder.is_dir():
            raise SpecError(f"scenario has no client {name!r}")
        return ClientFixture(name, load_certificate(folder / "pkc.der"),
                             load_attribute_certificate(folder / "ac.der"),
                             load_key_file(folder / "key.json").key)

    def cert(self, label: str) -> PublicKeyCertificate:
        return load_certificate(self.directory / "store" / "certs" / f"{label}.der")

    def expected(self, client: str, resource: str | None = None) -> dict:
        resource = resource or self.default_resource(client)
        for entry in self.manifest:
            if entry["client"] == client and entry["resource"] == resource:
                return entry
        raise SpecError(f"manifest has no entry for {client} on {resource}")

    def default_resource(self, client: str) -> str:
        for c in self.spec.clients:
            if c.name == client:
                return c.resource or self.spec.resources[0]["resourceId"]
        raise SpecError(f"scenario has no client {client!r}")

    def rows(self) -> list[dict]:
        """The manifest entries for each client's own resource."""
        return [e for e in self.manifest if e["row"]]

    def request(self, client: str, resource: str | None = None, method: str | None = None) -> AccessRequest:
        resource = resource or self.default_resource(client)
        fx = self.client(client)
        rule = next(r for r in self.spec.resources if r["resourceId"] == resource)
        method = method or (rule.get("methods") or ["GET"])[0]
        return AccessRequest(resource, method, fx.pkc, fx.ac, self.clock_at)

    def cvs_config(self) -> CvsConfig:
        return CvsConfig.load(self.directory / "cvs.json")

    def gateway_config(self) -> GatewayConfig:
        return GatewayConfig.load(self.directory / "pv.json")

    def key(self, label: str):
        return load_key_file(self.directory / "keys" / f"{label}.json")
