"""
Privilege policy: which resources exist, what each one demands of an
attribute certificate, and which anchors, AA certificates and attribute
revocation lists the verifier trusts.

The policy file is JSON (``"schema": 1``). Paths inside it are resolved
relative to the file itself::

    {
      "schema": 1,
      "serviceName": "web-01",
      "resources": [
        {"resourceId": "/resource.htm", "methods": ["GET"],
         "requiredAttributes": [{"type": "role", "acceptedValues": ["staff", "admin"],
                                 "matchMode": "any"}],
         "timeWindow": {"from": "08:00", "to": "18:00"}}
      ],
      "recognizedCriticalExtensions": [],
      "pkcAnchors": ["store/certs/CA1.der"],
      "aaAnchors": ["store/certs/CA2.der"],
      "aaDirectory": ["store/certs/AA.der"],
      "acrlSource": ["store/crls/AA.der"],
      "revocationMode": "hard-fail",
      "cvsEndpoint": {"address": "127.0.0.1:7001",
                      "keyFile": "keys/cvs.pub.json", "timeout": 5}
    }
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from datetime import datetime, time
from pathlib import Path

from ..certs import (
    AttributeCertificate,
    CertStore,
    PublicKeyCertificate,
    RevocationList,
    TrustAnchorSet,
    load_certificate,
    load_revocation_list,
)
from ..der import ObjectIdentifier, oid
from ..errors import PolicyError
from ..pathengine import RevocationMode
from ..wire import CvsClientConfig, load_key_file

SCHEMA_VERSION = 1

# short names accepted wherever an attribute type is expected
ATTRIBUTE_NAMES = {
    "role": oid("2.5.4.72"),
    "clearance": oid("2.5.4.55"),
}


def attribute_oid(text: str) -> ObjectIdentifier:
    if text in ATTRIBUTE_NAMES:
        return ATTRIBUTE_NAMES[text]
    try:
        return oid(text)
    except ValueError as exc:
        raise PolicyError(f"unknown attribute type {text!r}") from exc


class MatchMode(str, enum.Enum):
    ANY = "any"
    ALL = "all"


@dataclass(frozen=True)
class RequiredAttribute:
    type: ObjectIdentifier
    accepted_values: tuple[str, ...]
    match_mode: MatchMode = MatchMode.ANY

    def satisfied_by(self, ac: AttributeCertificate) -> bool:
        held = ac.values_of(self.type)
        if self.match_mode == MatchMode.ALL:
            return all(v in held for v in self.accepted_values)
        return any(v in held for v in self.accepted_values)


def _parse_hhmm(text: str) -> time:
    try:
        hh, mm = text.split(":")
        return time(int(hh), int(mm))
    except ValueError as exc:
        raise PolicyError(f"bad time of day {text!r}, expected HH:MM") from exc


@dataclass(frozen=True)
class TimeWindow:
    """A UTC time-of-day window, start inclusive and end exclusive."""

    start: time
    end: time

    def __post_init__(self):
        if not self.start < self.end:
            raise PolicyError(f"time window {self} must start before it ends")

    def contains(self, t: datetime) -> bool:
        hm = time(t.hour, t.minute)
        return self.start <= hm < self.end

    def __str__(self):
        return f"{self.start:%H:%M}-{self.end:%H:%M}"


@dataclass(frozen=True)
class ResourceRule:
    resource_id: str
    methods: tuple[str, ...] = ()
    required_attributes: tuple[RequiredAttribute, ...] = ()
    time_window: TimeWindow | None = None

    def allows_method(self, method: str) -> bool:
        return not self.methods or method in self.methods


@dataclass(frozen=True)
class PrivilegePolicy:
    service_name: str
    resources: tuple[ResourceRule, ...]
    pkc_anchors: TrustAnchorSet
    aa_anchors: TrustAnchorSet
    aa_directory: tuple[PublicKeyCertificate, ...] = ()
    acrl_source: tuple[RevocationList, ...] = ()
    recognized_critical_extensions: frozenset = frozenset()
    revocation_mode: RevocationMode = RevocationMode.HARD_FAIL
    cvs_endpoint: CvsClientConfig | None = None
    source: Path | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.service_name:
            raise PolicyError("serviceName must not be empty")
        ids = [r.resource_id for r in self.resources]
        if len(ids) != len(set(ids)):
            raise PolicyError("resource ids must be unique")

    def rule_for(self, resource_id: str) -> ResourceRule | None:
        for rule in self.resources:
            if rule.resource_id == resource_id:
                return rule
        return None

    def aa_store(self) -> CertStore:
        return CertStore(self.aa_directory)

    @classmethod
    def load(cls, path) -> "PrivilegePolicy":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise PolicyError(f"{path}: {exc}") from exc
        return cls.from_dict(data, path.parent, source=path)

    @classmethod
    def from_dict(cls, data: dict, base: Path = Path("."), source: Path | None = None) -> "PrivilegePolicy":
        if data.get("schema") != SCHEMA_VERSION:
            raise PolicyError(f"unsupported policy schema {data.get('schema')!r}")
        base = Path(base)
        try:
            return cls(
                service_name=data["serviceName"],
                resources=tuple(_rule(r) for r in data.get("resources", ())),
                pkc_anchors=TrustAnchorSet.from_certificates(load_certificate(base / p) for p in data["pkcAnchors"]),
                aa_anchors=TrustAnchorSet.from_certificates(load_certificate(base / p) for p in data["aaAnchors"]),
                aa_directory=tuple(load_certificate(base / p) for p in data.get("aaDirectory", ())),
                acrl_source=tuple(load_revocation_list(base / p) for p in data.get("acrlSource", ())),
                recognized_critical_extensions=frozenset(
                    oid(o) for o in data.get("recognizedCriticalExtensions", ())),
                revocation_mode=RevocationMode(data.get("revocationMode", "hard-fail")),
                cvs_endpoint=_endpoint(data["cvsEndpoint"], base) if data.get("cvsEndpoint") else None,
                source=source,
            )
        except KeyError as exc:
            raise PolicyError(f"policy is missing {exc.args[0]!r}") from exc


def _rule(data: dict) -> ResourceRule:
    attrs = []
    for a in data.get("requiredAttributes", ()):
        values = a["acceptedValues"]
        if not values:
            raise PolicyError(f"{data['resourceId']}: acceptedValues must not be empty")
        attrs.append(RequiredAttribute(attribute_oid(a["type"]), tuple(values),
                                       MatchMode(a.get("matchMode", "any"))))
    window = data.get("timeWindow")
    return ResourceRule(
        resource_id=data["resourceId"],
        methods=tuple(data.get("methods", ())),
        required_attributes=tuple(attrs),
        time_window=TimeWindow(_parse_hhmm(window["from"]), _parse_hhmm(window["to"])) if window else None,
    )


def _endpoint(data: dict, base: Path) -> CvsClientConfig:
    host, _, port = data["address"].rpartition(":")
    cvs = load_key_file(base / data["keyFile"])
    signer = signer_name = None
    if data.get("clientKeyFile"):
        own = load_key_file(base / data["clientKeyFile"])
        signer, signer_name = own.key, own.name
    return CvsClientConfig(host, int(port), cvs.name, cvs.public, signer, signer_name,
                           float(data.get("timeout", 5.0)))
