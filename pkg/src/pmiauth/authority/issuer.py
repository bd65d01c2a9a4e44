"""
Issuing primitives for test worlds: CAs, end entities, attribute
authorities, attribute certificates and revocation lists.

Keys are derived from entity names and serials come from per-issuer
counters, so the same sequence of calls always yields identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime

from ..certs import (
    Attribute,
    AttributeCertificate,
    Holder,
    Name,
    PublicKeyCertificate,
    PublicKeyInfo,
    RevocationList,
    RevokedEntry,
    build_attribute_certificate,
    build_certificate,
    build_revocation_list,
)
from ..certs import extensions as ext
from ..crypto import KeyPair
from ..der import ObjectIdentifier, oid
from ..errors import SpecError

ORGANIZATION = "PMI Test"
ROLE = oid("2.5.4.72")
PRIVATE_CRITICAL_EXT = oid("1.3.6.1.4.1.57264.99.7")

ATTRIBUTE_ALIASES = {"role": ROLE}


def entity_name(label: str) -> Name:
    return Name.parse(f"CN={label},O={ORGANIZATION}")


def attribute_type(key: str) -> ObjectIdentifier:
    return ATTRIBUTE_ALIASES.get(key) or oid(key)


@dataclass
class Entity:
    """A named key holder, optionally with its own certificate."""

    label: str
    key: KeyPair
    cert: PublicKeyCertificate | None = None

    @property
    def name(self) -> Name:
        return self.cert.subject if self.cert is not None else entity_name(self.label)

    @property
    def public_key(self) -> PublicKeyInfo:
        return PublicKeyInfo.of(self.key)

    @property
    def key_id(self) -> bytes:
        return ext.key_identifier(self.key.public)


@dataclass
class Authority:
    """Issues credentials and tracks serial counters and revocations per issuer."""

    serials: dict = field(default_factory=dict)
    revoked: dict = field(default_factory=dict)  # issuer label -> {serial: RevokedEntry}

    def next_serial(self, issuer_label: str) -> int:
        n = self.serials.get(issuer_label, 1)
        self.serials[issuer_label] = n + 1
        return n

    @staticmethod
    def entity(label: str) -> Entity:
        return Entity(label, KeyPair.derive(label))

    def issue_ca(self, label: str, not_before: datetime, not_after: datetime, issuer: Entity | None = None,
                 path_len: int | None = None, policies=None, serial: int | None = None) -> Entity:
        subject = self.entity(label)
        signer = issuer or subject
        exts = [
            ext.basic_constraints(True, path_len),
            ext.key_usage("keyCertSign", "cRLSign"),
            ext.subject_key_identifier(subject.key.public),
        ]
        if issuer is not None:
            exts.append(ext.authority_key_identifier(issuer.key_id))
        if policies:
            exts.append(ext.certificate_policies(policies))
        subject.cert = build_certificate(
            serial=serial if serial is not None else self.next_serial(signer.label),
            issuer=signer.name, subject=entity_name(label),
            not_before=not_before, not_after=not_after,
            public_key=subject.public_key, signer=signer.key, extensions=exts,
        )
        return subject

    def issue_ee(self, label: str, issuer: Entity, not_before: datetime, not_after: datetime,
                 policies=None, extra_extensions=(), serial: int | None = None) -> Entity:
        subject = self.entity(label)
        exts = [
            ext.key_usage("digitalSignature"),
            ext.subject_key_identifier(subject.key.public),
            ext.authority_key_identifier(issuer.key_id),
        ]
        if policies:
            exts.append(ext.certificate_policies(policies))
        exts.extend(extra_extensions)
        subject.cert = build_certificate(
            serial=serial if serial is not None else self.next_serial(issuer.label),
            issuer=issuer.name, subject=entity_name(label),
            not_before=not_before, not_after=not_after,
            public_key=subject.public_key, signer=issuer.key, extensions=exts,
        )
        return subject

    def issue_aa(self, label: str, issuer: Entity, not_before: datetime, not_after: datetime) -> Entity:
        return self.issue_ee(label, issuer, not_before, not_after)

    def issue_ac(self, holder: PublicKeyCertificate, aa: Entity, not_before: datetime, not_after: datetime,
                 attributes=None, targets=None, critical_extensions=(), serial: int | None = None
                 ) -> AttributeCertificate:
        attrs = []
        for key, values in (attributes or {}).items():
            if isinstance(values, str):
                values = [values]
            attrs.append(Attribute(attribute_type(key), tuple(values)))
        exts = [ext.authority_key_identifier(aa.key_id)]
        if targets is not None:
            exts.append(ext.target_information(targets))
        for o in critical_extensions:
            exts.append(ext.Extension(o if isinstance(o, ObjectIdentifier) else oid(o), True, b"\x05\x00"))
        return build_attribute_certificate(
            serial=serial if serial is not None else self.next_serial(aa.label),
            holder=Holder.of(holder), issuer=aa.name,
            not_before=not_before, not_after=not_after,
            attributes=attrs, signer=aa.key, extensions=exts,
        )

    def revoke(self, issuer_label: str, serial: int, at: datetime, reason: int = 0) -> None:
        self.revoked.setdefault(issuer_label, {})[serial] = RevokedEntry(serial, at, reason)

    def unrevoke(self, issuer_label: str, serial: int) -> None:
        entries = self.revoked.get(issuer_label, {})
        if serial not in entries:
            raise SpecError(f"serial {serial} of {issuer_label} is not revoked")
        del entries[serial]

    def issue_crl(self, issuer: Entity, this_update: datetime, next_update: datetime) -> RevocationList:
        entries = sorted(self.revoked.get(issuer.label, {}).values(), key=lambda e: e.serial)
        return build_revocation_list(issuer=issuer.name, this_update=this_update, next_update=next_update,
                                     entries=entries, signer=issuer.key)
