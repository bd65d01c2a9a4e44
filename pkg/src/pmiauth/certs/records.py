"""
Public-key certificates, attribute certificates and revocation lists.

Each record keeps ``tbs_bytes``, the exact DER the signature covers.
Parsers are strict: anything that would not re-encode byte-identically
is rejected with :class:`ProfileViolation` or a :class:`DerError`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from functools import cached_property

from .. import crypto, der
from ..crypto import AlgorithmId, KeyPair, Signature
from ..der import DerValue, ObjectIdentifier
from ..errors import ProfileViolation, UnrecognizedAlgorithm
from . import extensions as ext
from ._profile import Fields, algorithm_value, signed_outer, split_signed, to_value
from .extensions import Extension
from .names import Name

PKC_VERSION = 2  # v3
AC_VERSION = 1  # v2
CRL_VERSION = 1  # v2


@dataclass(frozen=True)
class PublicKeyInfo:
    algorithm: AlgorithmId
    key: bytes

    def to_value(self) -> DerValue:
        return der.sequence(algorithm_value(self.algorithm), der.bit_string(self.key))

    @classmethod
    def from_value(cls, v: DerValue) -> "PublicKeyInfo":
        f = Fields(v, "SubjectPublicKeyInfo")
        alg = f.algorithm("algorithm")
        key = f.bits("subjectPublicKey")
        f.done()
        return cls(alg, key)

    @classmethod
    def of(cls, key: KeyPair) -> "PublicKeyInfo":
        return cls(key.algorithm, key.public)


class _Signed:
    """Behaviour shared by the three signed record types."""

    tbs_bytes: bytes
    signature_algorithm: AlgorithmId
    signature: Signature
    extensions: tuple

    @cached_property
    def der(self) -> bytes:
        return signed_outer(self.tbs_bytes, self.signature_algorithm, self.signature)

    @cached_property
    def fingerprint(self) -> bytes:
        return crypto.digest(self.der)

    def signed_by(self, key: PublicKeyInfo) -> bool:
        """Signature check; an unknown algorithm counts as failure here."""
        if key.algorithm != self.signature_algorithm:
            return False
        try:
            return crypto.verify(key.key, key.algorithm, self.tbs_bytes, self.signature)
        except UnrecognizedAlgorithm:
            return False

    def extension(self, ext_oid: ObjectIdentifier) -> Extension | None:
        return ext.find(self.extensions, ext_oid)

    @property
    def critical_oids(self) -> tuple:
        return tuple(e.oid for e in self.extensions if e.critical)


def _check_window(not_before: datetime, not_after: datetime, what: str):
    if not_before > not_after:
        raise ProfileViolation(f"{what}: notBefore is after notAfter")


def _check_serial(serial: int, what: str):
    if serial <= 0:
        raise ProfileViolation(f"{what}: serial must be positive")


# --- public-key certificates -----------------------------------------------

@dataclass(frozen=True)
class PublicKeyCertificate(_Signed):
    serial: int
    issuer: Name
    subject: Name
    not_before: datetime
    not_after: datetime
    public_key: PublicKeyInfo
    signature_algorithm: AlgorithmId
    signature: Signature
    extensions: tuple = ()
    tbs_bytes: bytes = field(default=b"", repr=False)

    @cached_property
    def basic_constraints(self) -> ext.BasicConstraints:
        e = self.extension(ext.BASIC_CONSTRAINTS)
        return ext.decode_basic_constraints(e.value) if e else ext.BasicConstraints(False)

    @cached_property
    def key_usage(self) -> frozenset | None:
        e = self.extension(ext.KEY_USAGE)
        return ext.decode_key_usage(e.value) if e else None

    @cached_property
    def subject_key_id(self) -> bytes | None:
        e = self.extension(ext.SUBJECT_KEY_IDENTIFIER)
        return ext.decode_subject_key_identifier(e.value) if e else None

    @cached_property
    def authority_key_id(self) -> bytes | None:
        e = self.extension(ext.AUTHORITY_KEY_IDENTIFIER)
        return ext.decode_authority_key_identifier(e.value) if e else None

    @cached_property
    def policies(self) -> tuple | None:
        """Policy OIDs, or ``None`` when the extension is absent."""
        e = self.extension(ext.CERTIFICATE_POLICIES)
        return ext.decode_certificate_policies(e.value) if e else None

    @property
    def unknown_critical(self) -> tuple:
        return tuple(o for o in self.critical_oids if o not in ext.PROFILE_EXTENSIONS)

    @property
    def is_self_issued(self) -> bool:
        return self.subject == self.issuer

    def valid_at(self, t: datetime) -> bool:
        return self.not_before <= t <= self.not_after


def _pkc_tbs(serial, issuer, subject, not_before, not_after, public_key, alg, extensions) -> DerValue:
    items = [
        der.explicit(0, der.integer(PKC_VERSION)),
        der.integer(serial),
        algorithm_value(alg),
        issuer.to_value(),
        der.sequence(der.encode_time(not_before), der.encode_time(not_after)),
        subject.to_value(),
        public_key.to_value(),
    ]
    if extensions:
        items.append(der.explicit(3, ext.extensions_value(extensions)))
    return der.sequence(*items)


def build_certificate(
    *,
    serial: int,
    issuer: Name,
    subject: Name,
    not_before: datetime,
    not_after: datetime,
    public_key: PublicKeyInfo,
    signer: KeyPair,
    extensions=(),
) -> PublicKeyCertificate:
    _check_serial(serial, "certificate")
    _check_window(not_before, not_after, "certificate")
    extensions = tuple(extensions)
    tbs = der.encode(_pkc_tbs(serial, issuer, subject, not_before, not_after, public_key,
                              signer.algorithm, extensions))
    sig = crypto.sign(signer, tbs)
    return PublicKeyCertificate(serial, issuer, subject, not_before, not_after, public_key,
                                signer.algorithm, sig, extensions, tbs)


def parse_certificate(data) -> PublicKeyCertificate:
    tbs_v, alg, sig = split_signed(to_value(data), "Certificate")
    f = Fields(tbs_v, "TBSCertificate")
    version = Fields(f.take(der.context_tag(0), "version"), "version", der.context_tag(0))
    if version.integer("value") != PKC_VERSION:
        raise ProfileViolation("only v3 certificates are in profile")
    version.done()
    serial = f.positive("serialNumber")
    if f.algorithm("signature") != alg:
        raise ProfileViolation("inner and outer signature algorithms differ")
    issuer = Name.from_value(f.take(der.SEQUENCE, "issuer"))
    validity = Fields(f.take(der.SEQUENCE, "validity"), "Validity")
    not_before, not_after = validity.time("notBefore"), validity.time("notAfter")
    validity.done()
    subject = Name.from_value(f.take(der.SEQUENCE, "subject"))
    spki = PublicKeyInfo.from_value(f.take(der.SEQUENCE, "subjectPublicKeyInfo"))
    exts: tuple = ()
    wrapped = f.optional(der.context_tag(3))
    if wrapped is not None:
        inner = Fields(wrapped, "extensions", der.context_tag(3))
        exts = ext.extensions_from_value(inner.take(der.SEQUENCE, "list"))
        inner.done()
    f.done()
    _check_window(not_before, not_after, "certificate")
    return PublicKeyCertificate(serial, issuer, subject, not_before, not_after, spki,
                                alg, sig, exts, der.encode(tbs_v))


def encode_certificate(cert: PublicKeyCertificate) -> bytes:
    return cert.der


# --- attribute certificates ------------------------------------------------

@dataclass(frozen=True)
class Holder:
    """baseCertificateID form: the holder's PKC issuer and serial."""

    issuer: Name
    serial: int

    @classmethod
    def of(cls, cert: PublicKeyCertificate) -> "Holder":
        return cls(cert.issuer, cert.serial)

    def matches(self, cert: PublicKeyCertificate) -> bool:
        return self.issuer == cert.issuer and self.serial == cert.serial


@dataclass(frozen=True)
class Attribute:
    type: ObjectIdentifier
    values: tuple

    def __post_init__(self):
        # SET OF: keep values in DER order so the record round-trips
        vals = tuple(sorted((str(v) for v in self.values), key=lambda s: der.encode(der.utf8(s))))
        object.__setattr__(self, "values", vals)

    def to_value(self) -> DerValue:
        return der.sequence(der.object_identifier(self.type), der.set_of(*(der.utf8(v) for v in self.values)))

    @classmethod
    def from_value(cls, v: DerValue) -> "Attribute":
        f = Fields(v, "Attribute")
        t = f.oid("type")
        vals = Fields(f.take(der.SET, "values"), "Attribute.values", der.SET)
        texts = tuple(vals.text("value") for _ in range(len(vals.items)))
        f.done()
        return cls(t, texts)


@dataclass(frozen=True)
class AttributeCertificate(_Signed):
    serial: int
    holder: Holder
    issuer: Name
    not_before: datetime
    not_after: datetime
    attributes: tuple
    signature_algorithm: AlgorithmId
    signature: Signature
    extensions: tuple = ()
    tbs_bytes: bytes = field(default=b"", repr=False)

    @cached_property
    def targets(self) -> tuple | None:
        e = self.extension(ext.TARGET_INFORMATION)
        return ext.decode_target_information(e.value) if e else None

    @cached_property
    def authority_key_id(self) -> bytes | None:
        e = self.extension(ext.AUTHORITY_KEY_IDENTIFIER)
        return ext.decode_authority_key_identifier(e.value) if e else None

    @property
    def no_rev_avail(self) -> bool:
        return self.extension(ext.NO_REV_AVAIL) is not None

    def values_of(self, attr_type: ObjectIdentifier) -> set:
        out = set()
        for a in self.attributes:
            if a.type == attr_type:
                out.update(a.values)
        return out


def _ac_tbs(serial, holder, issuer, not_before, not_after, attributes, alg, extensions) -> DerValue:
    items = [
        der.integer(AC_VERSION),
        der.sequence(der.context(0, [holder.issuer.to_value(), der.integer(holder.serial)])),
        der.explicit(0, issuer.to_value()),
        algorithm_value(alg),
        der.integer(serial),
        der.sequence(der.encode_time(not_before), der.encode_time(not_after)),
        der.sequence(*(a.to_value() for a in attributes)),
    ]
    if extensions:
        items.append(ext.extensions_value(extensions))
    return der.sequence(*items)


def build_attribute_certificate(
    *,
    serial: int,
    holder: Holder,
    issuer: Name,
    not_before: datetime,
    not_after: datetime,
    attributes=(),
    signer: KeyPair,
    extensions=(),
) -> AttributeCertificate:
    _check_serial(serial, "attribute certificate")
    _check_serial(holder.serial, "holder")
    _check_window(not_before, not_after, "attribute certificate")
    attributes, extensions = tuple(attributes), tuple(extensions)
    tbs = der.encode(_ac_tbs(serial, holder, issuer, not_before, not_after, attributes,
                             signer.algorithm, extensions))
    sig = crypto.sign(signer, tbs)
    return AttributeCertificate(serial, holder, issuer, not_before, not_after, attributes,
                                signer.algorithm, sig, extensions, tbs)


def parse_attribute_certificate(data) -> AttributeCertificate:
    tbs_v, alg, sig = split_signed(to_value(data), "AttributeCertificate")
    f = Fields(tbs_v, "AttributeCertificateInfo")
    if f.integer("version") != AC_VERSION:
        raise ProfileViolation("only v2 attribute certificates are in profile")
    holder_f = Fields(f.take(der.SEQUENCE, "holder"), "Holder")
    base = Fields(holder_f.take(der.context_tag(0), "baseCertificateID"), "IssuerSerial", der.context_tag(0))
    holder = Holder(Name.from_value(base.take(der.SEQUENCE, "issuer")), base.positive("serial"))
    base.done()
    holder_f.done()
    issuer_f = Fields(f.take(der.context_tag(0), "issuer"), "AttCertIssuer", der.context_tag(0))
    issuer = Name.from_value(issuer_f.take(der.SEQUENCE, "issuerName"))
    issuer_f.done()
    if f.algorithm("signature") != alg:
        raise ProfileViolation("inner and outer signature algorithms differ")
    serial = f.positive("serialNumber")
    validity = Fields(f.take(der.SEQUENCE, "attrCertValidityPeriod"), "AttCertValidityPeriod")
    not_before, not_after = validity.time("notBeforeTime"), validity.time("notAfterTime")
    validity.done()
    attrs = tuple(Attribute.from_value(a) for a in Fields(f.take(der.SEQUENCE, "attributes"), "attributes").items)
    exts: tuple = ()
    ev = f.optional(der.SEQUENCE)
    if ev is not None:
        exts = ext.extensions_from_value(ev)
    f.done()
    _check_window(not_before, not_after, "attribute certificate")
    return AttributeCertificate(serial, holder, issuer, not_before, not_after, attrs,
                                alg, sig, exts, der.encode(tbs_v))


# --- revocation lists ------------------------------------------------------

@dataclass(frozen=True)
class RevokedEntry:
    serial: int
    revoked_at: datetime
    reason: int = 0


@dataclass(frozen=True)
class RevocationList(_Signed):
    """A CRL or ACRL; which one depends only on the issuer's role."""

    issuer: Name
    this_update: datetime
    next_update: datetime
    entries: tuple
    signature_algorithm: AlgorithmId
    signature: Signature
    tbs_bytes: bytes = field(default=b"", repr=False)
    extensions: tuple = ()

    @cached_property
    def revoked_serials(self) -> dict:
        return {e.serial: e for e in self.entries}

    def lookup(self, serial: int) -> RevokedEntry | None:
        return self.revoked_serials.get(serial)

    def current_at(self, t: datetime) -> bool:
        return self.this_update <= t <= self.next_update


def _check_entries(entries, this_update, next_update):
    if this_update > next_update:
        raise ProfileViolation("revocation list: thisUpdate is after nextUpdate")
    seen = set()
    for e in entries:
        _check_serial(e.serial, "revoked entry")
        if e.serial in seen:
            raise ProfileViolation(f"revocation list: duplicate serial {e.serial}")
        if not 0 <= e.reason <= 10:
            raise ProfileViolation(f"revocation list: reason {e.reason} out of range")
        seen.add(e.serial)


def _crl_tbs(issuer, this_update, next_update, entries, alg) -> DerValue:
    return der.sequence(
        der.integer(CRL_VERSION),
        algorithm_value(alg),
        issuer.to_value(),
        der.encode_time(this_update),
        der.encode_time(next_update),
        der.sequence(*(
            der.sequence(der.integer(e.serial), der.encode_time(e.revoked_at), der.integer(e.reason))
            for e in entries
        )),
    )


def build_revocation_list(
    *,
    issuer: Name,
    this_update: datetime,
    next_update: datetime,
    entries=(),
    signer: KeyPair,
) -> RevocationList:
    entries = tuple(entries)
    _check_entries(entries, this_update, next_update)
    tbs = der.encode(_crl_tbs(issuer, this_update, next_update, entries, signer.algorithm))
    sig = crypto.sign(signer, tbs)
    return RevocationList(issuer, this_update, next_update, entries, signer.algorithm, sig, tbs)


def parse_revocation_list(data) -> RevocationList:
    tbs_v, alg, sig = split_signed(to_value(data), "CertificateList")
    f = Fields(tbs_v, "TBSCertList")
    if f.integer("version") != CRL_VERSION:
        raise ProfileViolation("only v2 revocation lists are in profile")
    if f.algorithm("signature") != alg:
        raise ProfileViolation("inner and outer signature algorithms differ")
    issuer = Name.from_value(f.take(der.SEQUENCE, "issuer"))
    this_update, next_update = f.time("thisUpdate"), f.time("nextUpdate")
    entries = []
    for item in Fields(f.take(der.SEQUENCE, "revokedCertificates"), "revokedCertificates").items:
        e = Fields(item, "RevokedCertificate")
        entries.append(RevokedEntry(e.integer("userCertificate"), e.time("revocationDate"), e.integer("reason")))
        e.done()
    f.done()
    entries = tuple(entries)
    _check_entries(entries, this_update, next_update)
    return RevocationList(issuer, this_update, next_update, entries, alg, sig, der.encode(tbs_v))


def parse_any(data) -> PublicKeyCertificate | AttributeCertificate | RevocationList:
    """Sniff the record type from the shape of the to-be-signed part."""
    v = to_value(data)
    tbs, _, _ = split_signed(v, "signed record")
    first = tbs.children[0] if tbs.children else None
    if first is not None and first.tag == der.context_tag(0):
        return parse_certificate(v)
    if len(tbs.children) > 1 and tbs.children[1].tag == der.SEQUENCE and tbs.children[1].children \
            and tbs.children[1].children[0].tag == der.context_tag(0):
        return parse_attribute_certificate(v)
    return parse_revocation_list(v)
