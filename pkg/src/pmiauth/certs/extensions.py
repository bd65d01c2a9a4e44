"""Extension records and the encoders/decoders for the profile set."""

from __future__ import annotations

from dataclasses import dataclass

from .. import der
from ..crypto import digest
from ..der import DerValue, ObjectIdentifier, oid
from ..errors import DerError, ProfileViolation
from ._profile import Fields

BASIC_CONSTRAINTS = oid("2.5.29.19")
KEY_USAGE = oid("2.5.29.15")
SUBJECT_KEY_IDENTIFIER = oid("2.5.29.14")
AUTHORITY_KEY_IDENTIFIER = oid("2.5.29.35")
CERTIFICATE_POLICIES = oid("2.5.29.32")
TARGET_INFORMATION = oid("2.5.29.55")
NO_REV_AVAIL = oid("2.5.29.56")

ANY_POLICY = oid("2.5.29.32.0")

PROFILE_EXTENSIONS = frozenset({
    BASIC_CONSTRAINTS, KEY_USAGE, SUBJECT_KEY_IDENTIFIER, AUTHORITY_KEY_IDENTIFIER,
    CERTIFICATE_POLICIES, TARGET_INFORMATION, NO_REV_AVAIL,
})

KEY_USAGE_BITS = (
    "digitalSignature", "nonRepudiation", "keyEncipherment", "dataEncipherment",
    "keyAgreement", "keyCertSign", "cRLSign", "encipherOnly", "decipherOnly",
)


@dataclass(frozen=True)
class Extension:
    oid: ObjectIdentifier
    critical: bool
    value: bytes

    def to_value(self) -> DerValue:
        items = [der.object_identifier(self.oid)]
        if self.critical:
            items.append(der.boolean(True))
        items.append(der.octet_string(self.value))
        return der.sequence(*items)

    @classmethod
    def from_value(cls, v: DerValue) -> "Extension":
        f = Fields(v, "Extension")
        ext_oid = f.oid("extnID")
        crit = f.optional(der.BOOLEAN)
        if crit is not None and not der.to_bool(crit):
            # DEFAULT FALSE must be omitted under DER
            raise ProfileViolation("critical=FALSE must not be encoded")
        value = f.take(der.OCTET_STRING, "extnValue").content
        f.done()
        ext = cls(ext_oid, crit is not None, value)
        if ext_oid in PROFILE_EXTENSIONS:
            _DECODERS[ext_oid](value)
        return ext


@dataclass(frozen=True)
class BasicConstraints:
    ca: bool
    path_len: int | None = None


def extensions_value(exts) -> DerValue:
    return der.sequence(*(e.to_value() for e in exts))


def extensions_from_value(v: DerValue) -> tuple[Extension, ...]:
    exts = tuple(Extension.from_value(item) for item in Fields(v, "Extensions").items)
    if not exts:
        raise ProfileViolation("extensions present but empty")
    seen = set()
    for e in exts:
        if e.oid in seen:
            raise ProfileViolation(f"duplicate extension {e.oid}")
        seen.add(e.oid)
    return exts


def find(exts, ext_oid: ObjectIdentifier) -> Extension | None:
    for e in exts:
        if e.oid == ext_oid:
            return e
    return None


def _inner(value: bytes, what: str) -> DerValue:
    try:
        return der.decode_all(value)
    except DerError as exc:
        raise ProfileViolation(f"{what}: {exc}") from exc


# --- basicConstraints ------------------------------------------------------

def basic_constraints(ca: bool, path_len: int | None = None, critical: bool = True) -> Extension:
    items = []
    if ca:
        items.append(der.boolean(True))
    if path_len is not None:
        items.append(der.integer(path_len))
    return Extension(BASIC_CONSTRAINTS, critical, der.encode(der.sequence(*items)))


def decode_basic_constraints(value: bytes) -> BasicConstraints:
    f = Fields(_inner(value, "basicConstraints"), "basicConstraints")
    ca = f.optional(der.BOOLEAN)
    if ca is not None and not der.to_bool(ca):
        raise ProfileViolation("basicConstraints cA=FALSE must not be encoded")
    pl = f.optional(der.INTEGER)
    f.done()
    path_len = der.to_int(pl) if pl is not None else None
    if path_len is not None and path_len < 0:
        raise ProfileViolation("negative pathLenConstraint")
    return BasicConstraints(ca is not None, path_len)


# --- keyUsage --------------------------------------------------------------

def _named_bits(names) -> DerValue:
    positions = sorted(KEY_USAGE_BITS.index(n) for n in set(names))
    if not positions:
        return der.bit_string(b"")
    nbytes = positions[-1] // 8 + 1
    buf = bytearray(nbytes)
    for p in positions:
        buf[p // 8] |= 0x80 >> (p % 8)
    return der.bit_string(bytes(buf), nbytes * 8 - positions[-1] - 1)


def key_usage(*names: str, critical: bool = True) -> Extension:
    return Extension(KEY_USAGE, critical, der.encode(_named_bits(names)))


def decode_key_usage(value: bytes) -> frozenset:
    v = _inner(value, "keyUsage")
    if v.tag != der.BIT_STRING:
        raise ProfileViolation("keyUsage must be a BIT STRING")
    data, unused = der.to_bits(v)
    names = set()
    for i in range(len(data) * 8 - unused):
        if data[i // 8] & (0x80 >> (i % 8)):
            if i >= len(KEY_USAGE_BITS):
                raise ProfileViolation(f"keyUsage bit {i} undefined")
            names.add(KEY_USAGE_BITS[i])
    if der.encode(_named_bits(names)) != value:
        raise ProfileViolation("keyUsage is not in minimal named-bit form")
    return frozenset(names)


# --- key identifiers -------------------------------------------------------

def key_identifier(public_key: bytes) -> bytes:
    return digest(public_key)[:20]


def subject_key_identifier(public_key: bytes) -> Extension:
    return Extension(SUBJECT_KEY_IDENTIFIER, False, der.encode(der.octet_string(key_identifier(public_key))))


def decode_subject_key_identifier(value: bytes) -> bytes:
    v = _inner(value, "subjectKeyIdentifier")
    if v.tag != der.OCTET_STRING:
        raise ProfileViolation("subjectKeyIdentifier must be an OCTET STRING")
    return v.content


def authority_key_identifier(keyid: bytes) -> Extension:
    return Extension(AUTHORITY_KEY_IDENTIFIER, False, der.encode(der.sequence(der.implicit(0, keyid))))


def decode_authority_key_identifier(value: bytes) -> bytes | None:
    f = Fields(_inner(value, "authorityKeyIdentifier"), "authorityKeyIdentifier")
    kid = f.optional(der.context_tag(0, constructed=False))
    f.done()
    return kid.content if kid is not None else None


# --- certificatePolicies ---------------------------------------------------

def certificate_policies(policies, critical: bool = False) -> Extension:
    items = [der.sequence(der.object_identifier(p)) for p in policies]
    return Extension(CERTIFICATE_POLICIES, critical, der.encode(der.sequence(*items)))


def decode_certificate_policies(value: bytes) -> tuple[ObjectIdentifier, ...]:
    out = []
    for item in Fields(_inner(value, "certificatePolicies"), "certificatePolicies").items:
        f = Fields(item, "PolicyInformation")
        out.append(f.oid("policyIdentifier"))
        f.done()
    if not out:
        raise ProfileViolation("certificatePolicies must not be empty")
    if len(set(out)) != len(out):
        raise ProfileViolation("duplicate policy identifier")
    return tuple(out)


# --- targetInformation -----------------------------------------------------

def target_information(services, critical: bool = True) -> Extension:
    items = [der.utf8(s) for s in services]
    return Extension(TARGET_INFORMATION, critical, der.encode(der.sequence(*items)))


def decode_target_information(value: bytes) -> tuple[str, ...]:
    f = Fields(_inner(value, "targetInformation"), "targetInformation")
    return tuple(der.to_text(f.take(der.UTF8_STRING, "target")) for _ in range(len(f.items)))


# --- noRevAvail ------------------------------------------------------------

def no_rev_avail() -> Extension:
    return Extension(NO_REV_AVAIL, False, der.encode(der.null()))


def decode_no_rev_avail(value: bytes) -> bool:
    if _inner(value, "noRevAvail").tag != der.NULL:
        raise ProfileViolation("noRevAvail must be NULL")
    return True


_DECODERS = {
    BASIC_CONSTRAINTS: decode_basic_constraints,
    KEY_USAGE: decode_key_usage,
    SUBJECT_KEY_IDENTIFIER: decode_subject_key_identifier,
    AUTHORITY_KEY_IDENTIFIER: decode_authority_key_identifier,
    CERTIFICATE_POLICIES: decode_certificate_policies,
    TARGET_INFORMATION: decode_target_information,
    NO_REV_AVAIL: decode_no_rev_avail,
}
