"""
Credential storage: an indexed certificate/CRL store, trust anchors, and
the on-disk directory layout (``certs/``, ``acs/``, ``crls/``).
"""

from __future__ import annotations

import base64
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import DerError, PmiError, ProfileViolation
from .names import Name
from .records import (
    AttributeCertificate,
    PublicKeyCertificate,
    PublicKeyInfo,
    RevocationList,
    parse_attribute_certificate,
    parse_certificate,
    parse_revocation_list,
)

log = logging.getLogger(__name__)

ARMOR_KINDS = {
    "CERTIFICATE": parse_certificate,
    "ATTRIBUTE CERTIFICATE": parse_attribute_certificate,
    "CRL": parse_revocation_list,
}
_ARMOR = re.compile(r"-----BEGIN PMI ([A-Z ]+)-----\s*(.*?)\s*-----END PMI \1-----", re.S)


def armor(kind: str, data: bytes) -> str:
    if kind not in ARMOR_KINDS:
        raise ValueError(f"unknown armor kind {kind!r}")
    b64 = base64.b64encode(data).decode("ascii")
    lines = [b64[i:i + 64] for i in range(0, len(b64), 64)]
    return f"-----BEGIN PMI {kind}-----\n" + "\n".join(lines) + f"\n-----END PMI {kind}-----\n"


def dearmor(text: str) -> tuple[str, bytes]:
    m = _ARMOR.search(text)
    if not m:
        raise ValueError("no PMI armor block found")
    return m.group(1), base64.b64decode("".join(m.group(2).split()), validate=True)


def armor_kind(item) -> str:
    if isinstance(item, PublicKeyCertificate):
        return "CERTIFICATE"
    if isinstance(item, AttributeCertificate):
        return "ATTRIBUTE CERTIFICATE"
    return "CRL"


def read_der(path) -> bytes:
    """File contents as DER, accepting either raw DER or the armored text form."""
    raw = Path(path).read_bytes()
    if raw.lstrip().startswith(b"-----BEGIN PMI"):
        return dearmor(raw.decode("ascii"))[1]
    return raw


def load_certificate(path) -> PublicKeyCertificate:
    return parse_certificate(read_der(path))


def load_attribute_certificate(path) -> AttributeCertificate:
    return parse_attribute_certificate(read_der(path))


def load_revocation_list(path) -> RevocationList:
    return parse_revocation_list(read_der(path))


class CertStore:
    """Indexed certificates, attribute certificates and revocation lists.

    Lookups return matches in insertion order unless stated otherwise.
    Byte-identical items are stored once; distinct items never collapse.
    """

    def __init__(self, items=()):
        self.certificates: list[PublicKeyCertificate] = []
        self.attribute_certificates: list[AttributeCertificate] = []
        self.revocation_lists: list[RevocationList] = []
        self._by_subject: dict[Name, list[PublicKeyCertificate]] = {}
        self._by_ski: dict[bytes, list[PublicKeyCertificate]] = {}
        self._crls_by_issuer: dict[Name, list[RevocationList]] = {}
        self._seen: set[bytes] = set()
        for item in items:
            self.add(item)

    def add(self, item) -> bool:
        """Insert ``item``; returns False when an identical item is already present."""
        if item.fingerprint in self._seen:
            return False
        self._seen.add(item.fingerprint)
        if isinstance(item, PublicKeyCertificate):
            self.certificates.append(item)
            self._by_subject.setdefault(item.subject, []).append(item)
            if item.subject_key_id is not None:
                self._by_ski.setdefault(item.subject_key_id, []).append(item)
        elif isinstance(item, AttributeCertificate):
            self.attribute_certificates.append(item)
        elif isinstance(item, RevocationList):
            self.revocation_lists.append(item)
            self._crls_by_issuer.setdefault(item.issuer, []).append(item)
        else:
            raise TypeError(f"cannot store {type(item).__name__}")
        return True

    def copy(self) -> "CertStore":
        return CertStore(self)

    def merged(self, extra) -> "CertStore":
        """A new store holding this store's items followed by ``extra``."""
        out = self.copy()
        for item in extra:
            out.add(item)
        return out

    def __iter__(self):
        yield from self.certificates
        yield from self.attribute_certificates
        yield from self.revocation_lists

    def __len__(self):
        return len(self.certificates) + len(self.attribute_certificates) + len(self.revocation_lists)

    def find_by_subject(self, name: Name) -> list[PublicKeyCertificate]:
        return list(self._by_subject.get(name, ()))

    def find_by_key_id(self, key_id: bytes) -> list[PublicKeyCertificate]:
        return list(self._by_ski.get(key_id, ()))

    def find_issuer_candidates(self, cert: PublicKeyCertificate) -> list[PublicKeyCertificate]:
        """Certificates whose subject is ``cert.issuer``.

        Ordered by: key-identifier match first, then latest notAfter, then
        lowest serial; remaining ties keep insertion order.
        """
        aki = cert.authority_key_id
        candidates = self._by_subject.get(cert.issuer, ())

        def rank(c: PublicKeyCertificate):
            ski_match = aki is not None and c.subject_key_id == aki
            return (not ski_match, -c.not_after.timestamp(), c.serial)

        return sorted(candidates, key=rank)

    def find_crls(self, issuer: Name) -> list[RevocationList]:
        return list(self._crls_by_issuer.get(issuer, ()))


@dataclass(frozen=True)
class TrustAnchor:
    name: Name
    public_key: PublicKeyInfo
    certificate: PublicKeyCertificate | None = field(default=None, compare=False)

    @classmethod
    def from_certificate(cls, cert: PublicKeyCertificate) -> "TrustAnchor":
        if not cert.is_self_issued:
            raise ProfileViolation(f"trust anchor {cert.subject} is not self-signed")
        if not cert.signed_by(cert.public_key):
            raise ProfileViolation(f"trust anchor {cert.subject} self-signature does not verify")
        return cls(cert.subject, cert.public_key, cert)


class TrustAnchorSet:
    def __init__(self, anchors=()):
        self.anchors: tuple[TrustAnchor, ...] = ()
        seen = set()
        for a in anchors:
            if isinstance(a, PublicKeyCertificate):
                a = TrustAnchor.from_certificate(a)
            if a.name in seen:
                raise ValueError(f"duplicate trust anchor name {a.name}")
            seen.add(a.name)
            self.anchors += (a,)

    @classmethod
    def from_certificates(cls, certs) -> "TrustAnchorSet":
        return cls(TrustAnchor.from_certificate(c) for c in certs)

    def matching(self, name: Name) -> list[TrustAnchor]:
        return [a for a in self.anchors if a.name == name]

    def certificates(self) -> list[PublicKeyCertificate]:
        return [a.certificate for a in self.anchors if a.certificate is not None]

    def __iter__(self):
        return iter(self.anchors)

    def __len__(self):
        return len(self.anchors)

    def __bool__(self):
        return bool(self.anchors)


@dataclass
class LoadReport:
    store: CertStore
    skipped: list[tuple[str, str]]


_LAYOUT = (
    ("certs", parse_certificate),
    ("acs", parse_attribute_certificate),
    ("crls", parse_revocation_list),
)


def load_store(directory) -> LoadReport:
    """Load ``<dir>/{certs,acs,crls}/*`` into a store.

    Files that fail to parse are listed in ``skipped`` with the reason;
    only a missing or unreadable top-level directory raises.
    """
    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"store directory {root} does not exist")
    store = CertStore()
    skipped: list[tuple[str, str]] = []
    for sub, parser in _LAYOUT:
        folder = root / sub
        if not folder.is_dir():
            continue
        for path in sorted(folder.iterdir()):
            if not path.is_file() or path.suffix not in (".der", ".pem"):
                continue
            try:
                store.add(parser(read_der(path)))
            except (DerError, PmiError, ValueError, OSError) as exc:
                log.warning("skipping %s: %s", path, exc)
                skipped.append((str(path), f"{type(exc).__name__}: {exc}"))
    return LoadReport(store, skipped)


def save_item(directory, stem: str, item) -> Path:
    """Write ``item`` as raw DER into the right sub-folder of ``directory``."""
    sub = {"CERTIFICATE": "certs", "ATTRIBUTE CERTIFICATE": "acs", "CRL": "crls"}[armor_kind(item)]
    folder = Path(directory) / sub
    folder.mkdir(parents=True, exist_ok=True)
    path = folder / f"{stem}.der"
    path.write_bytes(item.der)
    return path
