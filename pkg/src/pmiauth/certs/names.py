from __future__ import annotations

from functools import cached_property

from .. import der
from ..der import DerValue, ObjectIdentifier, oid
from ..errors import ProfileViolation
from ._profile import Fields

ATTRIBUTE_TYPES = {
    "CN": oid("2.5.4.3"),
    "C": oid("2.5.4.6"),
    "L": oid("2.5.4.7"),
    "O": oid("2.5.4.10"),
    "OU": oid("2.5.4.11"),
}
_SHORT = {v: k for k, v in ATTRIBUTE_TYPES.items()}


class Name:
    """A distinguished name: one (type, UTF-8 value) pair per RDN.

    Equality and hashing use the canonical DER encoding, so there is no
    case folding or whitespace normalisation.
    """

    def __init__(self, rdns):
        rdns = tuple((t, str(v)) for t, v in rdns)
        if not rdns:
            raise ProfileViolation("Name must have at least one RDN")
        for t, _ in rdns:
            if not isinstance(t, ObjectIdentifier):
                raise TypeError(f"RDN type must be an ObjectIdentifier, got {t!r}")
        self.rdns = rdns

    @classmethod
    def parse(cls, text: str) -> "Name":
        """Build from ``"CN=alice,O=Example"`` style text."""
        rdns = []
        for part in text.split(","):
            key, sep, value = part.partition("=")
            if not sep:
                raise ValueError(f"bad name component {part!r}")
            key = key.strip()
            t = ATTRIBUTE_TYPES.get(key.upper()) or oid(key)
            rdns.append((t, value.strip()))
        return cls(rdns)

    @classmethod
    def common(cls, cn: str) -> "Name":
        return cls([(ATTRIBUTE_TYPES["CN"], cn)])

    def to_value(self) -> DerValue:
        return der.sequence(*(
            der.set_of(der.sequence(der.object_identifier(t), der.utf8(v)))
            for t, v in self.rdns
        ))

    @classmethod
    def from_value(cls, v: DerValue) -> "Name":
        outer = Fields(v, "Name")
        rdns = []
        for rdn in outer.items:
            f = Fields(rdn, "RelativeDistinguishedName", der.SET)
            if len(f.items) != 1:
                raise ProfileViolation("each RDN must hold exactly one attribute")
            atv = Fields(f.items[0], "AttributeTypeAndValue")
            rdns.append((atv.oid("type"), atv.text("value")))
            atv.done()
        return cls(rdns)

    @cached_property
    def der(self) -> bytes:
        return der.encode(self.to_value())

    @property
    def common_name(self) -> str | None:
        for t, v in self.rdns:
            if t == ATTRIBUTE_TYPES["CN"]:
                return v
        return None

    def __eq__(self, other):
        if not isinstance(other, Name):
            return NotImplemented
        return self.der == other.der

    def __hash__(self):
        return hash(self.der)

    def __str__(self):
        return ",".join(f"{_SHORT.get(t, t)}={v}" for t, v in self.rdns)

    def __repr__(self):
        return f"Name({str(self)!r})"
