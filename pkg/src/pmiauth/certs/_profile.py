from __future__ import annotations

from datetime import datetime

from .. import der
from ..crypto import AlgorithmId, Signature
from ..der import DerTag, DerValue
from ..errors import DerError, ProfileViolation


def expect(v: DerValue, tag: DerTag, what: str) -> DerValue:
    if v.tag != tag:
        raise ProfileViolation(f"{what}: expected {tag!r}, found {v.tag!r}")
    return v


class Fields:
    """Sequential reader over the children of a constructed value."""

    def __init__(self, v: DerValue, what: str, tag: DerTag = der.SEQUENCE):
        expect(v, tag, what)
        self.what = what
        self.items = v.children
        self.pos = 0

    def take(self, tag: DerTag, field: str) -> DerValue:
        if self.pos >= len(self.items):
            raise ProfileViolation(f"{self.what}: missing {field}")
        v = expect(self.items[self.pos], tag, f"{self.what}.{field}")
        self.pos += 1
        return v

    def optional(self, tag: DerTag) -> DerValue | None:
        if self.pos < len(self.items) and self.items[self.pos].tag == tag:
            self.pos += 1
            return self.items[self.pos - 1]
        return None

    def done(self):
        if self.pos != len(self.items):
            raise ProfileViolation(f"{self.what}: {len(self.items) - self.pos} unexpected trailing field(s)")

    # typed helpers
    def integer(self, field: str) -> int:
        return der.to_int(self.take(der.INTEGER, field))

    def positive(self, field: str) -> int:
        n = self.integer(field)
        if n <= 0:
            raise ProfileViolation(f"{self.what}.{field} must be positive, got {n}")
        return n

    def time(self, field: str) -> datetime:
        return der.decode_time(self.take(der.GENERALIZED_TIME, field))

    def text(self, field: str) -> str:
        return der.to_text(self.take(der.UTF8_STRING, field))

    def oid(self, field: str):
        return der.to_oid(self.take(der.OBJECT_IDENTIFIER, field))

    def algorithm(self, field: str) -> AlgorithmId:
        return algorithm_from_value(self.take(der.SEQUENCE, field))

    def bits(self, field: str) -> bytes:
        data, unused = der.to_bits(self.take(der.BIT_STRING, field))
        if unused:
            raise ProfileViolation(f"{self.what}.{field} must be a whole number of octets")
        return data


def algorithm_value(alg: AlgorithmId) -> DerValue:
    return der.sequence(der.object_identifier(alg.oid))


def algorithm_from_value(v: DerValue) -> AlgorithmId:
    f = Fields(v, "AlgorithmIdentifier")
    alg = AlgorithmId(f.oid("algorithm"))
    f.done()
    return alg


def to_value(data) -> DerValue:
    if isinstance(data, DerValue):
        return data
    return der.decode_all(bytes(data))


def signed_outer(tbs_bytes: bytes, alg: AlgorithmId, signature: Signature) -> bytes:
    rest = der.encode(algorithm_value(alg)) + der.encode(der.bit_string(signature.value))
    body = tbs_bytes + rest
    return b"\x30" + der.encode_length(len(body)) + body


def split_signed(v: DerValue, what: str) -> tuple[DerValue, AlgorithmId, Signature]:
    """Split ``SEQUENCE { tbs, AlgorithmIdentifier, BIT STRING }``."""
    f = Fields(v, what)
    tbs = f.take(der.SEQUENCE, "tbs")
    alg = f.algorithm("signatureAlgorithm")
    sig = f.bits("signature")
    f.done()
    return tbs, alg, Signature(alg, sig)


__all__ = [
    "DerError", "Fields", "ProfileViolation", "algorithm_from_value", "algorithm_value",
    "expect", "signed_outer", "split_signed", "to_value",
]
