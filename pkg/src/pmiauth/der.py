"""
Minimal DER tag-length-value codec.

Only definite lengths and a fixed set of universal tags are supported,
plus context-specific tags [0]..[9]. Everything the decoder accepts is
exactly what the encoder would produce for the same value.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterable, Union

from .errors import (
    LengthTooLarge,
    MalformedContent,
    MalformedTime,
    NestingTooDeep,
    NonCanonicalLength,
    TrailingData,
    Truncated,
    UnsupportedTag,
)

UNIVERSAL = "universal"
CONTEXT = "context"

MAX_DEPTH = 32
MAX_LENGTH = 1 << 24

_UNIVERSAL_NUMBERS = {1, 2, 3, 4, 5, 6, 12, 16, 17, 19, 24}
_CONSTRUCTED_UNIVERSAL = {16, 17}
_CONTEXT_MAX = 9

_PRINTABLE = re.compile(r"[A-Za-z0-9 '()+,\-./:=?]*\Z")
_GENTIME = re.compile(r"(\d{4})(\d{2})(\d{2})(\d{2})(\d{2})(\d{2})Z\Z")


@dataclass(frozen=True)
class DerTag:
    cls: str
    constructed: bool
    number: int

    def __post_init__(self):
        if self.cls == UNIVERSAL:
            if self.number not in _UNIVERSAL_NUMBERS:
                raise UnsupportedTag(f"universal tag {self.number} not supported")
            if self.constructed != (self.number in _CONSTRUCTED_UNIVERSAL):
                raise UnsupportedTag(f"universal tag {self.number} has wrong form")
        elif self.cls == CONTEXT:
            if not 0 <= self.number <= _CONTEXT_MAX:
                raise UnsupportedTag(f"context tag [{self.number}] out of range")
        else:
            raise UnsupportedTag(f"tag class {self.cls!r} not supported")

    @property
    def octet(self) -> int:
        return (0x80 if self.cls == CONTEXT else 0) | (0x20 if self.constructed else 0) | self.number

    @classmethod
    def from_octet(cls, b: int) -> "DerTag":
        klass = b & 0xC0
        number = b & 0x1F
        if klass == 0x00:
            name = UNIVERSAL
        elif klass == 0x80:
            name = CONTEXT
        else:
            raise UnsupportedTag(f"tag class bits {klass:#04x} not supported")
        if number == 0x1F:
            raise UnsupportedTag("high tag number form not supported")
        return cls(name, bool(b & 0x20), number)

    def __repr__(self):
        if self.cls == CONTEXT:
            return f"[{self.number}]{'c' if self.constructed else 'p'}"
        return _UNIVERSAL_NAMES.get(self.number, str(self.number))


BOOLEAN = DerTag(UNIVERSAL, False, 1)
INTEGER = DerTag(UNIVERSAL, False, 2)
BIT_STRING = DerTag(UNIVERSAL, False, 3)
OCTET_STRING = DerTag(UNIVERSAL, False, 4)
NULL = DerTag(UNIVERSAL, False, 5)
OBJECT_IDENTIFIER = DerTag(UNIVERSAL, False, 6)
UTF8_STRING = DerTag(UNIVERSAL, False, 12)
PRINTABLE_STRING = DerTag(UNIVERSAL, False, 19)
GENERALIZED_TIME = DerTag(UNIVERSAL, False, 24)
SEQUENCE = DerTag(UNIVERSAL, True, 16)
SET = DerTag(UNIVERSAL, True, 17)

_UNIVERSAL_NAMES = {
    1: "BOOLEAN", 2: "INTEGER", 3: "BIT STRING", 4: "OCTET STRING", 5: "NULL",
    6: "OBJECT IDENTIFIER", 12: "UTF8String", 19: "PrintableString",
    24: "GeneralizedTime", 16: "SEQUENCE", 17: "SET",
}


def context_tag(number: int, constructed: bool = True) -> DerTag:
    return DerTag(CONTEXT, constructed, number)


@dataclass(frozen=True)
class DerValue:
    tag: DerTag
    content: Union[bytes, tuple]

    def __post_init__(self):
        if self.tag.constructed:
            if not isinstance(self.content, tuple):
                object.__setattr__(self, "content", tuple(self.content))
        elif not isinstance(self.content, bytes):
            object.__setattr__(self, "content", bytes(self.content))

    @property
    def children(self) -> tuple:
        if not self.tag.constructed:
            raise TypeError(f"{self.tag!r} is primitive")
        return self.content

    def __repr__(self):
        if self.tag.constructed:
            return f"{self.tag!r}{list(self.content)!r}"
        return f"{self.tag!r}({self.content.hex()})"


@dataclass(frozen=True, order=True)
class ObjectIdentifier:
    arcs: tuple

    def __post_init__(self):
        arcs = tuple(int(a) for a in self.arcs)
        object.__setattr__(self, "arcs", arcs)
        if len(arcs) < 2 or any(a < 0 for a in arcs):
            raise MalformedContent(f"invalid OID arcs {arcs}")
        if arcs[0] > 2 or (arcs[0] < 2 and arcs[1] >= 40):
            raise MalformedContent(f"invalid OID root {arcs[0]}.{arcs[1]}")

    @classmethod
    def parse(cls, dotted: str) -> "ObjectIdentifier":
        try:
            return cls(tuple(int(p) for p in dotted.strip().split(".")))
        except ValueError as exc:
            raise MalformedContent(f"bad OID text {dotted!r}") from exc

    def __str__(self):
        return ".".join(str(a) for a in self.arcs)

    def __repr__(self):
        return f"OID({self})"


oid = ObjectIdentifier.parse


# --- length octets ---------------------------------------------------------

def encode_length(n: int) -> bytes:
    if n < 0 or n >= 1 << 32:
        raise MalformedContent(f"length {n} out of range")
    if n <= 127:
        return bytes([n])
    body = n.to_bytes((n.bit_length() + 7) // 8, "big")
    return bytes([0x80 | len(body)]) + body


def decode_length(data: bytes, pos: int = 0, end: int | None = None) -> tuple[int, int]:
    """Return ``(length, octets consumed)`` for the length field at ``pos``."""
    if end is None:
        end = len(data)
    if pos >= end:
        raise Truncated("missing length octets")
    first = data[pos]
    if first < 0x80:
        return first, 1
    k = first & 0x7F
    if k == 0:
        raise NonCanonicalLength("indefinite length not allowed")
    if k > 4:
        raise NonCanonicalLength(f"{k} length octets")
    if pos + 1 + k > end:
        raise Truncated("length octets truncated")
    body = data[pos + 1 : pos + 1 + k]
    if body[0] == 0:
        raise NonCanonicalLength("leading zero length octet")
    n = int.from_bytes(body, "big")
    if n <= 127:
        raise NonCanonicalLength("long form used for short length")
    return n, 1 + k


# --- primitive content rules ----------------------------------------------

def _check_integer(c: bytes):
    if not c:
        raise MalformedContent("empty INTEGER")
    if len(c) > 1 and ((c[0] == 0 and c[1] < 0x80) or (c[0] == 0xFF and c[1] >= 0x80)):
        raise MalformedContent("non-minimal INTEGER")


def _check_bit_string(c: bytes):
    if not c:
        raise MalformedContent("empty BIT STRING")
    unused = c[0]
    if unused > 7 or (len(c) == 1 and unused):
        raise MalformedContent("bad BIT STRING unused-bit count")
    if unused and c[-1] & ((1 << unused) - 1):
        raise MalformedContent("BIT STRING padding bits not zero")


def _oid_arcs(c: bytes) -> tuple:
    if not c:
        raise MalformedContent("empty OBJECT IDENTIFIER")
    subids = []
    acc = 0
    start = True
    for b in c:
        if start and b == 0x80:
            raise MalformedContent("non-minimal OID subidentifier")
        acc = (acc << 7) | (b & 0x7F)
        start = not b & 0x80
        if start:
            subids.append(acc)
            acc = 0
    if not start:
        raise MalformedContent("OID subidentifier truncated")
    first = subids[0]
    if first < 40:
        head = (0, first)
    elif first < 80:
        head = (1, first - 40)
    else:
        head = (2, first - 80)
    return head + tuple(subids[1:])


def _base128(n: int) -> bytes:
    out = [n & 0x7F]
    n >>= 7
    while n:
        out.append(0x80 | (n & 0x7F))
        n >>= 7
    return bytes(reversed(out))


def _parse_gentime(c: bytes) -> datetime:
    m = _GENTIME.match(c.decode("ascii", "replace"))
    if not m:
        raise MalformedTime(f"GeneralizedTime must be YYYYMMDDHHMMSSZ, got {c!r}")
    y, mo, d, h, mi, s = (int(g) for g in m.groups())
    if not 1950 <= y <= 2449:
        raise MalformedTime(f"year {y} out of range")
    try:
        return datetime(y, mo, d, h, mi, s, tzinfo=timezone.utc)
    except ValueError as exc:
        raise MalformedTime(str(exc)) from exc


def _check_primitive(tag: DerTag, c: bytes):
    if tag.cls != UNIVERSAL:
        return
    n = tag.number
    if n == 1:
        if len(c) != 1 or c[0] not in (0x00, 0xFF):
            raise MalformedContent("BOOLEAN must be a single 00 or FF octet")
    elif n == 2:
        _check_integer(c)
    elif n == 3:
        _check_bit_string(c)
    elif n == 5:
        if c:
            raise MalformedContent("NULL with content")
    elif n == 6:
        _oid_arcs(c)
    elif n == 12:
        try:
            c.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedContent("invalid UTF-8") from exc
    elif n == 19:
        if not _PRINTABLE.match(c.decode("latin-1")):
            raise MalformedContent("invalid PrintableString character")
    elif n == 24:
        _parse_gentime(c)


# --- encode / decode -------------------------------------------------------

def encode(value: DerValue) -> bytes:
    return bytes(_encode(value, 1))


def _encode(value: DerValue, depth: int) -> bytearray:
    if depth > MAX_DEPTH:
        raise NestingTooDeep(f"depth {depth} exceeds {MAX_DEPTH}")
    tag = value.tag
    if tag.constructed:
        parts = [_encode(child, depth + 1) for child in value.content]
        if tag == SET:
            if any(parts[i] > parts[i + 1] for i in range(len(parts) - 1)):
                raise MalformedContent("SET elements not in DER order")
        body = b"".join(parts)
    else:
        body = value.content
        _check_primitive(tag, body)
    if len(body) > MAX_LENGTH:
        raise LengthTooLarge(f"content of {len(body)} bytes")
    out = bytearray([tag.octet])
    out += encode_length(len(body))
    out += body
    return out


def decode(data: bytes) -> tuple[DerValue, int]:
    """Decode the first complete TLV; return it with the number of bytes used."""
    data = bytes(data)
    return _decode_at(data, 0, len(data), 1)


def decode_all(data: bytes) -> DerValue:
    value, used = decode(data)
    if used != len(data):
        raise TrailingData(f"{len(data) - used} bytes after value")
    return value


def _decode_at(data: bytes, pos: int, end: int, depth: int) -> tuple[DerValue, int]:
    if depth > MAX_DEPTH:
        raise NestingTooDeep(f"depth exceeds {MAX_DEPTH}")
    if pos >= end:
        raise Truncated("missing tag")
    tag = DerTag.from_octet(data[pos])
    length, k = decode_length(data, pos + 1, end)
    if length > MAX_LENGTH:
        raise LengthTooLarge(f"length {length}")
    start = pos + 1 + k
    stop = start + length
    if stop > end:
        raise Truncated(f"need {stop - end} more bytes")
    if tag.constructed:
        children = []
        cur = start
        prev = None
        while cur < stop:
            child, used = _decode_at(data, cur, stop, depth + 1)
            if tag == SET:
                raw = data[cur : cur + used]
                if prev is not None and prev > raw:
                    raise MalformedContent("SET elements not in DER order")
                prev = raw
            children.append(child)
            cur += used
        return DerValue(tag, tuple(children)), stop - pos
    body = data[start:stop]
    _check_primitive(tag, body)
    return DerValue(tag, body), stop - pos


# --- value constructors ----------------------------------------------------

def integer(n: int) -> DerValue:
    size = max(1, (n + (n < 0)).bit_length() // 8 + 1)
    return DerValue(INTEGER, n.to_bytes(size, "big", signed=True))


def boolean(flag: bool) -> DerValue:
    return DerValue(BOOLEAN, b"\xff" if flag else b"\x00")


def null() -> DerValue:
    return DerValue(NULL, b"")


def octet_string(data: bytes) -> DerValue:
    return DerValue(OCTET_STRING, bytes(data))


def bit_string(data: bytes, unused: int = 0) -> DerValue:
    return DerValue(BIT_STRING, bytes([unused]) + bytes(data))


def utf8(text: str) -> DerValue:
    return DerValue(UTF8_STRING, text.encode("utf-8"))


def printable(text: str) -> DerValue:
    return DerValue(PRINTABLE_STRING, text.encode("ascii"))


def object_identifier(o: ObjectIdentifier) -> DerValue:
    arcs = o.arcs
    body = _base128(40 * arcs[0] + arcs[1]) + b"".join(_base128(a) for a in arcs[2:])
    return DerValue(OBJECT_IDENTIFIER, body)


def sequence(*items: DerValue) -> DerValue:
    return DerValue(SEQUENCE, tuple(items))


def set_of(*items: DerValue) -> DerValue:
    return DerValue(SET, tuple(sorted(items, key=encode)))


def explicit(number: int, inner: DerValue) -> DerValue:
    return DerValue(context_tag(number), (inner,))


def implicit(number: int, content: bytes) -> DerValue:
    return DerValue(context_tag(number, constructed=False), bytes(content))


def context(number: int, items: Iterable[DerValue]) -> DerValue:
    return DerValue(context_tag(number), tuple(items))


# --- accessors (tag must already be checked by the caller) -----------------

def to_int(v: DerValue) -> int:
    return int.from_bytes(v.content, "big", signed=True)


def to_bool(v: DerValue) -> bool:
    return v.content == b"\xff"


def to_oid(v: DerValue) -> ObjectIdentifier:
    return ObjectIdentifier(_oid_arcs(v.content))


def to_text(v: DerValue) -> str:
    return v.content.decode("utf-8")


def to_bits(v: DerValue) -> tuple[bytes, int]:
    return v.content[1:], v.content[0]


# --- time ------------------------------------------------------------------

def encode_time(t: datetime) -> DerValue:
    if t.tzinfo is None:
        raise MalformedTime("timestamp must be timezone-aware")
    t = t.astimezone(timezone.utc)
    if t.microsecond:
        raise MalformedTime("sub-second precision not representable")
    if not 1950 <= t.year <= 2449:
        raise MalformedTime(f"year {t.year} out of range")
    return DerValue(GENERALIZED_TIME, t.strftime("%Y%m%d%H%M%SZ").encode("ascii"))


def decode_time(v: DerValue) -> datetime:
    if v.tag != GENERALIZED_TIME:
        raise MalformedTime(f"expected GeneralizedTime, got {v.tag!r}")
    return _parse_gentime(v.content)


def format_time(t: datetime) -> str:
    return encode_time(t).content.decode("ascii")


def parse_time(text: str) -> datetime:
    """Parse ``YYYYMMDDHHMMSSZ`` (or an ISO-8601 string with a UTC offset)."""
    if _GENTIME.match(text):
        return _parse_gentime(text.encode("ascii"))
    try:
        t = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError as exc:
        raise MalformedTime(f"unrecognised time {text!r}") from exc
    if t.tzinfo is None:
        raise MalformedTime(f"time {text!r} lacks a UTC offset")
    return t.astimezone(timezone.utc).replace(microsecond=0)
