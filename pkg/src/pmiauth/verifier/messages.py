"""
Messages between a client and the privilege verifier gateway.

    AccessRequest ::= SEQUENCE {
        version      INTEGER (1),
        resourceId   UTF8String,
        method       UTF8String,
        clientCert   Certificate,
        clientAC     AttributeCertificate,
        presentedAt  [0] GeneralizedTime OPTIONAL,
        aaCert       [1] Certificate OPTIONAL }

    AccessDecision ::= SEQUENCE {
        version      INTEGER (1),
        verdict      INTEGER { permit(0), deny(1) },
        reasons      SEQUENCE OF SEQUENCE { code INTEGER, detail UTF8String },
        evaluatedAt  GeneralizedTime }
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime

from .. import der
from ..certs import AttributeCertificate, PublicKeyCertificate, parse_attribute_certificate, parse_certificate
from ..certs._profile import Fields, to_value
from ..errors import ProfileViolation

MESSAGE_VERSION = 1


class Verdict(enum.IntEnum):
    PERMIT = 0
    DENY = 1


class DecisionCode(enum.IntEnum):
    OK = 0
    CLIENT_PKC_INVALID = 20
    AA_PKC_INVALID = 21
    AC_SIGNATURE_INVALID = 22
    AC_REVOKED = 23
    AC_EXPIRED = 24
    AC_NOT_YET_VALID = 25
    HOLDER_MISMATCH = 26
    UNKNOWN_CRITICAL_AC_EXT = 27
    TARGET_MISMATCH = 28
    ATTRIBUTES_INSUFFICIENT = 29
    ENV_WINDOW = 30
    CVS_UNAVAILABLE = 31
    UNKNOWN_RESOURCE = 32


@dataclass(frozen=True)
class DecisionReason:
    code: DecisionCode
    detail: str = ""

    def __post_init__(self):
        object.__setattr__(self, "code", DecisionCode(self.code))

    def __str__(self):
        text = f"{int(self.code)} {self.code.name}"
        return f"{text}: {self.detail}" if self.detail else text


OK = DecisionReason(DecisionCode.OK)


@dataclass(frozen=True)
class AccessRequest:
    resource_id: str
    method: str
    client_cert: PublicKeyCertificate
    client_ac: AttributeCertificate
    presented_at: datetime | None = None
    aa_cert: PublicKeyCertificate | None = None

    def encode(self) -> bytes:
        items = [der.integer(MESSAGE_VERSION), der.utf8(self.resource_id), der.utf8(self.method),
                 to_value(self.client_cert.der), to_value(self.client_ac.der)]
        if self.presented_at is not None:
            items.append(der.explicit(0, der.encode_time(self.presented_at)))
        if self.aa_cert is not None:
            items.append(der.explicit(1, to_value(self.aa_cert.der)))
        return der.encode(der.sequence(*items))

    @classmethod
    def decode(cls, data: bytes) -> "AccessRequest":
        f = Fields(der.decode_all(data), "AccessRequest")
        if f.integer("version") != MESSAGE_VERSION:
            raise ProfileViolation("AccessRequest: unsupported version")
        resource = f.text("resourceId")
        method = f.text("method")
        cert = parse_certificate(f.take(der.SEQUENCE, "clientCert"))
        ac = parse_attribute_certificate(f.take(der.SEQUENCE, "clientAC"))
        presented = aa = None
        v = f.optional(der.context_tag(0))
        if v is not None:
            inner = Fields(v, "presentedAt", der.context_tag(0))
            presented = inner.time("value")
            inner.done()
        v = f.optional(der.context_tag(1))
        if v is not None:
            inner = Fields(v, "aaCert", der.context_tag(1))
            aa = parse_certificate(inner.take(der.SEQUENCE, "value"))
            inner.done()
        f.done()
        return cls(resource, method, cert, ac, presented, aa)


@dataclass(frozen=True)
class AccessDecision:
    verdict: Verdict
    reasons: tuple[DecisionReason, ...]
    evaluated_at: datetime
    # per-chain CVS outcomes, kept for the audit log; not transmitted
    cvs_verdicts: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "verdict", Verdict(self.verdict))
        object.__setattr__(self, "reasons", tuple(self.reasons))
        if (self.verdict == Verdict.PERMIT) != (self.codes == (DecisionCode.OK,)):
            raise ValueError(f"inconsistent decision {self.verdict.name} {self.codes}")

    @classmethod
    def permit(cls, at: datetime, cvs_verdicts=None) -> "AccessDecision":
        return cls(Verdict.PERMIT, (OK,), at, dict(cvs_verdicts or {}))

    @classmethod
    def deny(cls, reasons, at: datetime, cvs_verdicts=None) -> "AccessDecision":
        return cls(Verdict.DENY, tuple(reasons), at, dict(cvs_verdicts or {}))

    @property
    def permitted(self) -> bool:
        return self.verdict == Verdict.PERMIT

    @property
    def codes(self) -> tuple[DecisionCode, ...]:
        return tuple(r.code for r in self.reasons)

    def describe(self) -> str:
        return f"{self.verdict.name}: " + "; ".join(str(r) for r in self.reasons)

    def encode(self) -> bytes:
        reasons = der.sequence(*(der.sequence(der.integer(int(r.code)), der.utf8(r.detail)) for r in self.reasons))
        return der.encode(der.sequence(der.integer(MESSAGE_VERSION), der.integer(int(self.verdict)), reasons,
                                       der.encode_time(self.evaluated_at)))

    @classmethod
    def decode(cls, data: bytes) -> "AccessDecision":
        f = Fields(der.decode_all(data), "AccessDecision")
        if f.integer("version") != MESSAGE_VERSION:
            raise ProfileViolation("AccessDecision: unsupported version")
        try:
            verdict = Verdict(f.integer("verdict"))
        except ValueError as exc:
            raise ProfileViolation(f"AccessDecision: {exc}") from exc
        reasons = []
        for item in Fields(f.take(der.SEQUENCE, "reasons"), "reasons").items:
            rf = Fields(item, "reason")
            code = rf.integer("code")
            if code not in DecisionCode._value2member_map_:
                raise ProfileViolation(f"AccessDecision: unknown reason code {code}")
            reasons.append(DecisionReason(DecisionCode(code), rf.text("detail")))
            rf.done()
        at = f.time("evaluatedAt")
        f.done()
        try:
            return cls(verdict, tuple(reasons), at)
        except ValueError as exc:
            raise ProfileViolation(f"AccessDecision: {exc}") from exc
