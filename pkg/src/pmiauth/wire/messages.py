"""
DER structures exchanged between the privilege verifier and the CVS.

    SignedEnvelope ::= SEQUENCE {
        body        OCTET STRING,
        -- the next three are present together or not at all
        signerName  Name,
        algorithm   AlgorithmIdentifier,
        signature   BIT STRING }

    ValidationRequest ::= SEQUENCE {
        version        INTEGER (1),
        requestId      OCTET STRING (SIZE (16)),
        targetCert     Certificate,
        anchors        [0] SEQUENCE OF Certificate OPTIONAL,
        intermediates  [1] SEQUENCE OF Certificate OPTIONAL,
        policySet      [2] SEQUENCE OF OBJECT IDENTIFIER OPTIONAL,
        validationTime [3] GeneralizedTime OPTIONAL }

    ValidationResponse ::= SEQUENCE {
        version     INTEGER (1),
        requestId   OCTET STRING (SIZE (16)),
        status      INTEGER { valid(0), invalid(1), unknown(2) },
        reason      INTEGER,
        chain       [0] SEQUENCE OF Certificate OPTIONAL,
        producedAt  GeneralizedTime,
        cached      BOOLEAN }
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from datetime import datetime

from .. import der
from ..certs import Name, PublicKeyCertificate, PublicKeyInfo, parse_certificate
from ..certs._profile import Fields, algorithm_value, to_value
from ..crypto import AlgorithmId, KeyPair, Signature, sign, verify
from ..der import DerValue
from ..errors import EnvelopeSignatureInvalid, ProfileViolation, UnrecognizedAlgorithm
from ..pathengine import ReasonCode, Status

MESSAGE_VERSION = 1
REQUEST_ID_LEN = 16


def new_request_id() -> bytes:
    return os.urandom(REQUEST_ID_LEN)


# --- envelope --------------------------------------------------------------

@dataclass(frozen=True)
class SignedEnvelope:
    body: bytes
    signer_name: Name | None = None
    algorithm: AlgorithmId | None = None
    signature: Signature | None = None

    @property
    def signed(self) -> bool:
        return self.signature is not None

    @classmethod
    def seal(cls, body: bytes, key: KeyPair | None = None, signer_name: Name | None = None) -> "SignedEnvelope":
        if key is None:
            return cls(body)
        if signer_name is None:
            raise ValueError("a signed envelope needs a signer name")
        return cls(body, signer_name, key.algorithm, sign(key, body))

    def encode(self) -> bytes:
        items = [der.octet_string(self.body)]
        if self.signed:
            items += [self.signer_name.to_value(), algorithm_value(self.algorithm),
                      der.bit_string(self.signature.value)]
        return der.encode(der.sequence(*items))

    @classmethod
    def decode(cls, data: bytes) -> "SignedEnvelope":
        f = Fields(der.decode_all(data), "SignedEnvelope")
        body = f.take(der.OCTET_STRING, "body").content
        if len(f.items) == 1:
            return cls(body)
        signer = Name.from_value(f.take(der.SEQUENCE, "signerName"))
        alg = f.algorithm("algorithm")
        sig = f.bits("signature")
        f.done()
        return cls(body, signer, alg, Signature(alg, sig))

    def open(self, trusted: dict, require_signature: bool = True) -> bytes:
        """Return the body after checking the signature against ``trusted``.

        ``trusted`` maps signer :class:`Name` to :class:`PublicKeyInfo`.
        """
        if not self.signed:
            if require_signature:
                raise EnvelopeSignatureInvalid("envelope is not signed")
            return self.body
        key = trusted.get(self.signer_name)
        if key is None:
            raise EnvelopeSignatureInvalid(f"signer {self.signer_name} is not trusted")
        if key.algorithm != self.algorithm:
            raise EnvelopeSignatureInvalid("envelope algorithm does not match the signer's key")
        try:
            ok = verify(key.key, self.algorithm, self.body, self.signature)
        except UnrecognizedAlgorithm as exc:
            raise EnvelopeSignatureInvalid(str(exc)) from exc
        if not ok:
            raise EnvelopeSignatureInvalid(f"signature by {self.signer_name} does not verify")
        return self.body


# --- helpers ---------------------------------------------------------------

def _certs_value(certs) -> DerValue:
    return der.sequence(*(to_value(c.der) for c in certs))


def _certs_from(v: DerValue, what: str) -> tuple[PublicKeyCertificate, ...]:
    return tuple(parse_certificate(item) for item in Fields(v, what).items)


def _optional_list(f: Fields, number: int, what: str) -> DerValue | None:
    wrapped = f.optional(der.context_tag(number))
    if wrapped is None:
        return None
    inner = Fields(wrapped, what, der.context_tag(number))
    v = inner.take(der.SEQUENCE, "list")
    inner.done()
    return v


def _check_version(f: Fields):
    if f.integer("version") != MESSAGE_VERSION:
        raise ProfileViolation(f"{f.what}: unsupported version")


def _check_request_id(rid: bytes):
    if len(rid) != REQUEST_ID_LEN:
        raise ProfileViolation(f"requestId must be {REQUEST_ID_LEN} bytes")


# --- request ---------------------------------------------------------------

@dataclass(frozen=True)
class ValidationRequest:
    request_id: bytes
    target: PublicKeyCertificate
    anchors: tuple | None = None
    intermediates: tuple | None = None
    policy_set: tuple | None = None
    validation_time: datetime | None = None

    def __post_init__(self):
        _check_request_id(self.request_id)
        for name in ("anchors", "intermediates", "policy_set"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, tuple(v))

    def encode(self) -> bytes:
        items = [der.integer(MESSAGE_VERSION), der.octet_string(self.request_id), to_value(self.target.der)]
        if self.anchors is not None:
            items.append(der.explicit(0, _certs_value(self.anchors)))
        if self.intermediates is not None:
            items.append(der.explicit(1, _certs_value(self.intermediates)))
        if self.policy_set is not None:
            items.append(der.explicit(2, der.sequence(*(der.object_identifier(p) for p in self.policy_set))))
        if self.validation_time is not None:
            items.append(der.explicit(3, der.encode_time(self.validation_time)))
        return der.encode(der.sequence(*items))

    @classmethod
    def decode(cls, data: bytes) -> "ValidationRequest":
        f = Fields(der.decode_all(data), "ValidationRequest")
        _check_version(f)
        rid = f.take(der.OCTET_STRING, "requestId").content
        target = parse_certificate(f.take(der.SEQUENCE, "targetCert"))
        anchors = _optional_list(f, 0, "anchors")
        inter = _optional_list(f, 1, "intermediates")
        pol = _optional_list(f, 2, "policySet")
        t = None
        tv = f.optional(der.context_tag(3))
        if tv is not None:
            inner = Fields(tv, "validationTime", der.context_tag(3))
            t = inner.time("value")
            inner.done()
        f.done()
        policies = None
        if pol is not None:
            pf = Fields(pol, "policySet")
            policies = tuple(pf.oid("policy") for _ in range(len(pf.items)))
        return cls(
            rid, target,
            _certs_from(anchors, "anchors") if anchors is not None else None,
            _certs_from(inter, "intermediates") if inter is not None else None,
            policies, t,
        )


# --- response --------------------------------------------------------------

@dataclass(frozen=True)
class ValidationResponse:
    request_id: bytes
    status: Status
    reason: ReasonCode
    chain: tuple | None
    produced_at: datetime
    cached: bool = False

    def __post_init__(self):
        _check_request_id(self.request_id)
        if self.chain is not None:
            object.__setattr__(self, "chain", tuple(self.chain))

    def encode(self) -> bytes:
        items = [der.integer(MESSAGE_VERSION), der.octet_string(self.request_id),
                 der.integer(int(self.status)), der.integer(int(self.reason))]
        if self.chain is not None:
            items.append(der.explicit(0, _certs_value(self.chain)))
        items += [der.encode_time(self.produced_at), der.boolean(self.cached)]
        return der.encode(der.sequence(*items))

    @classmethod
    def decode(cls, data: bytes) -> "ValidationResponse":
        f = Fields(der.decode_all(data), "ValidationResponse")
        _check_version(f)
        rid = f.take(der.OCTET_STRING, "requestId").content
        try:
            status = Status(f.integer("status"))
            reason = ReasonCode(f.integer("reason"))
        except ValueError as exc:
            raise ProfileViolation(f"ValidationResponse: {exc}") from exc
        chain = _optional_list(f, 0, "chain")
        produced = f.time("producedAt")
        cached = der.to_bool(f.take(der.BOOLEAN, "cached"))
        f.done()
        if (status == Status.VALID) != (reason == ReasonCode.OK):
            raise ProfileViolation("ValidationResponse: status and reason disagree")
        return cls(rid, status, reason, _certs_from(chain, "chain") if chain is not None else None,
                   produced, cached)


def trusted_map(*pairs) -> dict:
    """Build a signer table from ``(Name, PublicKeyInfo | KeyPair)`` pairs."""
    out = {}
    for name, key in pairs:
        out[name] = key if isinstance(key, PublicKeyInfo) else PublicKeyInfo.of(key)
    return out
