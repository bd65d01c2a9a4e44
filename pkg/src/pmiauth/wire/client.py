"""Client side of the validation protocol, as embedded in the privilege verifier."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from ..certs import Name, PublicKeyCertificate, PublicKeyInfo
from ..crypto import KeyPair
from ..errors import CvsTimeout, DerError, EnvelopeSignatureInvalid, PmiError, ProfileViolation, ProtocolViolation
from ..pathengine import ANY, PathValidationResult, ReasonCode, Status, ValidationOptions
from ..pathengine.results import unknown
from .framing import ErrorReason, MsgType, exchange
from .messages import SignedEnvelope, ValidationRequest, ValidationResponse, new_request_id

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 5.0


@dataclass(frozen=True)
class CvsClientConfig:
    host: str
    port: int
    cvs_name: Name
    cvs_key: PublicKeyInfo
    signer: KeyPair | None = None
    signer_name: Name | None = None
    timeout: float = DEFAULT_TIMEOUT


class CvsClient:
    def __init__(self, config: CvsClientConfig):
        self.config = config

    def request_for(self, target: PublicKeyCertificate, options: ValidationOptions,
                    intermediates=None) -> ValidationRequest:
        anchors = options.anchors.certificates() if options.anchors else []
        policy = None if options.initial_policy_set is ANY else tuple(sorted(options.initial_policy_set))
        return ValidationRequest(new_request_id(), target, tuple(anchors) or None,
                                 tuple(intermediates) if intermediates else None,
                                 policy, options.validation_time)

    def send(self, req: ValidationRequest) -> ValidationResponse:
        """One round trip. Raises on timeout, protocol errors and bad signatures."""
        cfg = self.config
        envelope = SignedEnvelope.seal(req.encode(), cfg.signer, cfg.signer_name)
        msg_type, payload = exchange(cfg.host, cfg.port, MsgType.CVS_REQUEST, envelope.encode(), cfg.timeout)
        if msg_type == MsgType.ERROR:
            code = payload[0] if payload else 0
            try:
                label = ErrorReason(code).name
            except ValueError:
                label = str(code)
            raise ProtocolViolation(f"CVS returned error frame {label}")
        if msg_type != MsgType.CVS_RESPONSE:
            raise ProtocolViolation(f"unexpected message type {msg_type:#04x}")
        try:
            body = SignedEnvelope.decode(payload).open({cfg.cvs_name: cfg.cvs_key}, require_signature=True)
            resp = ValidationResponse.decode(body)
        except (DerError, ProfileViolation) as exc:
            raise ProtocolViolation(f"undecodable response: {exc}") from exc
        if resp.request_id != req.request_id:
            raise ProtocolViolation("response does not echo the request id")
        return resp

    def validate(self, target: PublicKeyCertificate, options: ValidationOptions,
                 intermediates=None) -> PathValidationResult:
        """Remote validation; every failure to get a trustworthy answer is UNKNOWN."""
        req = self.request_for(target, options, intermediates)
        try:
            resp = self.send(req)
        except CvsTimeout as exc:
            return unknown(ReasonCode.REVOCATION_UNAVAILABLE, f"timeout: {exc}")
        except EnvelopeSignatureInvalid as exc:
            return unknown(ReasonCode.REVOCATION_UNAVAILABLE, f"response signature rejected: {exc}")
        except (ProtocolViolation, PmiError, OSError) as exc:
            return unknown(ReasonCode.REVOCATION_UNAVAILABLE, f"CVS unavailable: {exc}")
        chain = resp.chain or ()
        return PathValidationResult(
            Status(resp.status), ReasonCode(resp.reason), chain,
            anchor_name=chain[-1].issuer if chain else None,
            detail="cached" if resp.cached else "",
            validated_at=req.validation_time or resp.produced_at,
        )


def validate_remote(config: CvsClientConfig, target: PublicKeyCertificate,
                    options: ValidationOptions) -> PathValidationResult:
    return CvsClient(config).validate(target, options)
