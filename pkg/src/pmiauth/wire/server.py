"""Certificate validation server."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from ..certs import CertStore, Name, PublicKeyInfo, TrustAnchorSet, load_certificate, load_store
from ..crypto import KeyPair
from ..der import parse_time
from ..errors import DerError, EnvelopeSignatureInvalid, PmiError, ProfileViolation
from ..pathengine import ANY, Clock, FixedClock, RevocationMode, SystemClock, ValidationOptions, validate_pkc
from .cache import ResponseCache, cache_key
from .framing import ErrorReason, FrameServer, MsgType
from .keys import KeyFile, load_key_file, load_trusted_keys
from .messages import SignedEnvelope, ValidationRequest, ValidationResponse

log = logging.getLogger(__name__)


@dataclass
class CvsConfig:
    host: str = "127.0.0.1"
    port: int = 7001
    store_dir: str | None = None
    key_file: str | None = None
    cache: bool = True
    clock: str | None = None
    anchors: list = field(default_factory=list)
    trusted_clients: list = field(default_factory=list)
    require_signed_requests: bool = False
    revocation_mode: str = RevocationMode.HARD_FAIL.value
    max_path_length: int = 8

    @classmethod
    def load(cls, path) -> "CvsConfig":
        path = Path(path)
        data = json.loads(path.read_text())
        host, _, port = data.pop("listen", "127.0.0.1:7001").rpartition(":")
        cfg = cls(host=host or "127.0.0.1", port=int(port), **data)
        base = path.parent
        cfg.store_dir = str(base / cfg.store_dir) if cfg.store_dir else None
        cfg.key_file = str(base / cfg.key_file) if cfg.key_file else None
        cfg.anchors = [str(base / a) for a in cfg.anchors]
        cfg.trusted_clients = [str(base / a) for a in cfg.trusted_clients]
        return cfg


class CvsService:
    """Request handling independent of the transport."""

    def __init__(self, store: CertStore, anchors: TrustAnchorSet, key: KeyPair, name: Name,
                 clock: Clock | None = None, cache: bool = True, trusted_clients: dict | None = None,
                 require_signed_requests: bool = False,
                 revocation_mode: RevocationMode = RevocationMode.HARD_FAIL, max_path_length: int = 8):
        self.store = store
        self.anchors = anchors
        self.key = key
        self.name = name
        self.clock = clock or SystemClock()
        self.cache = ResponseCache() if cache else None
        self.trusted_clients = dict(trusted_clients or {})
        self.require_signed_requests = require_signed_requests
        self.revocation_mode = RevocationMode(revocation_mode)
        self.max_path_length = max_path_length

    @property
    def public_key(self) -> PublicKeyInfo:
        return PublicKeyInfo.of(self.key)

    def handle(self, msg_type: int, payload: bytes) -> tuple[int, bytes]:
        """Map one request frame to one reply frame; never raises."""
        if msg_type != MsgType.CVS_REQUEST:
            return MsgType.ERROR, bytes([ErrorReason.BAD_TYPE])
        try:
            envelope = SignedEnvelope.decode(payload)
            body = envelope.open(self.trusted_clients, self.require_signed_requests)
            req = ValidationRequest.decode(body)
            resp = self.evaluate(req)
        except EnvelopeSignatureInvalid as exc:
            log.info("request rejected: %s", exc)
            return MsgType.ERROR, bytes([ErrorReason.BAD_SIGNATURE])
        except (DerError, ProfileViolation, PmiError, ValueError) as exc:
            log.info("malformed request: %s", exc)
            return MsgType.ERROR, bytes([ErrorReason.BAD_MESSAGE])
        except Exception:
            log.exception("internal error while serving request")
            return MsgType.ERROR, bytes([ErrorReason.INTERNAL])
        reply = SignedEnvelope.seal(resp.encode(), self.key, self.name)
        return MsgType.CVS_RESPONSE, reply.encode()

    def evaluate(self, req: ValidationRequest) -> ValidationResponse:
        now = self.clock.now()
        at = req.validation_time or now
        key = cache_key(req) if self.cache is not None else None
        result = self.cache.get(key, at) if self.cache is not None else None
        cached = result is not None
        if result is None:
            anchors = self.anchors if req.anchors is None else TrustAnchorSet.from_certificates(req.anchors)
            snapshot = self.store.merged(req.intermediates) if req.intermediates else self.store
            policy = ANY if req.policy_set is None else frozenset(req.policy_set)
            options = ValidationOptions(anchors, at, policy, self.max_path_length, self.revocation_mode)
            result = validate_pkc(req.target, snapshot, options)
            if self.cache is not None:
                self.cache.store(req, key, result, snapshot, at)
        log.info("validated %s: %s%s", req.target.subject, result.describe(), " (cached)" if cached else "")
        return ValidationResponse(req.request_id, result.status, result.reason,
                                  result.chain or None, now, cached)


def build_service(cfg: CvsConfig, clock: Clock | None = None) -> CvsService:
    report = load_store(cfg.store_dir) if cfg.store_dir else None
    store = report.store if report else CertStore()
    if report and report.skipped:
        for path, why in report.skipped:
            log.warning("store: skipped %s (%s)", path, why)
    kf: KeyFile = load_key_file(cfg.key_file)
    if clock is None:
        clock = FixedClock(parse_time(cfg.clock)) if cfg.clock else SystemClock()
    anchors = TrustAnchorSet.from_certificates(load_certificate(p) for p in cfg.anchors)
    return CvsService(store, anchors, kf.key, kf.name, clock, cfg.cache,
                      load_trusted_keys(cfg.trusted_clients), cfg.require_signed_requests,
                      cfg.revocation_mode, cfg.max_path_length)


class CvsServer(FrameServer):
    def __init__(self, service: CvsService, host: str = "127.0.0.1", port: int = 0):
        super().__init__(service.handle, host, port)
        self.service = service


def serve(cfg: CvsConfig, clock: Clock | None = None) -> CvsServer:
    """Build the service from ``cfg`` and return a bound (not yet running) server."""
    return CvsServer(build_service(cfg, clock), cfg.host, cfg.port)
