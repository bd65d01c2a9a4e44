"""
Privilege verifier gateway: framed AccessRequest in (type 0x11), signed
AccessDecision out (type 0x12).
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass
from pathlib import Path

from ..certs import Name, PublicKeyInfo
from ..crypto import KeyPair
from ..der import parse_time
from ..errors import DerError, PmiError, ProfileViolation, ProtocolViolation
from ..pathengine import Clock, FixedClock, SystemClock
from ..wire import ErrorReason, FrameServer, MsgType, SignedEnvelope, exchange, load_key_file
from .audit import AuditLog
from .cvs import CvsBackend, RemoteCvs
from .decision import verify_access
from .messages import AccessDecision, AccessRequest
from .policy import PrivilegePolicy

log = logging.getLogger(__name__)


@dataclass
class GatewayConfig:
    host: str = "127.0.0.1"
    port: int = 7002
    policy: str = "policy.json"
    key_file: str | None = None
    audit_log: str | None = None
    clock: str | None = None

    @classmethod
    def load(cls, path) -> "GatewayConfig":
        path = Path(path)
        data = json.loads(path.read_text())
        host, _, port = data.pop("listen", "127.0.0.1:7002").rpartition(":")
        cfg = cls(host=host or "127.0.0.1", port=int(port), **data)
        base = path.parent
        cfg.policy = str(base / cfg.policy)
        cfg.key_file = str(base / cfg.key_file) if cfg.key_file else None
        cfg.audit_log = str(base / cfg.audit_log) if cfg.audit_log else None
        return cfg


class GatewayService:
    def __init__(self, policy: PrivilegePolicy, cvs: CvsBackend, clock: Clock | None = None,
                 audit: AuditLog | None = None, key: KeyPair | None = None, name: Name | None = None):
        self._policy = policy
        self._lock = threading.Lock()
        self.cvs = cvs
        self.clock = clock or SystemClock()
        self.audit = audit if audit is not None else AuditLog()
        self.key = key
        self.name = name

    @property
    def policy(self) -> PrivilegePolicy:
        with self._lock:
            return self._policy

    def reload(self, policy: PrivilegePolicy) -> None:
        """Swap in a new policy; requests already running keep the old one."""
        with self._lock:
            self._policy = policy

    def decide(self, request: AccessRequest) -> AccessDecision:
        return verify_access(request, self.policy, self.cvs, self.clock, self.audit)

    def handle(self, msg_type: int, payload: bytes) -> tuple[int, bytes]:
        if msg_type != MsgType.ACCESS_REQUEST:
            return MsgType.ERROR, bytes([ErrorReason.BAD_TYPE])
        try:
            request = AccessRequest.decode(payload)
        except (DerError, ProfileViolation, PmiError, ValueError) as exc:
            log.info("malformed access request: %s", exc)
            return MsgType.ERROR, bytes([ErrorReason.BAD_MESSAGE])
        try:
            decision = self.decide(request)
        except Exception:
            log.exception("internal error while deciding")
            return MsgType.ERROR, bytes([ErrorReason.INTERNAL])
        reply = SignedEnvelope.seal(decision.encode(), self.key, self.name)
        return MsgType.ACCESS_RESPONSE, reply.encode()


class GatewayServer(FrameServer):
    def __init__(self, service: GatewayService, host: str = "127.0.0.1", port: int = 0):
        super().__init__(service.handle, host, port)
        self.service = service


def build_gateway(cfg: GatewayConfig, clock: Clock | None = None, cvs: CvsBackend | None = None) -> GatewayService:
    policy = PrivilegePolicy.load(cfg.policy)
    if cvs is None:
        if policy.cvs_endpoint is None:
            raise PmiError("policy has no cvsEndpoint and no CVS backend was supplied")
        cvs = RemoteCvs(policy.cvs_endpoint)
    if clock is None:
        clock = FixedClock(parse_time(cfg.clock)) if cfg.clock else SystemClock()
    key = name = None
    if cfg.key_file:
        kf = load_key_file(cfg.key_file)
        key, name = kf.key, kf.name
    return GatewayService(policy, cvs, clock, AuditLog(cfg.audit_log), key, name)


def serve_gateway(cfg: GatewayConfig, clock: Clock | None = None, cvs: CvsBackend | None = None) -> GatewayServer:
    """Build the gateway from ``cfg`` and return a bound (not yet running) server."""
    return GatewayServer(build_gateway(cfg, clock, cvs), cfg.host, cfg.port)


def request_access(host: str, port: int, request: AccessRequest, timeout: float = 5.0,
                   gateway: tuple[Name, PublicKeyInfo] | None = None) -> AccessDecision:
    """Client side of the gateway protocol. Checks the reply signature when ``gateway`` is given."""
    msg_type, payload = exchange(host, port, MsgType.ACCESS_REQUEST, request.encode(), timeout)
    if msg_type == MsgType.ERROR:
        raise ProtocolViolation(f"gateway returned error {payload[:1].hex()}")
    if msg_type != MsgType.ACCESS_RESPONSE:
        raise ProtocolViolation(f"unexpected message type {msg_type:#04x}")
    envelope = SignedEnvelope.decode(payload)
    body = envelope.open({gateway[0]: gateway[1]}) if gateway else envelope.body
    return AccessDecision.decode(body)
