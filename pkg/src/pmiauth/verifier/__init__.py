"""Privilege verifier: AC checks, policy evaluation and the access gateway."""

from .audit import AuditLog, audit_record
from .checks import FormalResult, check_formal_validity, check_service_validity, evaluate_environment, resolve_aa
from .cvs import CvsBackend, LocalCvs, RemoteCvs
from .decision import verify_access
from .gateway import GatewayConfig, GatewayServer, GatewayService, build_gateway, request_access, serve_gateway
from .messages import OK, AccessDecision, AccessRequest, DecisionCode, DecisionReason, Verdict
from .policy import (
    MatchMode,
    PrivilegePolicy,
    RequiredAttribute,
    ResourceRule,
    TimeWindow,
    attribute_oid,
)
