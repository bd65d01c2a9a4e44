"""Access decisions. Nothing is cached between requests: both chains are
validated afresh every time, so a revoked identity certificate takes
effect on the very next request."""

from __future__ import annotations

import logging

from ..pathengine import Clock
from .audit import AuditLog
from .checks import check_formal_validity, check_service_validity, evaluate_environment
from .cvs import CvsBackend
from .messages import OK, AccessDecision, AccessRequest, DecisionCode, DecisionReason
from .policy import PrivilegePolicy

log = logging.getLogger(__name__)


def verify_access(request: AccessRequest, policy: PrivilegePolicy, cvs: CvsBackend, clock: Clock,
                  audit: AuditLog | None = None) -> AccessDecision:
    """Decide one request. ``presentedAt`` is informational; the verifier's clock rules."""
    at = clock.now()
    decision = _decide(request, policy, cvs, at)
    log.info("%s %s by %s #%d: %s", request.method, request.resource_id, request.client_cert.subject,
             request.client_cert.serial, decision.describe())
    if audit is not None:
        audit.append(request, decision)
    return decision


def _decide(request: AccessRequest, policy: PrivilegePolicy, cvs: CvsBackend, at) -> AccessDecision:
    rule = policy.rule_for(request.resource_id)
    if rule is None or not rule.allows_method(request.method):
        what = "unknown resource" if rule is None else f"method {request.method} not allowed"
        return AccessDecision.deny([DecisionReason(DecisionCode.UNKNOWN_RESOURCE,
                                                   f"{what}: {request.resource_id}")], at)

    formal = check_formal_validity(request.client_ac, request.client_cert, policy, at, cvs, request.aa_cert)
    if not formal.ok:
        return AccessDecision.deny(formal.reasons, at, formal.cvs_verdicts)

    reasons = [r for r in check_service_validity(request.client_ac, policy, rule) if r != OK]
    env = evaluate_environment(rule, at)
    if env != OK:
        reasons.append(env)
    if reasons:
        return AccessDecision.deny(reasons, at, formal.cvs_verdicts)
    return AccessDecision.permit(at, formal.cvs_verdicts)
