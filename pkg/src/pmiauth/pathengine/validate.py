"""
Path validation: initialization, per-certificate basic checking,
preparation for the next certificate, and wrap-up.

Per certificate the checks run in a fixed order (signature, validity
window, revocation, issuer name, policy) followed, for every certificate
except the target, by the CA preparation checks and finally the
unknown-critical-extension check. The first failure is reported.
"""

from __future__ import annotations

import logging

from ..certs import CertStore, PublicKeyCertificate, TrustAnchor
from .build import build_path, path_exists
from .policy import as_oid_list, intersect_policies
from .results import (
    ANY,
    PathValidationResult,
    ReasonCode,
    Status,
    ValidationOptions,
    invalid,
)
from .status import RevocationState, check_revocation

log = logging.getLogger(__name__)


def validate_path(chain, anchor: TrustAnchor, options: ValidationOptions,
                  store: CertStore | None = None) -> PathValidationResult:
    chain = tuple(chain)
    store = store if store is not None else CertStore()
    t = options.time()
    base = dict(chain=chain, anchor_name=anchor.name, validated_at=t)
    if not chain:
        return invalid(ReasonCode.NO_PATH, "empty chain", validated_at=t)
    if len(chain) > options.max_path_length:
        return invalid(ReasonCode.PATH_TOO_LONG, f"{len(chain)} > {options.max_path_length}", **base)

    # initialization
    working_key = anchor.public_key
    working_name = anchor.name
    policies = options.initial_policy_set
    budget = None  # remaining CA certificates allowed below, from pathLenConstraint
    warnings = []
    crls = []
    n = len(chain)

    for depth, cert in enumerate(reversed(chain)):
        where = f"{cert.subject} (serial {cert.serial})"
        is_target = depth == n - 1

        # basic certificate checking
        if not cert.signed_by(working_key):
            return invalid(ReasonCode.SIGNATURE_INVALID, f"signature on {where} does not verify", crls=tuple(crls), **base)
        if t < cert.not_before:
            return invalid(ReasonCode.NOT_YET_VALID, f"{where} not valid before {cert.not_before}", crls=tuple(crls), **base)
        if t > cert.not_after:
            return invalid(ReasonCode.EXPIRED, f"{where} expired {cert.not_after}", crls=tuple(crls), **base)
        rs = check_revocation(cert, working_key, store, t, options.revocation_mode)
        if rs.crl is not None:
            crls.append(rs.crl)
        if rs.state == RevocationState.REVOKED:
            return invalid(ReasonCode.REVOKED, f"{where} revoked at {rs.revoked_at}", crls=tuple(crls), **base)
        if rs.state == RevocationState.UNAVAILABLE:
            return invalid(ReasonCode.REVOCATION_UNAVAILABLE, f"no current revocation list from {cert.issuer}",
                           crls=tuple(crls), **base)
        if rs.warning:
            warnings.append(f"{where}: {rs.warning}")
        if cert.issuer != working_name:
            return invalid(ReasonCode.NAME_CHAIN_BROKEN, f"{where} issuer is {cert.issuer}, expected {working_name}",
                           crls=tuple(crls), **base)
        policies = intersect_policies(policies, cert.policies)

        # preparation for the next certificate
        if not is_target:
            bc = cert.basic_constraints
            if not bc.ca:
                return invalid(ReasonCode.BASIC_CONSTRAINTS, f"{where} is not a CA", crls=tuple(crls), **base)
            if budget is not None:
                if budget <= 0:
                    return invalid(ReasonCode.BASIC_CONSTRAINTS, f"{where} exceeds an issuer's pathLenConstraint",
                                   crls=tuple(crls), **base)
                budget -= 1
            if bc.path_len is not None and (budget is None or bc.path_len < budget):
                budget = bc.path_len
            ku = cert.key_usage
            if ku is not None and "keyCertSign" not in ku:
                return invalid(ReasonCode.KEY_USAGE, f"{where} lacks keyCertSign", crls=tuple(crls), **base)
        if cert.unknown_critical:
            oids = ", ".join(str(o) for o in cert.unknown_critical)
            return invalid(ReasonCode.UNKNOWN_CRITICAL_EXT, f"{where} has unknown critical extension {oids}",
                           crls=tuple(crls), **base)

        working_key = cert.public_key
        working_name = cert.subject

    # wrap-up
    if options.initial_policy_set is not ANY and policies is not ANY and not policies:
        return invalid(ReasonCode.POLICY_EMPTY, "no acceptable policy survives the path", crls=tuple(crls), **base)
    return PathValidationResult(Status.VALID, ReasonCode.OK, surviving_policies=as_oid_list(policies),
                                warnings=tuple(warnings), crls=tuple(crls), **base)


def validate_pkc(target: PublicKeyCertificate, store: CertStore,
                 options: ValidationOptions) -> PathValidationResult:
    """Build candidate paths and return the first that validates.

    Without a valid candidate, the first candidate's failure is returned,
    or NO_PATH / PATH_TOO_LONG when construction found nothing.
    """
    if options.validation_time is None:
        # pin the time once so every candidate sees the same instant
        options = ValidationOptions(options.anchors, options.clock.now(), options.initial_policy_set,
                                    options.max_path_length, options.revocation_mode, options.clock)
    t = options.validation_time
    candidates = build_path(target, store, options.anchors, options.max_path_length)
    if not candidates:
        if options.anchors and path_exists(target, store, options.anchors):
            return invalid(ReasonCode.PATH_TOO_LONG, f"no path within {options.max_path_length} certificates",
                           validated_at=t)
        return invalid(ReasonCode.NO_PATH, f"no path from {target.subject} to a trust anchor", validated_at=t)
    first = None
    for cand in candidates:
        result = validate_path(cand.chain, cand.anchor, options, store)
        log.debug("candidate of length %d: %s", len(cand.chain), result.describe())
        if result.valid:
            return result
        if first is None:
            first = result
    return first
