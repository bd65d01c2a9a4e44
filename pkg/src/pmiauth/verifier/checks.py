"""
The verifier's checks on a presented attribute certificate.

Formal validity stops at the first failure, since nothing after a broken
chain or signature means anything. Service validity runs all of its
checks and reports every failure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime

from ..certs import AttributeCertificate, PublicKeyCertificate
from ..certs import extensions as ext
from ..pathengine import PathValidationResult, RevocationState, Status
from ..pathengine.status import status_from_lists
from .cvs import CvsBackend
from .messages import OK, DecisionCode, DecisionReason
from .policy import PrivilegePolicy, ResourceRule

# extensions the verifier itself evaluates, so they may be critical
PROCESSED_AC_EXTENSIONS = frozenset({ext.TARGET_INFORMATION, ext.NO_REV_AVAIL, ext.AUTHORITY_KEY_IDENTIFIER})


@dataclass
class FormalResult:
    reasons: list[DecisionReason]
    cvs_verdicts: dict = field(default_factory=dict)  # "aa" / "client" -> PathValidationResult
    aa_cert: PublicKeyCertificate | None = None

    @property
    def ok(self) -> bool:
        return self.reasons == [OK]


def resolve_aa(ac: AttributeCertificate, policy: PrivilegePolicy,
               presented: PublicKeyCertificate | None = None) -> PublicKeyCertificate | None:
    """The directory certificate for the AC's issuer.

    A presented certificate only counts when it is byte-identical to a
    directory entry, so a client cannot introduce its own AA.
    """
    candidates = [c for c in policy.aa_directory if c.subject == ac.issuer]
    if presented is not None:
        same = [c for c in candidates if c.fingerprint == presented.fingerprint]
        if same:
            return same[0]
    aki = ac.authority_key_id
    candidates.sort(key=lambda c: (not (aki is not None and c.subject_key_id == aki),
                                   -c.not_after.timestamp(), c.serial))
    return candidates[0] if candidates else None


def _chain_failure(result: PathValidationResult, code: DecisionCode, what: str) -> DecisionReason:
    if result.status == Status.UNKNOWN:
        return DecisionReason(DecisionCode.CVS_UNAVAILABLE, f"{what}: {result.detail or 'no answer'}")
    text = f"{int(result.reason)} {result.reason.name}"
    return DecisionReason(code, f"{text}: {result.detail}" if result.detail else text)


def check_formal_validity(ac: AttributeCertificate, client_cert: PublicKeyCertificate, policy: PrivilegePolicy,
                          at: datetime, cvs: CvsBackend,
                          presented_aa: PublicKeyCertificate | None = None) -> FormalResult:
    out = FormalResult([])

    def fail(code, detail=""):
        out.reasons.append(DecisionReason(code, detail))
        return out

    # 1. locate the AA's certificate
    aa = resolve_aa(ac, policy, presented_aa)
    if aa is None:
        return fail(DecisionCode.AA_PKC_INVALID, f"1 NO_PATH: no certificate for {ac.issuer} in the AA directory")
    out.aa_cert = aa

    # 2. the AA's own chain
    res = cvs.validate(aa, policy.aa_anchors, at, policy.revocation_mode)
    out.cvs_verdicts["aa"] = res
    if not res.valid:
        out.reasons.append(_chain_failure(res, DecisionCode.AA_PKC_INVALID, "AA chain"))
        return out

    # 3. the AA's signature on the AC
    if not ac.signed_by(aa.public_key):
        return fail(DecisionCode.AC_SIGNATURE_INVALID, f"signature does not verify under {aa.subject}")

    # 4. the client's chain
    res = cvs.validate(client_cert, policy.pkc_anchors, at, policy.revocation_mode)
    out.cvs_verdicts["client"] = res
    if not res.valid:
        out.reasons.append(_chain_failure(res, DecisionCode.CLIENT_PKC_INVALID, "client chain"))
        return out

    # 5. holder binding
    if not ac.holder.matches(client_cert):
        return fail(DecisionCode.HOLDER_MISMATCH,
                    f"AC holder is {ac.holder.issuer} #{ac.holder.serial}, "
                    f"client is {client_cert.issuer} #{client_cert.serial}")

    # 6. attribute revocation, from local lists only
    if not ac.no_rev_avail:
        lists = [crl for crl in policy.acrl_source if crl.issuer == ac.issuer]
        rs = status_from_lists(ac.serial, lists, aa.public_key, at, policy.revocation_mode)
        if rs.state == RevocationState.REVOKED:
            return fail(DecisionCode.AC_REVOKED, f"serial {ac.serial} revoked at {rs.revoked_at}")
        if rs.state == RevocationState.UNAVAILABLE:
            return fail(DecisionCode.AC_REVOKED, f"revocation status unavailable: no current list from {ac.issuer}")

    # 7. AC validity period
    if at < ac.not_before:
        return fail(DecisionCode.AC_NOT_YET_VALID, f"valid from {ac.not_before}")
    if at > ac.not_after:
        return fail(DecisionCode.AC_EXPIRED, f"expired {ac.not_after}")

    out.reasons.append(OK)
    return out


def check_service_validity(ac: AttributeCertificate, policy: PrivilegePolicy,
                           rule: ResourceRule) -> list[DecisionReason]:
    reasons = []
    recognized = policy.recognized_critical_extensions | PROCESSED_AC_EXTENSIONS
    unknown = [o for o in ac.critical_oids if o not in recognized]
    if unknown:
        reasons.append(DecisionReason(DecisionCode.UNKNOWN_CRITICAL_AC_EXT,
                                      ", ".join(str(o) for o in unknown)))
    targets = ac.targets
    if targets is not None and policy.service_name not in targets:
        reasons.append(DecisionReason(DecisionCode.TARGET_MISMATCH,
                                      f"AC targets {', '.join(targets) or 'nothing'}, not {policy.service_name}"))
    missing = [req for req in rule.required_attributes if not req.satisfied_by(ac)]
    if missing:
        parts = [f"{r.type} needs {r.match_mode.value} of {{{', '.join(r.accepted_values)}}}" for r in missing]
        reasons.append(DecisionReason(DecisionCode.ATTRIBUTES_INSUFFICIENT, "; ".join(parts)))
    return reasons or [OK]


def evaluate_environment(rule: ResourceRule, at: datetime) -> DecisionReason:
    window = rule.time_window
    if window is None or window.contains(at):
        return OK
    return DecisionReason(DecisionCode.ENV_WINDOW, f"{at:%H:%M} UTC is outside {window}")
