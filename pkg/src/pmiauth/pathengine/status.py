"""Certificate status from locally stored revocation lists."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from datetime import datetime

from ..certs import CertStore, PublicKeyInfo, RevocationList, RevokedEntry
from .results import RevocationMode


class RevocationState(enum.Enum):
    GOOD = "good"
    REVOKED = "revoked"
    UNAVAILABLE = "unavailable"


@dataclass(frozen=True)
class RevocationStatus:
    state: RevocationState
    entry: RevokedEntry | None = None
    crl: RevocationList | None = None
    warning: str = ""

    @property
    def revoked_at(self) -> datetime | None:
        return self.entry.revoked_at if self.entry else None

    @property
    def reason(self) -> int | None:
        return self.entry.reason if self.entry else None


def current_lists(lists, issuer_key: PublicKeyInfo, time: datetime) -> list[RevocationList]:
    """Lists that verify under ``issuer_key`` and are current at ``time``, in input order."""
    return [crl for crl in lists if crl.current_at(time) and crl.signed_by(issuer_key)]


def freshest(lists) -> RevocationList | None:
    """Latest thisUpdate, then latest nextUpdate; earlier position wins ties."""
    best = None
    for crl in lists:
        if best is None or (crl.this_update, crl.next_update) > (best.this_update, best.next_update):
            best = crl
    return best


def status_from_lists(serial: int, lists, issuer_key: PublicKeyInfo, time: datetime,
                      mode: RevocationMode = RevocationMode.HARD_FAIL) -> RevocationStatus:
    crl = freshest(current_lists(lists, issuer_key, time))
    if crl is None:
        if RevocationMode(mode) == RevocationMode.SOFT_FAIL:
            return RevocationStatus(RevocationState.GOOD, warning="no current revocation list")
        return RevocationStatus(RevocationState.UNAVAILABLE)
    entry = crl.lookup(serial)
    if entry is not None:
        return RevocationStatus(RevocationState.REVOKED, entry, crl)
    return RevocationStatus(RevocationState.GOOD, None, crl)


def check_revocation(cert, issuer_key: PublicKeyInfo, store: CertStore, time: datetime,
                     mode: RevocationMode = RevocationMode.HARD_FAIL) -> RevocationStatus:
    return status_from_lists(cert.serial, store.find_crls(cert.issuer), issuer_key, time, mode)
