"""CVS response cache.

Requests that carry an explicit validation time are deterministic over
the server's fixed store, so their verdicts are kept without expiry.
Clock-timed requests only cache VALID verdicts, and only for the window
in which nothing the verdict depends on can change: every chain
certificate still inside its validity period, every revocation list of a
chain issuer still current, and no newer list yet in force.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from datetime import datetime, timedelta

from .. import der
from ..certs import CertStore
from ..crypto import digest
from ..pathengine import PathValidationResult, Status
from .messages import ValidationRequest

_ONE_SECOND = timedelta(seconds=1)


def cache_key(req: ValidationRequest) -> bytes:
    parts = [der.octet_string(req.target.der)]
    if req.anchors is not None:
        parts.append(der.explicit(0, der.sequence(*(der.octet_string(d) for d in sorted(a.der for a in req.anchors)))))
    if req.intermediates is not None:
        parts.append(der.explicit(1, der.sequence(*(der.octet_string(d) for d in sorted(c.der for c in req.intermediates)))))
    if req.policy_set is not None:
        parts.append(der.explicit(2, der.sequence(*(der.object_identifier(p) for p in sorted(set(req.policy_set))))))
    if req.validation_time is not None:
        parts.append(der.explicit(3, der.encode_time(req.validation_time)))
    return digest(der.encode(der.sequence(*parts)))


def verdict_expiry(result: PathValidationResult, store: CertStore, at: datetime) -> datetime:
    """First instant at which a cached clock-timed VALID verdict may no longer hold."""
    bounds = []
    for cert in result.chain:
        bounds.append(cert.not_after + _ONE_SECOND)
        for crl in store.find_crls(cert.issuer):
            if crl.this_update > at:
                bounds.append(crl.this_update)
            elif crl.next_update >= at:
                bounds.append(crl.next_update + _ONE_SECOND)
    return min(bounds) if bounds else at


@dataclass(frozen=True)
class CacheEntry:
    result: PathValidationResult
    computed_at: datetime
    expires: datetime | None  # exclusive; None = never

    def fresh(self, now: datetime) -> bool:
        if self.expires is None:
            return True
        return self.computed_at <= now < self.expires


class ResponseCache:
    def __init__(self):
        self._entries: dict[bytes, CacheEntry] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key: bytes, now: datetime) -> PathValidationResult | None:
        with self._lock:
            entry = self._entries.get(key)
            if entry is not None and not entry.fresh(now):
                if entry.expires is not None and now >= entry.expires:
                    del self._entries[key]
                entry = None
            if entry is None:
                self.misses += 1
                return None
            self.hits += 1
            return entry.result

    def store(self, req: ValidationRequest, key: bytes, result: PathValidationResult,
              snapshot: CertStore, at: datetime) -> bool:
        """Remember ``result`` if it is cacheable; returns whether it was kept."""
        if req.validation_time is not None:
            entry = CacheEntry(result, at, None)
        elif result.status == Status.VALID:
            entry = CacheEntry(result, at, verdict_expiry(result, snapshot, at))
        else:
            return False
        with self._lock:
            self._entries[key] = entry
        return True

    def __len__(self):
        with self._lock:
            return len(self._entries)

    def clear(self):
        with self._lock:
            self._entries.clear()
