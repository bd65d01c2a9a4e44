"""Forward path construction: from the target toward a trust anchor."""

from __future__ import annotations

from dataclasses import dataclass

from ..certs import CertStore, PublicKeyCertificate, TrustAnchor, TrustAnchorSet

PROBE_LIMIT = 32


@dataclass(frozen=True)
class CandidatePath:
    chain: tuple  # target first; last element is issued by ``anchor``
    anchor: TrustAnchor


def terminating_anchor(cert: PublicKeyCertificate, anchors: TrustAnchorSet) -> TrustAnchor | None:
    for anchor in anchors.matching(cert.issuer):
        if cert.signed_by(anchor.public_key):
            return anchor
    return None


def build_path(target: PublicKeyCertificate, store: CertStore, anchors: TrustAnchorSet,
               max_len: int = 8) -> list[CandidatePath]:
    """Every acyclic issuer-linked chain of at most ``max_len`` certificates.

    Depth-first, candidates tried in the store's issuer ordering. A branch
    ends as soon as its last certificate is signed by a matching anchor.
    """
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    found: list[CandidatePath] = []
    _walk([target], {target.fingerprint}, store, anchors, max_len, found, first_only=False)
    return found


def path_exists(target, store, anchors, max_len: int = PROBE_LIMIT) -> bool:
    found: list[CandidatePath] = []
    _walk([target], {target.fingerprint}, store, anchors, max_len, found, first_only=True)
    return bool(found)


def _walk(chain, seen, store, anchors, max_len, found, first_only) -> bool:
    current = chain[-1]
    anchor = terminating_anchor(current, anchors)
    if anchor is not None:
        found.append(CandidatePath(tuple(chain), anchor))
        return first_only
    if len(chain) >= max_len:
        return False
    for issuer in store.find_issuer_candidates(current):
        if issuer.fingerprint in seen:
            continue
        chain.append(issuer)
        seen.add(issuer.fingerprint)
        stop = _walk(chain, seen, store, anchors, max_len, found, first_only)
        seen.discard(issuer.fingerprint)
        chain.pop()
        if stop:
            return True
    return False
