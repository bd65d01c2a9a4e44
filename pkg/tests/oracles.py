"""
Reference implementations used as test oracles.

Nothing here calls the package's encoder, path builder or validator. The
DER writer is a separate TLV serializer, and the path oracles enumerate
issuer-linked sequences over the raw certificate list and re-check every
rule by hand.
"""

from __future__ import annotations

import hashlib
import hmac
import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

from pmiauth import der
from pmiauth.certs import (
    Name,
    PublicKeyInfo,
    RevokedEntry,
    TrustAnchorSet,
    build_certificate,
    build_revocation_list,
)
from pmiauth.certs import extensions as ext
from pmiauth.crypto import KeyPair

# --- DER ----------------------------------------------------------------------


def tag_octet(tag) -> int:
    cls_bits = 0x00 if tag.cls == der.UNIVERSAL else 0x80
    return cls_bits | (0x20 if tag.constructed else 0) | tag.number


def minimal_length(n: int) -> bytes:
    if n < 0x80:
        return bytes([n])
    body = []
    while n:
        body.insert(0, n & 0xFF)
        n >>= 8
    return bytes([0x80 | len(body)] + body)


def non_minimal_lengths(n: int) -> list[bytes]:
    """Every flavour of non-canonical length octets for ``n`` (plus indefinite)."""
    out = [b"\x80"]
    if n < 0x80:
        out += [bytes([0x81, n]), bytes([0x82, 0, n])]
    else:
        canon = minimal_length(n)
        out.append(bytes([canon[0] + 1, 0]) + canon[1:])
    return out


def reference_encode(v, override=None, path=()) -> bytes:
    """Plain TLV writer; ``override=(path, length_octets)`` swaps one node's length field."""
    if v.tag.constructed:
        body = b"".join(reference_encode(c, override, path + (i,)) for i, c in enumerate(v.content))
    else:
        body = v.content
    length = minimal_length(len(body))
    if override is not None and override[0] == path:
        length = override[1]
    return bytes([tag_octet(v.tag)]) + length + body


def node_paths(v, path=()):
    yield path
    if v.tag.constructed:
        for i, c in enumerate(v.content):
            yield from node_paths(c, path + (i,))


def node_at(v, path):
    for i in path:
        v = v.content[i]
    return v


# --- mock signatures ---------------------------------------------------------


def mock_signature(secret: bytes, message: bytes) -> bytes:
    return hashlib.sha256(secret + message).digest()


def sig_ok(record, key: PublicKeyInfo) -> bool:
    if record.signature_algorithm != key.algorithm:
        return False
    return hmac.compare_digest(mock_signature(key.key, record.tbs_bytes), record.signature.value)


# --- random small PKI worlds -------------------------------------------------

T0 = datetime(2004, 10, 6, 12, 0, 0, tzinfo=timezone.utc)
POLICIES = [der.oid("1.3.6.1.4.1.57264.99.50.%d" % i) for i in (1, 2, 3)]
UNKNOWN_EXT = der.oid("1.3.6.1.4.1.57264.99.51")


@dataclass
class World:
    target: object
    store: list  # certificates (target not included)
    crls: list
    anchors: list  # self-signed anchor certificates
    time: datetime = T0
    initial_policies: object = None  # None = ANY
    max_len: int = 8
    notes: dict = field(default_factory=dict)

    def anchor_set(self) -> TrustAnchorSet:
        return TrustAnchorSet.from_certificates(self.anchors)


def _window(rng: random.Random):
    roll = rng.random()
    if roll < 0.08:
        return T0 - timedelta(days=400), T0 - timedelta(days=1)
    if roll < 0.14:
        return T0 + timedelta(days=1), T0 + timedelta(days=400)
    if roll < 0.18:  # boundary: valid exactly at T0
        return T0 - timedelta(days=10), T0
    return T0 - timedelta(days=100), T0 + timedelta(days=100)


def _extensions(rng: random.Random, key: KeyPair, issuer_key: KeyPair, ca: bool):
    exts = []
    if ca or rng.random() < 0.3:
        path_len = rng.choice([None, None, 0, 1, 2]) if ca else None
        exts.append(ext.basic_constraints(ca, path_len))
    roll = rng.random()
    if roll < 0.6:
        exts.append(ext.key_usage("keyCertSign", "cRLSign", "digitalSignature"))
    elif roll < 0.7:
        exts.append(ext.key_usage("digitalSignature"))
    exts.append(ext.subject_key_identifier(key.public))
    if rng.random() < 0.5:
        exts.append(ext.authority_key_identifier(ext.key_identifier(issuer_key.public)))
    if rng.random() < 0.35:
        exts.append(ext.certificate_policies(rng.sample(POLICIES, rng.randint(1, 3))))
    if rng.random() < 0.05:
        exts.append(ext.Extension(UNKNOWN_EXT, True, der.encode(der.null())))
    return exts


def random_world(seed: int, max_certs: int = 10) -> World:
    """A small world: a couple of roots, several names, shared keys, loops, bad links."""
    rng = random.Random(seed)
    names = [Name.common(f"N{i}") for i in range(rng.randint(2, 5))]
    keys = [KeyPair.mock(bytes([0x40 + i]) * 8) for i in range(rng.randint(2, 5))]
    owner: list[tuple[Name, KeyPair]] = []  # (subject, key) of every certificate so far
    serial = iter(range(1, 1000))
    certs = []

    def make(subject, issuer, key, signer, ca):
        nb, na = _window(rng)
        c = build_certificate(serial=next(serial), issuer=issuer, subject=subject, not_before=nb, not_after=na,
                              public_key=PublicKeyInfo.of(key), signer=signer,
                              extensions=_extensions(rng, key, signer, ca))
        owner.append((subject, key))
        return c

    roots = []
    for i in range(rng.randint(1, 2)):
        n, k = names[i], keys[i % len(keys)]
        r = make(n, n, k, k, True)
        roots.append(r)
        certs.append(r)
    n_total = rng.randint(len(certs) + 1, max_certs)
    while len(certs) < n_total:
        subject = rng.choice(names)
        issuer = rng.choice(names)
        key = rng.choice(keys)
        issuers = [k for s, k in owner if s == issuer]
        signer = rng.choice(issuers) if issuers and rng.random() < 0.85 else rng.choice(keys)
        certs.append(make(subject, issuer, key, signer, rng.random() < 0.85))
    target = certs.pop()  # the last one issued, usually an end entity
    anchors = roots if rng.random() < 0.6 else roots[:1]
    if rng.random() < 0.3:  # anchors need not be in the store
        certs = [c for c in certs if c not in anchors]

    crls = []
    everything = certs + [target]
    for name in names:
        signers = [k for s, k in owner if s == name] or [rng.choice(keys)]
        for _ in range(rng.choice([0, 1, 1, 1, 1, 1, 1, 1, 2, 2])):
            pool = [c.serial for c in everything if c.issuer == name]
            revoked = rng.sample(pool, k=min(len(pool), rng.choice([0, 0, 0, 1])))
            roll = rng.random()
            if roll < 0.06:
                tu, nu = T0 - timedelta(days=20), T0 - timedelta(days=1)
            elif roll < 0.1:
                tu, nu = T0 + timedelta(days=1), T0 + timedelta(days=8)
            else:
                tu = T0 - timedelta(days=rng.randint(0, 3), hours=rng.randint(0, 5))
                nu = T0 + timedelta(days=rng.randint(0, 7))
            signer = rng.choice(signers) if rng.random() < 0.95 else rng.choice(keys)
            crls.append(build_revocation_list(
                issuer=name, this_update=tu, next_update=nu, signer=signer,
                entries=[RevokedEntry(s, T0 - timedelta(hours=2)) for s in revoked]))
    initial = None
    if rng.random() < 0.25:
        initial = frozenset(rng.sample(POLICIES, rng.randint(1, 2)))
    max_len = rng.choice([8, 8, 8, 3, 2])
    return World(target, certs, crls, anchors, T0, initial, max_len, {"seed": seed})


# --- path oracles ------------------------------------------------------------


def _anchor_for(cert, anchors):
    """The first configured anchor whose name matches and whose key verifies ``cert``."""
    for a in anchors:
        if a.subject == cert.issuer and sig_ok(cert, a.public_key):
            return a
    return None


def enumerate_chains(target, certs, anchors, max_len: int) -> set:
    """All acyclic issuer-linked sequences that end at the first anchor-verified certificate.

    Returns a set of (chain fingerprints, anchor fingerprint) pairs, checked
    by exhaustive extension over the raw list rather than any index.
    """
    out = set()

    def fp(c):
        return hashlib.sha256(c.der).digest()

    def extend(chain):
        anchor = _anchor_for(chain[-1], anchors)
        if anchor is not None:
            out.add((tuple(fp(c) for c in chain), fp(anchor)))
            return
        if len(chain) == max_len:
            return
        used = {fp(c) for c in chain}
        for c in certs:
            if c.subject == chain[-1].issuer and fp(c) not in used:
                extend(chain + [c])

    extend([target])
    return out


def _current_crl(crls, issuer, key, t):
    best = None
    for crl in crls:
        if crl.issuer == issuer and crl.this_update <= t <= crl.next_update and sig_ok(crl, key):
            if best is None or (crl.this_update, crl.next_update) > (best.this_update, best.next_update):
                best = crl
    return best


def chain_passes(chain, anchor, crls, t, initial_policies) -> bool:
    """Every validation rule, checked directly on one concrete chain."""
    key = anchor.public_key
    policies = initial_policies  # None = ANY
    for i in range(len(chain) - 1, -1, -1):
        c = chain[i]
        if not sig_ok(c, key):
            return False
        if not (c.not_before <= t <= c.not_after):
            return False
        crl = _current_crl(crls, c.issuer, key, t)
        if crl is None or any(e.serial == c.serial for e in crl.entries):
            return False
        if c.policies is not None and ext.ANY_POLICY not in c.policies:
            cert_set = frozenset(c.policies)
            policies = cert_set if policies is None else policies & cert_set
        if i > 0:
            if not c.basic_constraints.ca:
                return False
            if c.basic_constraints.path_len is not None and i - 1 > c.basic_constraints.path_len:
                return False
            if c.key_usage is not None and "keyCertSign" not in c.key_usage:
                return False
        if c.unknown_critical:
            return False
        key = c.public_key
    if initial_policies is not None and not policies:
        return False
    return True


def oracle_valid(world: World) -> bool:
    by_fp = {hashlib.sha256(c.der).digest(): c for c in world.store + [world.target] + world.anchors}
    for chain_fps, anchor_fp in enumerate_chains(world.target, world.store, world.anchors, world.max_len):
        chain = [by_fp[f] for f in chain_fps]
        if chain_passes(chain, by_fp[anchor_fp], world.crls, world.time, world.initial_policies):
            return True
    return False
