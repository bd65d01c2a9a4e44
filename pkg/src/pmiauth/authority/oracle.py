"""
Reference decisions for a generated scenario.

This is a deliberately plain second implementation of the decision rules.
It reads the scenario directory itself (policy JSON included) and uses only
record parsing and raw signature verification, never the path engine or
the verifier, so agreement between the two is evidence rather than echo.

It relies on scenario worlds having unique subject names, which lets it
follow issuers by name instead of searching.
"""

from __future__ import annotations

import json
from datetime import datetime
from pathlib import Path

from ..certs import parse_attribute_certificate, parse_certificate, parse_revocation_list
from ..certs import extensions as ext
from ..crypto import verify
from ..der import oid, parse_time

ROLE_NAMES = {"role": "2.5.4.72", "clearance": "2.5.4.55"}
VERIFIER_PROCESSED = {str(ext.TARGET_INFORMATION), str(ext.NO_REV_AVAIL), str(ext.AUTHORITY_KEY_IDENTIFIER)}
MAX_CHAIN = 8


def _sig_ok(record, key) -> bool:
    if record.signature_algorithm != key.algorithm:
        return False
    return verify(key.key, record.signature_algorithm, record.tbs_bytes, record.signature)


def _current_list(lists, issuer, key, t):
    best = None
    for crl in lists:
        if crl.issuer != issuer or not _sig_ok(crl, key):
            continue
        if not (crl.this_update <= t <= crl.next_update):
            continue
        if best is None or (crl.this_update, crl.next_update) > (best.this_update, best.next_update):
            best = crl
    return best


def chain_reason(cert, anchors: dict, certs: dict, crls: list, t: datetime) -> int:
    """Path reason code for ``cert`` (0 = valid) by walking issuer names."""
    chain = [cert]
    while chain[-1].issuer not in anchors:
        nxt = certs.get(chain[-1].issuer)
        if nxt is None or nxt in chain:
            return 1
        chain.append(nxt)
        if len(chain) > MAX_CHAIN:
            return 11
    key = anchors[chain[-1].issuer]
    for i, c in enumerate(reversed(chain)):
        if not _sig_ok(c, key):
            return 2
        if t < c.not_before:
            return 4
        if t > c.not_after:
            return 3
        crl = _current_list(crls, c.issuer, key, t)
        if crl is None:
            return 6
        if any(e.serial == c.serial for e in crl.entries):
            return 5
        if i < len(chain) - 1:
            if not c.basic_constraints.ca:
                return 7
            if c.key_usage is not None and "keyCertSign" not in c.key_usage:
                return 8
        if c.unknown_critical:
            return 10
        key = c.public_key
    return 0


def _minutes(hhmm: str) -> int:
    h, m = hhmm.split(":")
    return int(h) * 60 + int(m)


def decide(world: dict, client: str, rule: dict, t: datetime) -> tuple[list[int], int | None]:
    """Expected reason codes and, for chain failures, the path reason."""
    pkc, ac = world["clients"][client]
    certs, crls, policy = world["certs"], world["crls"], world["policy"]

    aa = [c for c in world["aa_directory"] if c.subject == ac.issuer]
    if not aa:
        return [21], 1
    aa = aa[0]
    r = chain_reason(aa, world["aa_anchors"], certs, crls, t)
    if r:
        return [21], r
    if not _sig_ok(ac, aa.public_key):
        return [22], None
    r = chain_reason(pkc, world["pkc_anchors"], certs, crls, t)
    if r:
        return [20], r
    if ac.holder.issuer != pkc.issuer or ac.holder.serial != pkc.serial:
        return [26], None
    if ac.extension(ext.NO_REV_AVAIL) is None:
        acrl = _current_list(world["acrls"], ac.issuer, aa.public_key, t)
        if acrl is None or any(e.serial == ac.serial for e in acrl.entries):
            return [23], None
    if t < ac.not_before:
        return [25], None
    if t > ac.not_after:
        return [24], None

    codes = []
    recognized = set(policy.get("recognizedCriticalExtensions", [])) | VERIFIER_PROCESSED
    if any(e.critical and str(e.oid) not in recognized for e in ac.extensions):
        codes.append(27)
    targets = ac.targets
    if targets is not None and policy["serviceName"] not in targets:
        codes.append(28)
    for req in rule.get("requiredAttributes", []):
        attr = oid(ROLE_NAMES.get(req["type"], req["type"]))
        held = {v for a in ac.attributes if a.type == attr for v in a.values}
        wanted = req["acceptedValues"]
        if req.get("matchMode", "any") == "all":
            ok = all(v in held for v in wanted)
        else:
            ok = any(v in held for v in wanted)
        if not ok:
            codes.append(29)
            break
    window = rule.get("timeWindow")
    if window:
        now = t.hour * 60 + t.minute
        if not (_minutes(window["from"]) <= now < _minutes(window["to"])):
            codes.append(30)
    return codes or [0], None


def load_world(directory) -> dict:
    root = Path(directory)
    policy = json.loads((root / "policy.json").read_text())

    def cert(rel):
        return parse_certificate((root / rel).read_bytes())

    certs = {}
    for p in sorted((root / "store" / "certs").glob("*.der")):
        c = parse_certificate(p.read_bytes())
        certs[c.subject] = c
    crls = [parse_revocation_list(p.read_bytes()) for p in sorted((root / "store" / "crls").glob("*.der"))]
    clients = {}
    for folder in sorted((root / "clients").iterdir()):
        clients[folder.name] = (parse_certificate((folder / "pkc.der").read_bytes()),
                                parse_attribute_certificate((folder / "ac.der").read_bytes()))
    anchors = {}
    for kind in ("pkcAnchors", "aaAnchors"):
        anchors[kind] = {c.subject: c.public_key for c in (cert(p) for p in policy[kind])}
    return {
        "policy": policy,
        "certs": certs,
        "crls": crls,
        "acrls": [parse_revocation_list((root / p).read_bytes()) for p in policy.get("acrlSource", [])],
        "aa_directory": [cert(p) for p in policy.get("aaDirectory", [])],
        "pkc_anchors": anchors["pkcAnchors"],
        "aa_anchors": anchors["aaAnchors"],
        "clients": clients,
    }


def oracle_manifest(directory) -> list[dict]:
    root = Path(directory)
    spec = json.loads((root / "scenario.json").read_text())
    t = parse_time(spec["clockAt"])
    world = load_world(root)
    resources = spec.get("resources", [])
    out = []
    for c in spec.get("clients", []):
        own = c.get("resource") or (resources[0]["resourceId"] if resources else None)
        for rule in resources:
            codes, path_reason = decide(world, c["name"], rule, t)
            out.append({
                "client": c["name"],
                "resource": rule["resourceId"],
                "method": (rule.get("methods") or ["GET"])[0],
                "verdict": "PERMIT" if codes == [0] else "DENY",
                "reasons": codes,
                "pathReason": path_reason,
                "row": rule["resourceId"] == own,
            })
    return out
