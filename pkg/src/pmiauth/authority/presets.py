"""Built-in scenario specifications, in the same shape as a scenario JSON file."""

from __future__ import annotations

import copy

from .issuer import PRIVATE_CRITICAL_EXT

CLOCK = "2004-10-06T12:00:00Z"
SERVICE = "web-01"

RESOURCE = {
    "resourceId": "/resource.htm",
    "methods": ["GET"],
    "requiredAttributes": [{"type": "role", "acceptedValues": ["staff", "admin"], "matchMode": "any"}],
}
NIGHT_RESOURCE = {
    "resourceId": "/night.htm",
    "methods": ["GET"],
    "requiredAttributes": [{"type": "role", "acceptedValues": ["staff", "admin"], "matchMode": "any"}],
    "timeWindow": {"from": "20:00", "to": "23:00"},
}

FIGURE1 = {
    "name": "figure1",
    "clockAt": CLOCK,
    "serviceName": SERVICE,
    "cas": [{"name": "CA1", "chainDepth": 1}, {"name": "CA2", "chainDepth": 1}],
    "aas": [{"name": "AA", "issuingCA": "CA2"}],
    "clients": [
        {"name": "client", "issuingCA": "CA1", "acFrom": "AA",
         "attributes": {"role": ["staff"]}, "targets": [SERVICE]},
    ],
    "revocations": [],
    "resources": [RESOURCE],
}

CHAIN4 = {
    "name": "chain4",
    "clockAt": CLOCK,
    "serviceName": SERVICE,
    # root CA1 plus three intermediates; the client's path is four certificates long
    "cas": [{"name": "CA1", "chainDepth": 4}, {"name": "CA2", "chainDepth": 1}],
    "aas": [{"name": "AA", "issuingCA": "CA2"}],
    "clients": [
        {"name": "client", "issuingCA": "CA1", "acFrom": "AA", "attributes": {"role": ["staff"]}},
    ],
    "revocations": [],
    "resources": [RESOURCE],
}


def _row(name, **extra):
    client = {"name": name, "issuingCA": "CA1", "acFrom": "AA", "attributes": {"role": ["staff"]},
              "targets": [SERVICE], "resource": "/resource.htm"}
    client.update(extra)
    return client


DENY_MATRIX = {
    "name": "deny-matrix",
    "clockAt": CLOCK,
    "serviceName": SERVICE,
    "cas": [{"name": "CA1", "chainDepth": 1}, {"name": "CA2", "chainDepth": 1}],
    "aas": [
        {"name": "AA", "issuingCA": "CA2"},
        # an AA whose own certificate lapsed the day before the scenario clock
        {"name": "AA-lapsed", "issuingCA": "CA2", "notBefore": "-365d", "notAfter": "-1d"},
    ],
    "clients": [
        _row("ok"),
        _row("expired-pkc", acFrom="AA-lapsed"),
        _row("revoked-pkc"),
        _row("revoked-ac"),
        _row("expired-ac", validity={"ac": ["-60d", "-1d"]}),
        _row("wrong-target", targets=["printer-01"]),
        _row("unknown-crit", criticalExtensions=[str(PRIVATE_CRITICAL_EXT)]),
        _row("insufficient-attrs", attributes={"role": ["guest"]}),
        _row("outside-window", resource="/night.htm"),
    ],
    "revocations": [
        {"kind": "pkc", "target": "revoked-pkc", "at": "-1h"},
        {"kind": "ac", "target": "revoked-ac", "at": "-1h"},
    ],
    "resources": [RESOURCE, NIGHT_RESOURCE],
}

PRESETS = {spec["name"]: spec for spec in (FIGURE1, CHAIN4, DENY_MATRIX)}


def preset(name: str) -> dict:
    """A private copy of the named preset, safe to modify."""
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
