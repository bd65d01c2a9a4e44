"""Append-only JSON-lines record of every access decision."""

from __future__ import annotations

import json
import threading
from pathlib import Path

from .messages import AccessDecision, AccessRequest


def _verdict(result) -> dict | None:
    if result is None:
        return None
    return {"status": result.status.name, "reason": int(result.reason), "reasonName": result.reason.name}


def audit_record(request: AccessRequest, decision: AccessDecision) -> dict:
    return {
        "time": decision.evaluated_at.isoformat().replace("+00:00", "Z"),
        "resource": request.resource_id,
        "method": request.method,
        "clientIssuer": str(request.client_cert.issuer),
        "clientSerial": request.client_cert.serial,
        "verdict": decision.verdict.name,
        "reasons": [int(c) for c in decision.codes],
        "cvs": {"aa": _verdict(decision.cvs_verdicts.get("aa")),
                "client": _verdict(decision.cvs_verdicts.get("client"))},
    }


class AuditLog:
    """Thread-safe appender. With no path the records are only kept in memory."""

    def __init__(self, path=None):
        self.path = Path(path) if path else None
        self.records: list[dict] = []
        self._lock = threading.Lock()
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)

    def append(self, request: AccessRequest, decision: AccessDecision) -> dict:
        record = audit_record(request, decision)
        line = json.dumps(record, sort_keys=True)
        with self._lock:
            self.records.append(record)
            if self.path is not None:
                with self.path.open("a") as fh:
                    fh.write(line + "\n")
        return record

    @staticmethod
    def read(path) -> list[dict]:
        return [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]
