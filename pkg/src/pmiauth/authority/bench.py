"""
Timing harness shaped like the original prototype's results table.

The reference column holds the published 2004 figures for orientation only;
nothing here asserts on wall-clock values.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import os
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

from ..pathengine import FixedClock, ValidationOptions, validate_pkc
from ..verifier import (
    AuditLog,
    GatewayServer,
    GatewayService,
    LocalCvs,
    RemoteCvs,
    check_service_validity,
    request_access,
)
from ..wire import CvsServer, CvsService, SignedEnvelope, ValidationRequest, ValidationResponse, new_request_id
from .presets import preset
from .scenario import Scenario, generate_scenario


@dataclass(frozen=True)
class BenchRow:
    operation: str
    payload: str
    mean_seconds: float
    iterations: int
    reference: str = ""


@dataclass
class BenchReport:
    rows: list[BenchRow]

    def table(self) -> str:
        header = ("operation", "payload", "mean (s)", "iterations", "2004 reference")
        body = [(r.operation, r.payload, f"{r.mean_seconds:.6f}", str(r.iterations), r.reference or "-")
                for r in self.rows]
        widths = [max(len(line[i]) for line in [header, *body]) for i in range(len(header))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip() for line in [header, *body]]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines)

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["operation", "payload", "mean_seconds", "iterations", "reference"])
        for r in self.rows:
            w.writerow([r.operation, r.payload, f"{r.mean_seconds:.6f}", r.iterations, r.reference])
        return buf.getvalue()


def _mean(fn, iterations: int) -> float:
    fn()  # warm-up
    start = time.perf_counter()
    for _ in range(iterations):
        fn()
    return (time.perf_counter() - start) / iterations


def _size(n: int) -> str:
    return f"{n >> 20} MB" if n >= 1 << 20 else f"{n >> 10} KB"


def run_bench(iterations: int = 20, workdir=None) -> BenchReport:
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(workdir) if workdir else Path(tmp)
        sc = generate_scenario(preset("chain4"), root / "chain4")
        return _measure(sc, root, iterations)


def _measure(sc: Scenario, root: Path, iterations: int) -> BenchReport:
    clock = FixedClock(sc.clock_at)
    policy = sc.policy
    store = sc.store
    client = sc.client("client")
    aa = sc.cert("AA")
    rows: list[BenchRow] = []

    docs = {}
    for size in (1024, 1 << 20):
        path = root / f"doc-{size}.bin"
        path.write_bytes(os.urandom(size))
        docs[size] = path

    # AC verification alone: signature plus the service-relative checks
    rule = policy.resources[0]

    def verify_ac():
        if not client.ac.signed_by(aa.public_key):
            raise RuntimeError("fixture AC does not verify")
        check_service_validity(client.ac, policy, rule)

    rows.append(BenchRow("AC verification", f"{len(client.ac.der)} B", _mean(verify_ac, iterations),
                         iterations, "0.04 s"))

    options = ValidationOptions(policy.pkc_anchors, sc.clock_at)
    rows.append(BenchRow("path construction + validation, length 4 (local)", f"{len(client.pkc.der)} B",
                         _mean(lambda: validate_pkc(client.pkc, store, options), iterations), iterations, "0.4 s"))

    cvs_key = sc.key("cvs")
    pv_key = sc.key("pv")
    req = ValidationRequest(new_request_id(), client.pkc, tuple(policy.pkc_anchors.certificates()),
                            validation_time=sc.clock_at)
    sealed = SignedEnvelope.seal(req.encode(), pv_key.key, pv_key.name).encode()
    rows.append(BenchRow("CVS request: encode + sign", f"{len(sealed)} B",
                         _mean(lambda: SignedEnvelope.seal(req.encode(), pv_key.key, pv_key.name).encode(),
                               iterations), iterations, "0.04 s (2356 B)"))
    result = validate_pkc(client.pkc, store, options)
    resp = ValidationResponse(req.request_id, result.status, result.reason, result.chain, sc.clock_at)
    sealed = SignedEnvelope.seal(resp.encode(), cvs_key.key, cvs_key.name).encode()
    rows.append(BenchRow("CVS response: encode + sign", f"{len(sealed)} B",
                         _mean(lambda: SignedEnvelope.seal(resp.encode(), cvs_key.key, cvs_key.name).encode(),
                               iterations), iterations, "0.04 s (1403 B)"))

    service = CvsService(store, policy.pkc_anchors, cvs_key.key, cvs_key.name, clock, cache=False,
                         trusted_clients={pv_key.name: pv_key.public}, require_signed_requests=True)
    with CvsServer(service) as cvs_server:
        host, port = cvs_server.address
        remote = RemoteCvs(dataclasses.replace(policy.cvs_endpoint, host=host, port=port))
        gateway = GatewayService(policy, remote, clock, AuditLog(), pv_key.key, pv_key.name)
        with GatewayServer(gateway) as gw:
            ghost, gport = gw.address
            request = sc.request("client")
            reference = {1024: ("0.003 s", "1.17 s"), 1 << 20: ("1.700 s", "2.90 s")}
            for size, path in docs.items():
                no_cvs, with_cvs = reference[size]
                rows.append(BenchRow("fetch document, no verifier", _size(size),
                                     _mean(path.read_bytes, iterations), iterations, no_cvs))

                def fetch():
                    decision = request_access(ghost, gport, request, gateway=(pv_key.name, pv_key.public))
                    if not decision.permitted:
                        raise RuntimeError(decision.describe())
                    path.read_bytes()

                rows.append(BenchRow("fetch document, verifier + live CVS", _size(size),
                                     _mean(fetch, iterations), iterations, with_cvs))
    local = GatewayService(policy, LocalCvs(store), clock)
    rows.append(BenchRow("decision with in-process validation", "-",
                         _mean(lambda: local.decide(request), iterations), iterations))
    return BenchReport(rows)
