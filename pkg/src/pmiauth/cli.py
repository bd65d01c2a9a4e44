"""Command-line entry point ``pmi``.

Offline verbs exit 0 on VALID/PERMIT, 1 on INVALID/DENY and 2 on
UNKNOWN or any usage or input error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import tempfile
from datetime import datetime
from pathlib import Path

from . import __version__
from .authority import Scenario, ScenarioSpec, Workspace, generate_scenario, preset, resolve_time, run_bench
from .authority.presets import PRESETS
from .certs import TrustAnchorSet, load_attribute_certificate, load_certificate, load_store
from .der import oid, parse_time
from .errors import PmiError
from .pathengine import ANY, FixedClock, PathValidationResult, RevocationMode, Status, SystemClock, ValidationOptions
from .pathengine import validate_pkc
from .verifier import (
    AccessRequest,
    AuditLog,
    GatewayConfig,
    LocalCvs,
    PrivilegePolicy,
    RemoteCvs,
    check_formal_validity,
    serve_gateway,
    verify_access,
)
from .wire import CvsClient, CvsClientConfig, CvsConfig, load_key_file, serve

log = logging.getLogger("pmiauth")

EXIT_OK, EXIT_DENY, EXIT_ERROR = 0, 1, 2


def _now(args) -> datetime:
    return parse_time(args.at) if getattr(args, "at", None) else SystemClock().now()


def _address(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise argparse.ArgumentTypeError(f"expected HOST:PORT, got {text!r}")
    return host, int(port)


def _emit(record: dict) -> None:
    print(json.dumps(record, indent=2, default=str))


def _result_record(r: PathValidationResult) -> dict:
    return {
        "status": r.status.name,
        "reason": int(r.reason),
        "reasonName": r.reason.name,
        "detail": r.detail,
        "chain": [f"{c.subject} (serial {c.serial})" for c in r.chain],
        "anchor": str(r.anchor_name) if r.anchor_name else None,
        "policies": [str(p) for p in r.surviving_policies],
        "warnings": list(r.warnings),
    }


def _status_exit(status: Status) -> int:
    return {Status.VALID: EXIT_OK, Status.INVALID: EXIT_DENY}.get(status, EXIT_ERROR)


# --- issuing -----------------------------------------------------------------

def _window(args):
    base = _now(args)
    return resolve_time(args.not_before, base), resolve_time(args.not_after, base)


def cmd_issue_ca(args) -> int:
    if args.self_signed == bool(args.issuer):
        raise PmiError("give exactly one of --self-signed or --issuer")
    nb, na = _window(args)
    path = Workspace(args.dir).issue_ca(args.label, nb, na, args.issuer, args.path_len)
    print(path)
    return EXIT_OK


def cmd_issue_ee(args) -> int:
    nb, na = _window(args)
    ws = Workspace(args.dir)
    issue = ws.issue_aa if args.command == "issue-aa" else ws.issue_ee
    print(issue(args.label, args.issuer, nb, na))
    return EXIT_OK


def cmd_issue_ac(args) -> int:
    attributes: dict[str, list[str]] = {}
    for item in args.attr:
        key, sep, value = item.partition("=")
        if not sep:
            raise PmiError(f"--attr expects TYPE=VALUE, got {item!r}")
        attributes.setdefault(key, []).append(value)
    nb, na = _window(args)
    path = Workspace(args.dir).issue_ac(args.holder, args.aa, nb, na, attributes,
                                        args.target or None, args.critical)
    print(path)
    return EXIT_OK


def cmd_issue_crl(args) -> int:
    base = _now(args)
    print(Workspace(args.dir).issue_crl(args.issuer, resolve_time(args.this_update, base),
                                        resolve_time(args.next_update, base)))
    return EXIT_OK


def cmd_revoke(args) -> int:
    ws = Workspace(args.dir)
    if args.undo:
        ws.unrevoke(args.issuer, args.serial)
    else:
        ws.revoke(args.kind, args.issuer, args.serial, _now(args), args.reason)
    return EXIT_OK


def cmd_scenario(args) -> int:
    spec = preset(args.spec) if args.spec in PRESETS else ScenarioSpec.load(args.spec).to_dict()
    sc = generate_scenario(spec, args.out)
    for entry in sc.rows():
        print(f"{entry['client']:<20} {entry['resource']:<16} {entry['verdict']:<6} {entry['reasons']}")
    return EXIT_OK


# --- offline validation --------------------------------------------------------

def cmd_validate_pkc(args) -> int:
    cert = load_certificate(args.cert)
    anchors = TrustAnchorSet.from_certificates(load_certificate(p) for p in args.anchor)
    policies = frozenset(oid(p) for p in args.policy) if args.policy else ANY
    options = ValidationOptions(anchors, _now(args), policies, args.max_path_length,
                                RevocationMode.SOFT_FAIL if args.soft_fail else RevocationMode.HARD_FAIL)
    if args.cvs:
        host, port = args.cvs
        kf = load_key_file(args.cvs_key)
        result = CvsClient(CvsClientConfig(host, port, kf.name, kf.public, timeout=args.timeout)).validate(cert, options)
    else:
        report = load_store(args.store)
        for path, why in report.skipped:
            print(f"warning: skipped {path}: {why}", file=sys.stderr)
        result = validate_pkc(cert, report.store, options)
    _emit(_result_record(result))
    return _status_exit(result.status)


def _backend(args, policy: PrivilegePolicy):
    if args.store:
        return LocalCvs(load_store(args.store).store)
    if policy.cvs_endpoint is None:
        raise PmiError("give --store for offline validation; the policy names no cvsEndpoint")
    endpoint = policy.cvs_endpoint
    if args.cvs:
        endpoint = dataclasses.replace(endpoint, host=args.cvs[0], port=args.cvs[1])
    return RemoteCvs(endpoint)


def cmd_validate_ac(args) -> int:
    policy = PrivilegePolicy.load(args.policy)
    aa = load_certificate(args.aa_cert) if args.aa_cert else None
    res = check_formal_validity(load_attribute_certificate(args.ac), load_certificate(args.cert), policy,
                                _now(args), _backend(args, policy), aa)
    _emit({"ok": res.ok, "reasons": [{"code": int(r.code), "name": r.code.name, "detail": r.detail}
                                     for r in res.reasons]})
    return EXIT_OK if res.ok else EXIT_DENY


def _decision_record(decision) -> dict:
    return {
        "verdict": decision.verdict.name,
        "reasons": [{"code": int(r.code), "name": r.code.name, "detail": r.detail} for r in decision.reasons],
        "evaluatedAt": decision.evaluated_at.isoformat().replace("+00:00", "Z"),
        "cvs": {k: f"{v.status.name} ({v.reason.name})" for k, v in decision.cvs_verdicts.items()},
    }


def cmd_decide(args) -> int:
    if args.scenario:
        return _decide_scenario(args)
    missing = [flag for flag, v in (("--policy", args.policy), ("--cert", args.cert), ("--ac", args.ac),
                                    ("--resource", args.resource)) if not v]
    if missing:
        raise PmiError(f"decide needs {', '.join(missing)} (or --scenario)")
    policy = PrivilegePolicy.load(args.policy)
    request = AccessRequest(args.resource, args.method or "GET", load_certificate(args.cert),
                            load_attribute_certificate(args.ac),
                            aa_cert=load_certificate(args.aa_cert) if args.aa_cert else None)
    decision = verify_access(request, policy, _backend(args, policy), FixedClock(_now(args)),
                             AuditLog(args.audit_log) if args.audit_log else None)
    _emit(_decision_record(decision))
    return EXIT_OK if decision.permitted else EXIT_DENY


def _decide_scenario(args) -> int:
    with tempfile.TemporaryDirectory() as tmp:
        if Path(args.scenario).is_dir():
            sc = Scenario(args.scenario)
        elif args.scenario in PRESETS:
            sc = generate_scenario(preset(args.scenario), Path(tmp) / args.scenario)
        else:
            raise PmiError(f"{args.scenario!r} is neither a scenario directory nor a preset "
                           f"({', '.join(PRESETS)})")
        client = args.client or sc.spec.clients[0].name
        request = sc.request(client, args.resource, args.method)
        at = parse_time(args.at) if args.at else sc.clock_at
        decision = verify_access(request, sc.policy, LocalCvs(sc.store), FixedClock(at))
        record = _decision_record(decision)
        record["client"] = client
        record["resource"] = request.resource_id
        _emit(record)
        return EXIT_OK if decision.permitted else EXIT_DENY


# --- services ------------------------------------------------------------------

def cmd_serve_cvs(args) -> int:
    cfg = CvsConfig.load(args.config)
    if args.listen:
        cfg.host, cfg.port = args.listen
    if args.no_cache:
        cfg.cache = False
    if args.clock:
        cfg.clock = args.clock
    server = serve(cfg)
    log.info("CVS listening on %s:%d", *server.address)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def cmd_serve_pv(args) -> int:
    cfg = GatewayConfig.load(args.config)
    if args.listen:
        cfg.host, cfg.port = args.listen
    if args.clock:
        cfg.clock = args.clock
    cvs = None
    if args.cvs:
        policy = PrivilegePolicy.load(cfg.policy)
        cvs = RemoteCvs(dataclasses.replace(policy.cvs_endpoint, host=args.cvs[0], port=args.cvs[1]))
    server = serve_gateway(cfg, cvs=cvs)
    log.info("privilege verifier listening on %s:%d", *server.address)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def cmd_bench(args) -> int:
    report = run_bench(args.iterations)
    print(report.table())
    if args.csv:
        Path(args.csv).write_text(report.csv())
    return EXIT_OK


# --- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pmi", description="Attribute certificate verification tools.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def issuing(name, help, fn):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("--dir", required=True, help="issuing workspace")
        sp.add_argument("--at", help="base time for relative offsets (default: now)")
        sp.set_defaults(fn=fn)
        return sp

    def window(sp, nb="-1d", na="+365d"):
        sp.add_argument("--not-before", default=nb, help=f"time or offset such as -1d (default {nb})")
        sp.add_argument("--not-after", default=na, help=f"time or offset (default {na})")

    sp = issuing("issue-ca", "issue a CA certificate", cmd_issue_ca)
    sp.add_argument("label")
    sp.add_argument("--issuer")
    sp.add_argument("--self-signed", action="store_true")
    sp.add_argument("--path-len", type=int)
    window(sp)
    for name, what in (("issue-ee", "an end-entity"), ("issue-aa", "an attribute authority")):
        sp = issuing(name, f"issue {what} certificate", cmd_issue_ee)
        sp.add_argument("label")
        sp.add_argument("--issuer", required=True)
        window(sp)
    sp = issuing("issue-ac", "issue an attribute certificate", cmd_issue_ac)
    sp.add_argument("--holder", required=True, help="label of the holder's certificate")
    sp.add_argument("--aa", required=True)
    sp.add_argument("--attr", action="append", default=[], help="TYPE=VALUE, repeatable (TYPE may be 'role')")
    sp.add_argument("--target", action="append", default=[], help="service name for targeting, repeatable")
    sp.add_argument("--critical", action="append", default=[], help="extra critical extension OID")
    window(sp, "-1d", "+30d")
    sp = issuing("issue-crl", "issue a revocation list", cmd_issue_crl)
    sp.add_argument("--issuer", required=True)
    sp.add_argument("--this-update", default="-0s")
    sp.add_argument("--next-update", default="+7d")
    sp = issuing("revoke", "record a revocation for the next issue-crl", cmd_revoke)
    sp.add_argument("--kind", choices=("pkc", "ac"), required=True)
    sp.add_argument("--issuer", required=True)
    sp.add_argument("--serial", type=int, required=True)
    sp.add_argument("--reason", type=int, default=0)
    sp.add_argument("--undo", action="store_true", help="remove a recorded revocation")

    sp = sub.add_parser("scenario", help="generate a scenario directory")
    sp.add_argument("spec", help=f"preset ({', '.join(PRESETS)}) or scenario JSON file")
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_scenario)

    sp = sub.add_parser("validate-pkc", help="validate a public-key certificate")
    sp.add_argument("cert")
    sp.add_argument("--store", help="store directory (offline)")
    sp.add_argument("--anchor", action="append", required=True, help="self-signed anchor certificate, repeatable")
    sp.add_argument("--policy", action="append", default=[], help="acceptable policy OID, repeatable")
    sp.add_argument("--max-path-length", type=int, default=8)
    sp.add_argument("--soft-fail", action="store_true")
    sp.add_argument("--cvs", type=_address, help="ask a CVS at HOST:PORT instead of validating locally")
    sp.add_argument("--cvs-key", help="CVS public key file (with --cvs)")
    sp.add_argument("--timeout", type=float, default=5.0)
    sp.add_argument("--at")
    sp.set_defaults(fn=cmd_validate_pkc)

    for name, fn in (("validate-ac", cmd_validate_ac), ("decide", cmd_decide)):
        sp = sub.add_parser(name, help="check an attribute certificate" if name == "validate-ac"
                            else "make an access decision")
        sp.add_argument("--policy", required=name == "validate-ac")
        sp.add_argument("--cert", required=name == "validate-ac")
        sp.add_argument("--ac", required=name == "validate-ac")
        sp.add_argument("--aa-cert")
        sp.add_argument("--store", help="validate chains in-process against this store")
        sp.add_argument("--cvs", type=_address, help="override the policy's CVS address")
        sp.add_argument("--at")
        sp.set_defaults(fn=fn)
    sp.add_argument("--resource")
    sp.add_argument("--method")
    sp.add_argument("--audit-log")
    sp.add_argument("--scenario", help="preset name or generated scenario directory")
    sp.add_argument("--client", help="client name within --scenario")

    sp = sub.add_parser("serve-cvs", help="run the certificate validation server")
    sp.add_argument("--config", required=True)
    sp.add_argument("--listen", type=_address)
    sp.add_argument("--no-cache", action="store_true")
    sp.add_argument("--clock", help="pin the server clock")
    sp.set_defaults(fn=cmd_serve_cvs)

    sp = sub.add_parser("serve-pv", help="run the privilege verifier gateway")
    sp.add_argument("--config", required=True)
    sp.add_argument("--listen", type=_address)
    sp.add_argument("--cvs", type=_address, help="override the policy's CVS address")
    sp.add_argument("--clock")
    sp.set_defaults(fn=cmd_serve_pv)

    sp = sub.add_parser("bench", help="time the main operations")
    sp.add_argument("--iterations", type=int, default=20)
    sp.add_argument("--csv", help="also write the report as CSV")
    sp.set_defaults(fn=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except (PmiError, OSError, ValueError, KeyError) as exc:
        print(f"pmi {args.command}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
