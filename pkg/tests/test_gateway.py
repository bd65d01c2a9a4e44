import dataclasses
import json
import socket
import time
from concurrent.futures import ThreadPoolExecutor

import pytest

from pmiauth.errors import EnvelopeSignatureInvalid, ProtocolViolation
from pmiauth.pathengine import FixedClock
from pmiauth.verifier import (
    AccessDecision,
    AuditLog,
    DecisionCode,
    GatewayService,
    GatewayServer,
    LocalCvs,
    PrivilegePolicy,
    RemoteCvs,
    Verdict,
    build_gateway,
    request_access,
)
from pmiauth.wire import CvsClientConfig, ErrorReason, MsgType, SignedEnvelope, decode_frame, encode_frame
from live import gateway_key, gateway_stack, unused_port
from test_verifier import DENY_ROWS


def ask(gateway, sc, request, timeout=5.0):
    return request_access(*gateway.address, request, timeout, gateway=gateway_key(sc))


def raw(gateway, data: bytes) -> bytes:
    with socket.create_connection(gateway.address, timeout=5) as sock:
        sock.sendall(data)
        sock.shutdown(socket.SHUT_WR)
        out = bytearray()
        while chunk := sock.recv(4096):
            out += chunk
    return bytes(out)


def test_figure1_end_to_end(figure1, tmp_path):
    audit = AuditLog(tmp_path / "audit.log")
    with gateway_stack(figure1, audit=audit) as gateway:
        decision = ask(gateway, figure1, figure1.request("client"))
    assert decision.verdict == Verdict.PERMIT
    (record,) = AuditLog.read(tmp_path / "audit.log")
    assert record["verdict"] == "PERMIT"
    assert record["cvs"]["aa"]["status"] == "VALID"
    assert record["cvs"]["client"]["status"] == "VALID"


def test_decision_signed_by_gateway(figure1):
    with gateway_stack(figure1) as gateway:
        reply = raw(gateway, encode_frame(MsgType.ACCESS_REQUEST, figure1.request("client").encode()))
    msg_type, payload = decode_frame(reply)
    assert msg_type == MsgType.ACCESS_RESPONSE
    envelope = SignedEnvelope.decode(payload)
    assert AccessDecision.decode(envelope.open(dict([gateway_key(figure1)]))).permitted
    stranger = figure1.key("cvs.pub")
    with pytest.raises(EnvelopeSignatureInvalid):
        envelope.open({figure1.key("pv.pub").name: stranger.public})


def test_revoked_client_denied_over_the_wire(deny_matrix):
    with gateway_stack(deny_matrix) as gateway:
        decision = ask(gateway, deny_matrix, deny_matrix.request("revoked-pkc"))
    assert decision.codes[0] == DecisionCode.CLIENT_PKC_INVALID


def test_concurrent_clients_get_their_own_decisions(deny_matrix):
    rows = deny_matrix.rows()
    with gateway_stack(deny_matrix) as gateway:
        def one(entry):
            return entry, ask(gateway, deny_matrix, deny_matrix.request(entry["client"], entry["resource"]))

        with ThreadPoolExecutor(8) as pool:
            results = list(pool.map(one, rows * 3))
    for entry, decision in results:
        assert [int(c) for c in decision.codes] == entry["reasons"]
        assert decision.codes[0] == DENY_ROWS[entry["client"]]


def test_cvs_down_denies_quickly(figure1):
    pv = figure1.key("pv")
    cvs_pub = figure1.key("cvs.pub")
    down = CvsClientConfig("127.0.0.1", unused_port(), cvs_pub.name, cvs_pub.public, pv.key, pv.name, 1.0)
    service = GatewayService(figure1.policy, RemoteCvs(down), FixedClock(figure1.clock_at), AuditLog(),
                             pv.key, pv.name)
    with GatewayServer(service) as gateway:
        start = time.monotonic()
        decision = ask(gateway, figure1, figure1.request("client"))
    assert decision.codes == (DecisionCode.CVS_UNAVAILABLE,)
    assert time.monotonic() - start < 3


def test_malformed_request_gets_error_frame(figure1):
    with gateway_stack(figure1) as gateway:
        bad = raw(gateway, encode_frame(MsgType.ACCESS_REQUEST, b"\x30\x03\x02\x01"))
        wrong = raw(gateway, encode_frame(MsgType.CVS_REQUEST, figure1.request("client").encode()))
    assert decode_frame(bad) == (MsgType.ERROR, bytes([ErrorReason.BAD_MESSAGE]))
    assert decode_frame(wrong) == (MsgType.ERROR, bytes([ErrorReason.BAD_TYPE]))


def test_request_access_raises_on_error_frame(figure1):
    service = GatewayService(figure1.policy, LocalCvs(figure1.store), FixedClock(figure1.clock_at))
    service.handle = lambda t, p: (MsgType.ERROR, bytes([ErrorReason.INTERNAL]))
    with GatewayServer(service) as gateway:
        with pytest.raises(ProtocolViolation):
            request_access(*gateway.address, figure1.request("client"))


def test_policy_reload_applies_to_later_requests(figure1):
    data = json.loads((figure1.directory / "policy.json").read_text())
    for rule in data["resources"]:
        rule["methods"] = ["POST"]
    strict = PrivilegePolicy.from_dict(data, figure1.directory)
    service = GatewayService(figure1.policy, LocalCvs(figure1.store), FixedClock(figure1.clock_at))
    request = figure1.request("client", method="GET")
    assert service.decide(request).permitted
    service.reload(strict)
    assert service.decide(request).codes == (DecisionCode.UNKNOWN_RESOURCE,)


def test_build_gateway_from_scenario_config(figure1):
    cfg = dataclasses.replace(figure1.gateway_config(), audit_log=None)
    service = build_gateway(cfg, cvs=LocalCvs(figure1.store))
    assert service.name == figure1.key("pv").name
    assert service.clock.now() == figure1.clock_at
    assert service.decide(figure1.request("client")).permitted
