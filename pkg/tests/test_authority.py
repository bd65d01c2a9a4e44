import json
from datetime import timedelta
from pathlib import Path

import pytest

from conftest import T0
from pmiauth.authority import (
    PRESETS,
    Authority,
    ScenarioSpec,
    Workspace,
    generate_scenario,
    oracle_manifest,
    preset,
    resolve_time,
    run_bench,
)
from pmiauth.certs import CertStore, TrustAnchorSet, load_attribute_certificate, load_certificate, load_store
from pmiauth.cli import main
from pmiauth.errors import MalformedTime, SpecError
from pmiauth.pathengine import FixedClock, ReasonCode, Status, ValidationOptions, validate_pkc
from pmiauth.verifier import LocalCvs, verify_access

AT = "20041006120000Z"


def tree(root: Path) -> dict:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


# --- scenarios ---------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_generation_is_byte_deterministic(name, tmp_path):
    a = generate_scenario(preset(name), tmp_path / "a").directory
    b = generate_scenario(preset(name), tmp_path / "b").directory
    assert tree(a) == tree(b)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_verifier_matches_reference_oracle(name, request):
    sc = request.getfixturevalue(name.replace("-", "_"))
    assert oracle_manifest(sc.directory) == sc.manifest
    for entry in sc.manifest:
        req = sc.request(entry["client"], entry["resource"], entry["method"])
        decision = verify_access(req, sc.policy, LocalCvs(sc.store), FixedClock(sc.clock_at))
        assert [int(c) for c in decision.codes] == entry["reasons"], entry


def test_figure1_manifest(figure1):
    (entry,) = figure1.rows()
    assert entry["verdict"] == "PERMIT"
    assert len(figure1.store.certificates) == 4


def test_chain4_path_length(chain4):
    anchors = chain4.policy.pkc_anchors
    result = validate_pkc(chain4.client("client").pkc, chain4.store, ValidationOptions(anchors, chain4.clock_at))
    assert result.status == Status.VALID and len(result.chain) == 4


def test_deny_matrix_rows_are_distinct(deny_matrix):
    firsts = [e["reasons"][0] for e in deny_matrix.rows()]
    assert len(firsts) == 9 and len(set(firsts) - {0}) == 8


def test_preset_is_a_private_copy():
    spec = preset("figure1")
    spec["clients"].clear()
    assert preset("figure1")["clients"]


@pytest.mark.parametrize("mutation, message", [
    (lambda s: s.pop("cas"), "missing"),
    (lambda s: s["clients"][0].update(issuingCA="CA9"), "issuingCA"),
    (lambda s: s["clients"][0].update(acFrom="nobody"), "acFrom"),
    (lambda s: s["clients"].append(dict(s["clients"][0])), "duplicate"),
    (lambda s: s["clients"][0].update(name="cvs"), "reserved"),
    (lambda s: s["cas"][0].update(chainDepth=0), "chainDepth"),
    (lambda s: s["revocations"].append({"kind": "ac", "target": "ghost"}), "ghost"),
    (lambda s: s["revocations"].append({"kind": "crl", "target": "client"}), "kind"),
    (lambda s: s["clients"][0].update(resource="/nowhere"), "resource"),
])
def test_spec_errors(mutation, message):
    spec = preset("figure1")
    mutation(spec)
    with pytest.raises(SpecError, match=message):
        ScenarioSpec.from_dict(spec)


@pytest.mark.parametrize("text, expected", [
    ("+1d", T0 + timedelta(days=1)),
    ("-2h", T0 - timedelta(hours=2)),
    ("+30m", T0 + timedelta(minutes=30)),
    ("-0s", T0),
    ("20050101000000Z", T0.replace(year=2005, month=1, day=1, hour=0)),
])
def test_resolve_time(text, expected):
    assert resolve_time(text, T0) == expected


def test_resolve_time_rejects_garbage():
    with pytest.raises(MalformedTime):
        resolve_time("tomorrow", T0)


# --- issuing -----------------------------------------------------------------


def test_serials_are_per_issuer():
    auth = Authority()
    root = auth.issue_ca("R", T0, T0 + timedelta(days=1))
    a = auth.issue_ee("a", root, T0, T0 + timedelta(days=1))
    b = auth.issue_ee("b", root, T0, T0 + timedelta(days=1))
    other = auth.issue_ca("S", T0, T0 + timedelta(days=1))
    c = auth.issue_ee("c", other, T0, T0 + timedelta(days=1))
    assert b.cert.serial == a.cert.serial + 1
    assert c.cert.serial == a.cert.serial


def test_revoke_and_unrevoke():
    auth = Authority()
    root = auth.issue_ca("R", T0 - timedelta(days=1), T0 + timedelta(days=1))
    ee = auth.issue_ee("e", root, T0 - timedelta(days=1), T0 + timedelta(days=1))
    auth.revoke("R", ee.cert.serial, T0 - timedelta(hours=1))
    crl = auth.issue_crl(root, T0 - timedelta(hours=1), T0 + timedelta(days=1))
    assert [e.serial for e in crl.entries] == [ee.cert.serial]
    auth.unrevoke("R", ee.cert.serial)
    assert auth.issue_crl(root, T0 - timedelta(hours=1), T0 + timedelta(days=1)).entries == ()


def test_workspace_round_trip(tmp_path):
    ws = Workspace(tmp_path)
    ws.issue_ca("Root", T0 - timedelta(days=10), T0 + timedelta(days=10))
    ws.issue_ee("alice", "Root", T0 - timedelta(days=1), T0 + timedelta(days=5))
    alice = load_certificate(ws.cert_path("alice"))
    ws.revoke("pkc", "Root", alice.serial, T0 - timedelta(hours=1))

    again = Workspace(tmp_path)  # revocations survive a reload from disk
    again.issue_crl("Root", T0 - timedelta(hours=1), T0 + timedelta(days=1))
    anchors = TrustAnchorSet.from_certificates([load_certificate(ws.cert_path("Root"))])
    result = validate_pkc(alice, load_store(tmp_path).store, ValidationOptions(anchors, T0))
    assert result.reason == ReasonCode.REVOKED

    again.unrevoke("Root", alice.serial)
    again.issue_crl("Root", T0 - timedelta(minutes=30), T0 + timedelta(days=1))
    result = validate_pkc(alice, load_store(tmp_path).store, ValidationOptions(anchors, T0))
    assert result.status == Status.VALID


def test_workspace_refuses_reissue_and_unknown_serial(tmp_path):
    ws = Workspace(tmp_path)
    ws.issue_ca("Root", T0, T0 + timedelta(days=1))
    with pytest.raises(SpecError):
        ws.issue_ca("Root", T0, T0 + timedelta(days=1))
    with pytest.raises(SpecError):
        ws.revoke("pkc", "Root", 999, T0)
    with pytest.raises(SpecError):
        ws.issue_ee("x", "Nobody", T0, T0 + timedelta(days=1))


def test_issued_ac_binds_holder(tmp_path):
    ws = Workspace(tmp_path)
    ws.issue_ca("Root", T0 - timedelta(days=1), T0 + timedelta(days=10))
    ws.issue_ee("bob", "Root", T0 - timedelta(days=1), T0 + timedelta(days=5))
    ws.issue_aa("AA", "Root", T0 - timedelta(days=1), T0 + timedelta(days=5))
    ac = load_attribute_certificate(ws.issue_ac("bob", "AA", T0, T0 + timedelta(days=1), {"role": ["staff"]},
                                                ["web-01"]))
    bob = load_certificate(ws.cert_path("bob"))
    assert ac.holder.matches(bob)
    assert ac.issuer == load_certificate(ws.cert_path("AA")).subject


# --- command line ------------------------------------------------------------


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_decide_permit(capsys):
    code, out, _ = run(capsys, "decide", "--scenario", "figure1", "--client", "client")
    assert code == 0
    assert json.loads(out)["verdict"] == "PERMIT"


def test_cli_decide_deny(capsys, deny_matrix):
    code, out, _ = run(capsys, "decide", "--scenario", str(deny_matrix.directory), "--client", "revoked-pkc")
    record = json.loads(out)
    assert code == 1
    assert record["reasons"][0]["code"] == 20


def test_cli_scenario_and_validate_pkc(capsys, tmp_path):
    code, out, _ = run(capsys, "scenario", "chain4", "--out", str(tmp_path / "sc"))
    assert code == 0 and "PERMIT" in out
    sc = tmp_path / "sc"
    client = sc / "store" / "certs" / "client.der"
    anchor = str(sc / "store" / "certs" / "CA1.der")
    code, out, _ = run(capsys, "validate-pkc", str(client), "--store", str(sc / "store"),
                       "--anchor", anchor, "--at", AT)
    assert code == 0
    assert len(json.loads(out)["chain"]) == 4
    code, out, _ = run(capsys, "validate-pkc", str(client), "--store", str(sc / "store"),
                       "--anchor", anchor, "--at", "20300101000000Z")
    assert code == 1 and json.loads(out)["reasonName"] == "EXPIRED"


def test_cli_issuing_flow(capsys, tmp_path):
    ws = str(tmp_path / "ws")
    steps = [
        ("issue-ca", "Root", "--self-signed"),
        ("issue-ee", "carol", "--issuer", "Root"),
        ("issue-aa", "AA", "--issuer", "Root"),
        ("issue-ac", "--holder", "carol", "--aa", "AA", "--attr", "role=staff", "--target", "web-01"),
        ("issue-crl", "--issuer", "Root"),
    ]
    for step in steps:
        code, _, err = run(capsys, step[0], "--dir", ws, "--at", AT, *step[1:])
        assert code == 0, err
    code, _, err = run(capsys, "issue-ca", "--dir", ws, "--at", AT, "Other")
    assert code == 2 and "self-signed" in err


@pytest.mark.parametrize("argv", [
    ["decide", "--scenario", "no-such-preset"],
    ["decide", "--resource", "/x"],
    ["validate-pkc", "/nonexistent.der", "--anchor", "/nonexistent.der"],
])
def test_cli_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_cli_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["validate-pkc"])
    assert info.value.code == 2


def test_bench_runs(tmp_path):
    report = run_bench(iterations=1, workdir=tmp_path)
    table = report.table()
    assert report.rows and all(row.operation in table for row in report.rows)


def test_store_from_scenario_directory(figure1):
    store = load_store(figure1.directory / "store").store
    assert isinstance(store, CertStore)
    assert {c.fingerprint for c in store.certificates} == {c.fingerprint for c in figure1.store.certificates}
