"""Acceptance gate. Each test covers one criterion; the run ends with a PASS/FAIL line per criterion."""

import time
from datetime import timedelta

import pytest
from hypothesis import HealthCheck, given, settings

from live import cache_replay, differential, fuzz, gateway_key, gateway_stack
from oracles import chain_passes, enumerate_chains, node_at, node_paths, non_minimal_lengths, oracle_valid
from oracles import random_world, reference_encode
from pmiauth import der
from pmiauth.certs import CertStore
from pmiauth.errors import NonCanonicalLength
from pmiauth.pathengine import FixedClock, ReasonCode, Status, ValidationOptions, validate_pkc
from pmiauth.verifier import AuditLog, DecisionCode, LocalCvs, Verdict, request_access, verify_access
from test_der import der_values
from test_path_engine import engine_chains, world_options
from test_verifier import DENY_ROWS
from worlds import CHAIN4_FAULTS, INTERMEDIATE, chain4_fault, figure1_with_revocation

criterion = pytest.mark.criterion


@criterion("figure1 end to end: PERMIT with two VALID CVS verdicts audited, under 5 s")
def test_figure1_end_to_end(figure1, tmp_path):
    start = time.monotonic()
    audit = AuditLog(tmp_path / "audit.log")
    with gateway_stack(figure1, audit=audit) as gateway:
        decision = request_access(*gateway.address, figure1.request("client"), gateway=gateway_key(figure1))
    elapsed = time.monotonic() - start
    (record,) = AuditLog.read(tmp_path / "audit.log")
    print(f"figure1: {decision.describe()} in {elapsed:.3f}s")
    assert decision.verdict == Verdict.PERMIT
    assert record["verdict"] == "PERMIT"
    assert record["cvs"]["aa"]["status"] == "VALID" and record["cvs"]["client"]["status"] == "VALID"
    assert elapsed < 5


@criterion("deny matrix: every row denied (or permitted) with its exact reason codes")
def test_deny_matrix(deny_matrix):
    rows = deny_matrix.rows()
    assert {e["client"] for e in rows} == set(DENY_ROWS)
    with gateway_stack(deny_matrix) as gateway:
        for entry in rows:
            request = deny_matrix.request(entry["client"], entry["resource"])
            decision = request_access(*gateway.address, request, gateway=gateway_key(deny_matrix))
            print(f"{entry['client']:<20} {decision.describe()}")
            assert [int(c) for c in decision.codes] == entry["reasons"]
            assert decision.codes[0] == DENY_ROWS[entry["client"]]
    assert len({DENY_ROWS[e["client"]] for e in rows} - {DecisionCode.OK}) == 8


@criterion("selective revocation: revoking flips PERMIT to DENY, restoring flips it back")
def test_selective_revocation(tmp_path):
    def decide(sc):
        return verify_access(sc.request("client"), sc.policy, LocalCvs(sc.store), FixedClock(sc.clock_at))

    before = decide(figure1_with_revocation(tmp_path / "before"))
    revoked = figure1_with_revocation(tmp_path / "pkc", pkc=True)
    pkc = decide(revoked)
    ac_cert = revoked.client("client").ac
    acrls = [crl for crl in revoked.store.revocation_lists if crl.issuer == ac_cert.issuer]
    assert acrls and not any(e.serial == ac_cert.serial for crl in acrls for e in crl.entries)
    ac = decide(figure1_with_revocation(tmp_path / "ac", ac=True))
    after = decide(figure1_with_revocation(tmp_path / "after"))
    assert before.permitted and after.permitted
    assert pkc.codes == (DecisionCode.CLIENT_PKC_INVALID,)
    assert ac.codes == (DecisionCode.AC_REVOKED,)


@criterion("chain4: VALID at length 4, and each injected fault gives its own reason")
def test_chain4(chain4):
    anchors = chain4.policy.pkc_anchors
    target = chain4.client("client").pkc
    ok = validate_pkc(target, chain4.store, ValidationOptions(anchors, chain4.clock_at))
    assert ok.status == Status.VALID and len(ok.chain) == 4
    for fault, reason in CHAIN4_FAULTS.items():
        r = validate_pkc(target, chain4_fault(chain4, fault), ValidationOptions(anchors, chain4.clock_at))
        print(f"{fault:<22} {r.describe()}")
        assert r.verdict() == (Status.INVALID, reason)
        assert INTERMEDIATE in r.detail


@criterion("path oracle: builder and validity agree with brute force on 600 random worlds")
def test_path_oracle():
    disagreements, valid = [], 0
    for seed in range(600):
        w = random_world(seed)
        store = CertStore(w.store + w.crls)
        if engine_chains(w) != enumerate_chains(w.target, w.store, w.anchors, w.max_len):
            disagreements.append((seed, "chains"))
        r = validate_pkc(w.target, store, world_options(w))
        if r.valid != oracle_valid(w):
            disagreements.append((seed, "validity"))
        if r.valid:
            valid += 1
            anchor = next(a for a in w.anchors if a.subject == r.anchor_name)
            if not chain_passes(r.chain, anchor, w.crls, w.time, w.initial_policies):
                disagreements.append((seed, "soundness"))
    print(f"600 worlds, {valid} valid, {len(disagreements)} disagreements")
    assert not disagreements
    assert 0 < valid < 600  # both outcomes exercised


@criterion("DER: 10,000 random values round-trip exactly; non-minimal lengths rejected at every node")
def test_der_round_trip():
    seen = {"round": 0, "mutated": 0}

    @settings(max_examples=10_000, deadline=None, database=None, suppress_health_check=list(HealthCheck))
    @given(der_values)
    def round_trip(v):
        data = der.encode(v)
        assert data == reference_encode(v)
        back, used = der.decode(data)
        assert back == v and used == len(data)
        seen["round"] += 1

    @settings(max_examples=1_000, deadline=None, database=None, suppress_health_check=list(HealthCheck))
    @given(der_values)
    def mutations(v):
        for path in node_paths(v):
            body_len = len(reference_encode(node_at(v, path), ((), b""))) - 1
            for octets in non_minimal_lengths(body_len):
                with pytest.raises(NonCanonicalLength):
                    der.decode(reference_encode(v, (path, octets)))
                seen["mutated"] += 1

    round_trip()
    mutations()
    print(f"{seen['round']} round trips, {seen['mutated']} non-canonical encodings rejected")
    assert seen["round"] >= 10_000 and seen["mutated"] > 0


@criterion("wire: remote equals local on every scenario; 10,000 mutated frames, no crash, no VALID")
def test_wire(figure1, chain4, deny_matrix):
    total = 0
    worlds = [(figure1, None), (chain4, None), (deny_matrix, None)]
    worlds += [(chain4, chain4_fault(chain4, f)) for f in CHAIN4_FAULTS]
    for sc, store in worlds:
        count, mismatches = differential(sc, store)
        assert not mismatches, mismatches
        total += count
    outcomes = fuzz(deny_matrix, 10_000, seed=1)
    print(f"{total} differential comparisons; fuzz outcomes {dict(outcomes)}")
    assert outcomes["mutants"] == 10_000
    assert outcomes["VALID"] == 0


@criterion("cache: cached answers equal fresh evaluation before and after CRL nextUpdate")
def test_cache_replay(figure1):
    t = figure1.clock_at
    next_update = t + timedelta(days=7)
    ticks = [t, t + timedelta(days=1), next_update - timedelta(seconds=1), next_update,
             next_update + timedelta(seconds=1), next_update + timedelta(days=1)]
    count, mismatches, service, verdicts = cache_replay(figure1, ticks)
    print(f"{count} comparisons, {service.cache.hits} cache hits")
    assert not mismatches
    assert service.cache.hits > 0
    client = str(figure1.client("client").pkc.subject)
    by_tick = {tick: (status, reason) for tick, subject, status, reason in verdicts if subject == client}
    assert by_tick[next_update][0] == Status.VALID
    assert by_tick[next_update + timedelta(seconds=1)] == (Status.INVALID, ReasonCode.REVOCATION_UNAVAILABLE)
