from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest

from pmiauth.authority import generate_scenario, preset
from pmiauth.certs import Name, PublicKeyInfo, TrustAnchorSet, build_certificate, build_revocation_list
from pmiauth.certs import extensions as ext
from pmiauth.crypto import KeyPair

T0 = datetime(2004, 10, 6, 12, 0, 0, tzinfo=timezone.utc)
DAY = timedelta(days=1)

_criteria: dict[str, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(text): acceptance criterion covered by the test")


def pytest_runtest_logreport(report):
    marker = dict(report.user_properties).get("criterion")
    if marker is None:
        return
    if report.when == "call" or report.failed:
        outcome = "PASS" if report.passed else "FAIL"
        if report.nodeid not in _criteria or outcome == "FAIL":
            _criteria[report.nodeid] = (outcome, marker)


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.user_properties.append(("criterion", m.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for outcome, text in _criteria.values():
        terminalreporter.write_line(f"{outcome}  {text}")


# --- scenarios ---------------------------------------------------------------


@pytest.fixture(scope="session")
def figure1(tmp_path_factory):
    return generate_scenario(preset("figure1"), tmp_path_factory.mktemp("figure1"))


@pytest.fixture(scope="session")
def chain4(tmp_path_factory):
    return generate_scenario(preset("chain4"), tmp_path_factory.mktemp("chain4"))


@pytest.fixture(scope="session")
def deny_matrix(tmp_path_factory):
    return generate_scenario(preset("deny-matrix"), tmp_path_factory.mktemp("deny-matrix"))


# --- hand-built certificates ---------------------------------------------------


class MiniPki:
    """Just enough issuing for unit tests that need a certificate or two."""

    def __init__(self):
        self.serial = 0

    def key(self, label: str) -> KeyPair:
        return KeyPair.derive(label)

    def cert(self, subject: str, issuer: str | None = None, *, ca: bool = True, nb=T0 - 100 * DAY,
             na=T0 + 100 * DAY, path_len=None, key_label=None, signer_label=None, extra=(), aki=True,
             key_usage=("keyCertSign", "cRLSign")):
        self.serial += 1
        issuer = issuer or subject
        key = self.key(key_label or subject)
        signer = self.key(signer_label or issuer)
        exts = [ext.basic_constraints(ca, path_len) if ca else ext.basic_constraints(False),
                ext.subject_key_identifier(key.public)]
        if key_usage:
            exts.append(ext.key_usage(*key_usage))
        if aki:
            exts.append(ext.authority_key_identifier(ext.key_identifier(signer.public)))
        exts += list(extra)
        return build_certificate(serial=self.serial, issuer=Name.common(issuer), subject=Name.common(subject),
                                 not_before=nb, not_after=na, public_key=PublicKeyInfo.of(key), signer=signer,
                                 extensions=exts)

    def crl(self, issuer: str, entries=(), this_update=T0 - DAY, next_update=T0 + 7 * DAY, signer_label=None):
        return build_revocation_list(issuer=Name.common(issuer), this_update=this_update, next_update=next_update,
                                     entries=entries, signer=self.key(signer_label or issuer))

    @staticmethod
    def anchors(*certs) -> TrustAnchorSet:
        return TrustAnchorSet.from_certificates(certs)


@pytest.fixture
def pki():
    return MiniPki()
