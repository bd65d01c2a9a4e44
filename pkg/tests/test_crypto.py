from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pmiauth import crypto
from pmiauth.crypto import MOCK, AlgorithmId, KeyPair, Signature, SignatureScheme, digest, sign, verify
from pmiauth.der import oid
from pmiauth.errors import UnrecognizedAlgorithm

# computed with coreutils sha256sum before the provider existed
EMPTY_DIGEST = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
SIG_4B_4D = "f2087a5e597ddbbc7ddd876b8718142041ea6e5b552b9b685c00f2a1056422d4"

keys = st.binary(min_size=1, max_size=64).map(KeyPair.mock)


def test_empty_digest():
    assert digest(b"").hex() == EMPTY_DIGEST


def test_digest_deterministic():
    assert digest(b"pmi") == digest(b"pmi")


def test_mock_oid():
    assert str(MOCK.oid) == "1.3.6.1.4.1.57264.99.1"
    assert MOCK.recognized


def test_sign_known_vector():
    s = sign(KeyPair.mock(b"\x4b"), b"\x4d")
    assert s.algorithm == MOCK
    assert s.value.hex() == SIG_4B_4D
    assert len(s.value) == 32


def test_sign_twice_identical():
    k = KeyPair.mock(b"k")
    assert sign(k, b"m") == sign(k, b"m")


def test_verify_inverse_and_tamper():
    k = KeyPair.mock(b"key")
    s = sign(k, b"message")
    assert verify(k.public, MOCK, b"message", s)
    assert not verify(k.public, MOCK, b"messagf", s)
    assert not verify(k.public, MOCK, b"message", b"\x00" * 32)
    assert not verify(k.public, MOCK, b"message", s.value[:31])


def test_unknown_algorithm_is_an_error_not_false():
    other = AlgorithmId(oid("1.2.3.4"))
    assert not other.recognized
    with pytest.raises(UnrecognizedAlgorithm):
        verify(b"k", other, b"m", b"x" * 32)
    with pytest.raises(UnrecognizedAlgorithm):
        sign(KeyPair(b"a", b"b", other), b"m")


def test_signature_algorithm_must_match():
    k = KeyPair.mock(b"k")
    s = sign(k, b"m")
    assert not verify(k.public, MOCK, b"m", Signature(AlgorithmId(oid("1.2.3.4")), s.value))


def test_mock_key_rules():
    with pytest.raises(ValueError):
        KeyPair(b"a", b"b")
    with pytest.raises(ValueError):
        KeyPair.mock(b"")
    with pytest.raises(ValueError):
        KeyPair.mock(b"x" * 65)


def test_registered_scheme_round_trip():
    alg = oid("1.3.6.1.4.1.57264.99.200")
    crypto.register_scheme(alg, SignatureScheme(lambda priv, m: priv[::-1] + m, lambda pub, m, s: s == pub + m))
    try:
        k = KeyPair(b"pub", b"bup", AlgorithmId(alg))
        s = sign(k, b"m")
        assert verify(b"pub", AlgorithmId(alg), b"m", s)
    finally:
        crypto._SCHEMES.pop(alg)


@given(st.binary(max_size=256), st.integers(0, 2047))
def test_one_bit_flip_changes_digest(data, bit):
    if not data:
        data = b"\x00"
    i = bit % (len(data) * 8)
    flipped = bytearray(data)
    flipped[i // 8] ^= 1 << (i % 8)
    assert digest(bytes(flipped)) != digest(data)


@given(keys, keys, st.binary(max_size=128))
def test_distinct_keys_distinct_signatures(k1, k2, m):
    if k1.private == k2.private:
        return
    assert sign(k1, m) != sign(k2, m)
    assert not verify(k2.public, MOCK, m, sign(k1, m))


@given(keys, st.binary(max_size=128), st.binary(max_size=128))
def test_verify_property(k, m, m2):
    s = sign(k, m)
    assert verify(k.public, MOCK, m, s)
    assert verify(k.public, MOCK, m2, s) == (m2 == m)
