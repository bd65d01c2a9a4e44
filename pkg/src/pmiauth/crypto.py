"""
Hashing and the pluggable signature contract.

The only scheme shipped is a deterministic keyed-hash "mock" signature:
``sign = SHA-256(private || message)`` and the public key equals the
private key. It is insecure by construction and exists so that fixtures
are byte-reproducible. Real schemes can be added with
:func:`register_scheme`.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass
from typing import Callable

from .der import ObjectIdentifier, oid
from .errors import UnrecognizedAlgorithm

MOCK_SIGNATURE = oid("1.3.6.1.4.1.57264.99.1")


def digest(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


@dataclass(frozen=True)
class AlgorithmId:
    oid: ObjectIdentifier

    @property
    def recognized(self) -> bool:
        return self.oid in _SCHEMES

    def __str__(self):
        return str(self.oid)


MOCK = AlgorithmId(MOCK_SIGNATURE)


@dataclass(frozen=True)
class Signature:
    algorithm: AlgorithmId
    value: bytes


@dataclass(frozen=True)
class KeyPair:
    public: bytes
    private: bytes
    algorithm: AlgorithmId = MOCK

    def __post_init__(self):
        if self.algorithm == MOCK:
            if self.public != self.private:
                raise ValueError("mock keys are symmetric: public must equal private")
            if not 1 <= len(self.private) <= 64:
                raise ValueError("mock keys are 1..64 bytes")

    @classmethod
    def mock(cls, secret: bytes) -> "KeyPair":
        return cls(secret, secret, MOCK)

    @classmethod
    def derive(cls, label: str) -> "KeyPair":
        """Deterministic fixture key for a named entity."""
        return cls.mock(digest(b"pmiauth-fixture-key:" + label.encode("utf-8")))


@dataclass(frozen=True)
class SignatureScheme:
    sign: Callable[[bytes, bytes], bytes]
    verify: Callable[[bytes, bytes, bytes], bool]


def _mock_sign(private: bytes, message: bytes) -> bytes:
    return digest(private + message)


def _mock_verify(public: bytes, message: bytes, signature: bytes) -> bool:
    return hmac.compare_digest(digest(public + message), signature)


_SCHEMES: dict[ObjectIdentifier, SignatureScheme] = {
    MOCK_SIGNATURE: SignatureScheme(_mock_sign, _mock_verify),
}


def register_scheme(algorithm: ObjectIdentifier, scheme: SignatureScheme) -> None:
    _SCHEMES[algorithm] = scheme


def _scheme(algorithm: AlgorithmId) -> SignatureScheme:
    try:
        return _SCHEMES[algorithm.oid]
    except KeyError:
        raise UnrecognizedAlgorithm(f"signature algorithm {algorithm} is not registered") from None


def sign(key: KeyPair, message: bytes) -> Signature:
    return Signature(key.algorithm, _scheme(key.algorithm).sign(key.private, message))


def verify(public: bytes, algorithm: AlgorithmId, message: bytes, signature: Signature | bytes) -> bool:
    """True iff ``signature`` is valid. Unknown algorithms raise instead of returning False."""
    scheme = _scheme(algorithm)
    if isinstance(signature, Signature):
        if signature.algorithm != algorithm:
            return False
        signature = signature.value
    return scheme.verify(public, message, signature)
