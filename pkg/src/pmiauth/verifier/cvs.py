"""Where the verifier sends public-key certificates for path validation."""

from __future__ import annotations

from datetime import datetime
from typing import Protocol

from ..certs import CertStore, PublicKeyCertificate, TrustAnchorSet
from ..pathengine import PathValidationResult, RevocationMode, ValidationOptions, validate_pkc
from ..wire import CvsClient, CvsClientConfig


class CvsBackend(Protocol):
    def validate(self, target: PublicKeyCertificate, anchors: TrustAnchorSet, at: datetime,
                 mode: RevocationMode = RevocationMode.HARD_FAIL) -> PathValidationResult: ...


class LocalCvs:
    """In-process validation against a fixed store snapshot."""

    def __init__(self, store: CertStore, max_path_length: int = 8):
        self.store = store
        self.max_path_length = max_path_length

    def validate(self, target, anchors, at, mode=RevocationMode.HARD_FAIL) -> PathValidationResult:
        return validate_pkc(target, self.store, ValidationOptions(anchors, at, max_path_length=self.max_path_length,
                                                                  revocation_mode=mode))


class RemoteCvs:
    """Validation delegated to a CVS over the wire; the server's revocation mode applies."""

    def __init__(self, config: CvsClientConfig):
        self.client = CvsClient(config)

    def validate(self, target, anchors, at, mode=RevocationMode.HARD_FAIL) -> PathValidationResult:
        return self.client.validate(target, ValidationOptions(anchors, at))
