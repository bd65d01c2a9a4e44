from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime

from ..certs import Name, TrustAnchorSet
from .clock import Clock, SystemClock


class Status(enum.IntEnum):
    VALID = 0
    INVALID = 1
    UNKNOWN = 2


class ReasonCode(enum.IntEnum):
    OK = 0
    NO_PATH = 1
    SIGNATURE_INVALID = 2
    EXPIRED = 3
    NOT_YET_VALID = 4
    REVOKED = 5
    REVOCATION_UNAVAILABLE = 6
    BASIC_CONSTRAINTS = 7
    KEY_USAGE = 8
    POLICY_EMPTY = 9
    UNKNOWN_CRITICAL_EXT = 10
    PATH_TOO_LONG = 11
    NAME_CHAIN_BROKEN = 12


class RevocationMode(str, enum.Enum):
    HARD_FAIL = "hard-fail"
    SOFT_FAIL = "soft-fail"


class _AnyPolicy:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ANY"


ANY = _AnyPolicy()


@dataclass(frozen=True)
class ValidationOptions:
    anchors: TrustAnchorSet
    validation_time: datetime | None = None
    initial_policy_set: object = ANY
    max_path_length: int = 8
    revocation_mode: RevocationMode = RevocationMode.HARD_FAIL
    clock: Clock = field(default_factory=SystemClock, compare=False)

    def __post_init__(self):
        if self.max_path_length < 1:
            raise ValueError("max_path_length must be at least 1")
        if self.initial_policy_set is not ANY:
            object.__setattr__(self, "initial_policy_set", frozenset(self.initial_policy_set))
        object.__setattr__(self, "revocation_mode", RevocationMode(self.revocation_mode))

    def time(self) -> datetime:
        return self.validation_time if self.validation_time is not None else self.clock.now()


@dataclass(frozen=True)
class PathValidationResult:
    status: Status
    reason: ReasonCode
    chain: tuple = ()
    anchor_name: Name | None = None
    surviving_policies: tuple = ()
    warnings: tuple = ()
    detail: str = ""
    validated_at: datetime | None = None
    crls: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if (self.status == Status.VALID) != (self.reason == ReasonCode.OK):
            raise ValueError(f"inconsistent result {self.status.name}/{self.reason.name}")

    @property
    def valid(self) -> bool:
        return self.status == Status.VALID

    def verdict(self) -> tuple[Status, ReasonCode]:
        return self.status, self.reason

    def describe(self) -> str:
        text = f"{self.status.name} ({int(self.reason)} {self.reason.name})"
        return f"{text}: {self.detail}" if self.detail else text


def invalid(reason: ReasonCode, detail: str = "", **kw) -> PathValidationResult:
    return PathValidationResult(Status.INVALID, reason, detail=detail, **kw)


def unknown(reason: ReasonCode, detail: str = "", **kw) -> PathValidationResult:
    return PathValidationResult(Status.UNKNOWN, reason, detail=detail, **kw)
