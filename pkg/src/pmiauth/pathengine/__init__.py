"""Path processing engine: construction, validation, status, policy and time."""

from .build import CandidatePath, build_path, path_exists
from .clock import Clock, FixedClock, SystemClock
from .policy import intersect_policies
from .results import (
    ANY,
    PathValidationResult,
    ReasonCode,
    RevocationMode,
    Status,
    ValidationOptions,
)
from .status import RevocationState, RevocationStatus, check_revocation
from .validate import validate_path, validate_pkc
