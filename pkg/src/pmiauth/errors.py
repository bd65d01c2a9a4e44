"""Exception hierarchy shared across the package."""


class PmiError(Exception):
    pass


# --- DER codec -------------------------------------------------------------

class DerError(PmiError, ValueError):
    """Input is not valid under the supported DER subset."""


class Truncated(DerError):
    pass


class NonCanonicalLength(DerError):
    pass


class UnsupportedTag(DerError):
    pass


class NestingTooDeep(DerError):
    pass


class MalformedContent(DerError):
    pass


class MalformedTime(MalformedContent):
    pass


class LengthTooLarge(DerError):
    pass


class TrailingData(DerError):
    pass


# --- records ---------------------------------------------------------------

class ProfileViolation(PmiError, ValueError):
    """Well-formed DER that does not fit the certificate/AC/CRL/message profile."""


class UnrecognizedAlgorithm(PmiError):
    """The signature algorithm is not registered; the caller cannot judge."""


# --- wire ------------------------------------------------------------------

class ProtocolViolation(PmiError):
    pass


class EnvelopeSignatureInvalid(ProtocolViolation):
    pass


class CvsTimeout(PmiError, TimeoutError):
    pass


# --- configuration / tooling -----------------------------------------------

class PolicyError(PmiError, ValueError):
    pass


class SpecError(PmiError, ValueError):
    pass
