"""Exception types shared across the package."""


class HuShadowError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(HuShadowError):
    """A scenario file is malformed or violates a domain constraint."""


class HypothesisViolation(HuShadowError):
    """The data handed to a construction does not satisfy its preconditions."""


class DegenerateQuotient(HuShadowError):
    """A difference quotient is numerically zero; the error dynamics are singular."""


class NonContraction(HuShadowError):
    """The fixed-point iteration is not contracting (epsilon too large)."""


class UnsupportedFamily(HuShadowError):
    """The requested operation is not available for this map family."""
