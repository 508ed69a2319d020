"""Shared exception taxonomy.

Every failure mode that callers are expected to branch on gets its own
class; anything else is a plain ValueError/RuntimeError and means a bug.
"""


class TegnasError(Exception):
    """Base class for all package-specific errors."""


# ---- linear algebra ----

class NonSquare(TegnasError):
    pass


class NotSymmetric(TegnasError):
    pass


class NoConvergence(TegnasError):
    pass


class SingularSystem(TegnasError):
    pass


class TooFewPoints(TegnasError):
    pass


class DegenerateCovariance(TegnasError):
    """All points identical; pca_fit returns a flagged result instead of
    raising, but the name is kept here so callers can reference one place."""


class ZeroFanIn(TegnasError):
    pass


# ---- architectures and networks ----

class InvalidArch(TegnasError):
    pass


class UnknownOp(TegnasError):
    pass


class ShapeMismatch(TegnasError):
    pass


class SamplingExhausted(TegnasError):
    pass


class ParseError(TegnasError):
    """Malformed architecture string. Carries the byte offset of the first
    offending character."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


# ---- indicators ----

class DegenerateKernel(TegnasError):
    pass


class NonFiniteGradient(TegnasError):
    pass


# ---- search / landscape ----

class NoCheckpoint(TegnasError):
    pass


# ---- bench ----

class LengthMismatch(TegnasError):
    pass


class AllTied(TegnasError):
    pass


class TooFewArchs(TegnasError):
    pass


class EmptySubset(TegnasError):
    pass


class UnknownArch(TegnasError):
    pass


class DivergedTraining(TegnasError):
    pass


class ConfigError(TegnasError):
    pass
