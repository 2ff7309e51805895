"""Exception hierarchy. Every domain error derives from ``HRVError``."""


class HRVError(ValueError):
    """Base class for data/domain errors (CLI exit code 1)."""


class NonPositiveInterval(HRVError):
    pass


class InvalidAge(HRVError):
    pass


class EmptySeries(HRVError):
    pass


class DegenerateSpec(HRVError):
    pass


class TooShort(HRVError):
    pass


class DegenerateSeries(HRVError):
    pass


class NonPositiveTolerance(HRVError):
    pass


class NoTemplateMatches(HRVError):
    pass


class UnsupportedAlpha(HRVError):
    pass


class DfOutOfRange(HRVError):
    pass


class TooFewSamples(HRVError):
    pass


class IdenticalDistributions(HRVError):
    pass


class NonReciprocal(HRVError):
    pass


class NonPositiveEntry(HRVError):
    pass


class EmptyClass(HRVError):
    pass


class AllFullyOverlapping(HRVError):
    pass


class DimensionMismatch(HRVError):
    pass


class EmptyTrainingSet(HRVError):
    pass


class InsufficientClassMembers(HRVError):
    pass


class RankDeficient(HRVError):
    pass


class ParseError(HRVError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
