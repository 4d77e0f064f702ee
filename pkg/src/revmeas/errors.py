"""Exception hierarchy. Every error raised by the package derives from RevmeasError."""


class RevmeasError(ValueError):
    pass


class NotHermitian(RevmeasError):
    pass


class NotPositive(RevmeasError):
    pass


class TraceNotOne(RevmeasError):
    pass


class BadRank(RevmeasError):
    pass


class DimensionMismatch(RevmeasError):
    pass


class BadDistribution(RevmeasError):
    pass


class OutOfRange(RevmeasError):
    pass


class NotIdempotent(RevmeasError):
    pass


class NotOrthogonal(RevmeasError):
    pass


class NotComplete(RevmeasError):
    pass


class MixingOutOfRange(RevmeasError):
    pass


class ZeroProbabilityOutcome(RevmeasError):
    pass


class NotReversible(RevmeasError):
    pass


class DimensionTooLarge(RevmeasError):
    pass


class ConfigInvalid(RevmeasError):
    pass


class SchemaError(RevmeasError):
    pass
