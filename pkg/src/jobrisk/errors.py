"""Exception hierarchy.

Every error raised on purpose by the package derives from ``JobRiskError`` so
callers (and the CLI) can separate data/model problems from programming bugs.
"""


class JobRiskError(Exception):
    """Base class for all package errors."""


# -- ingestion / design -------------------------------------------------------

class DataError(JobRiskError):
    pass


class MissingColumn(DataError):
    pass


class BadIscoCode(DataError):
    pass


class BadEnumValue(DataError):
    pass


class AllMissingField(DataError):
    pass


class EmptyDesign(DataError):
    pass


class RankDeficient(DataError):
    pass


class ZeroVariance(DataError):
    pass


class TooFewPoints(DataError):
    pass


# -- labels -------------------------------------------------------------------

class LabelError(JobRiskError):
    pass


class NoVotes(LabelError):
    pass


class DuplicateLabel(LabelError):
    pass


# -- estimation ---------------------------------------------------------------

class FitError(JobRiskError):
    pass


class Separation(FitError):
    pass


class Singular(FitError):
    pass


class NoConvergence(FitError):
    pass


class OneClassOnly(FitError):
    pass


class SingularCovariance(FitError):
    pass


class FeatureMismatch(FitError):
    pass


class DegenerateSplit(JobRiskError):
    pass


class InvalidConfig(JobRiskError):
    pass
