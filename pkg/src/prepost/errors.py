"""Exception hierarchy.

Every error carries the CLI exit code it maps to, so the command-line
harness can translate any failure without a lookup table of its own.
"""


class PrepostError(Exception):
    exit_code = 1


class ParseError(PrepostError):
    exit_code = 2

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class ValidationError(PrepostError):
    exit_code = 3

    def __init__(self, key, message=None):
        super().__init__(message or key)
        self.key = key


class NumericError(PrepostError):
    exit_code = 4


class IoError(PrepostError):
    exit_code = 5


# qcore
class ZeroVector(NumericError):
    pass


class DimensionMismatch(NumericError):
    pass


class NotHermitian(NumericError):
    pass


# weakmeas
class OrthogonalPostSelection(NumericError):
    pass


class GridTooSmall(NumericError):
    pass


class EmptyDistribution(NumericError):
    pass


class NoAcceptedTrials(NumericError):
    pass


# timemachine
class InfeasibleBand(NumericError):
    pass


class ZeroDesign(NumericError):
    pass


class PostSelectionNeverSucceeds(NumericError):
    pass


class EmptyInput(NumericError):
    pass


class IllConditioned(UserWarning):
    """Warning: the band design matrix has condition number above 1e12."""


# suter
class VanishingTransmission(NumericError):
    pass


class ModeGridMismatch(NumericError):
    pass


# cli
class EmptyRecords(IoError):
    pass
