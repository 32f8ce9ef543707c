"""Exception hierarchy shared by all dilkit modules."""


class DilkitError(Exception):
    """Base class for every error raised by dilkit."""


class InputError(DilkitError, ValueError):
    """Bad or inconsistent input data (CLI exit code 2)."""


class ComputationError(DilkitError, ArithmeticError):
    """A numerical procedure failed on otherwise valid input (CLI exit code 3)."""


# netcore
class SingularConversion(ComputationError):
    pass


class GridMismatch(InputError):
    pass


# touchstone
class TouchstoneError(InputError):
    pass


class MalformedOptionLine(TouchstoneError):
    pass


class NonMonotoneFrequency(TouchstoneError):
    pass


class WrongColumnCount(TouchstoneError):
    pass


class UnsupportedParameter(TouchstoneError):
    pass


class UnsupportedVersion(TouchstoneError):
    pass


# modesolver
class NoConvergence(ComputationError):
    pass


# deembed
class DegenerateLengths(ComputationError):
    pass


class SingularTMatrix(ComputationError):
    pass


class NonPassiveEigenvalue(ComputationError):
    pass


class NonMonotoneResult(ComputationError):
    pass


# discontinuity
class InsufficientRadii(InputError):
    pass


class AllNonPositive(ComputationError):
    pass


class NonDecayingFit(ComputationError):
    pass


class FrequencyOutOfRange(InputError):
    pass


# synth
class NonPassiveSpec(InputError):
    pass
