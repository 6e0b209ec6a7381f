"""Exception hierarchy.

Every error raised on purpose by the library derives from ``KuoSpectraError``
and carries an ``exit_code`` that the command line front end passes through.
"""


class KuoSpectraError(Exception):
    exit_code = 3


class ConfigError(KuoSpectraError):
    """Malformed input file or unusable option combination."""
    exit_code = 2


class UnsupportedProfileError(ConfigError):
    pass


class DomainError(KuoSpectraError, ValueError):
    """A coordinate lies outside the channel."""
    exit_code = 2


class ParameterError(KuoSpectraError, ValueError):
    """A parameter violates a precondition of the requested operation."""
    exit_code = 4


class AssumptionError(KuoSpectraError):
    """The profile fails a structural hypothesis the analysis relies on."""
    exit_code = 4


class NumericalError(KuoSpectraError):
    exit_code = 3


class ResolutionError(NumericalError):
    pass


class BranchAmbiguityError(NumericalError):
    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = tuple(candidates)


class IndeterminateLimitError(NumericalError):
    def __init__(self, message, samples=()):
        super().__init__(message)
        self.samples = tuple(samples)


class ProximityError(NumericalError):
    pass


class SpectrumOverflowError(NumericalError):
    def __init__(self, message, count):
        super().__init__(message)
        self.count = count


class DegeneratePointError(NumericalError):
    pass


class ContradictionError(NumericalError):
    pass


class PrecisionError(NumericalError):
    pass


class ContinuationError(NumericalError):
    pass


class ValidationError(NumericalError):
    pass
