"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
failures onto process exit statuses without inspecting messages.
"""


class GrassromError(Exception):
    exit_code = 1


class ValidationError(GrassromError, ValueError):
    exit_code = 2


class ConfigurationError(ValidationError):
    pass


class NumericalError(GrassromError, ArithmeticError):
    exit_code = 3


class RankDeficiencyError(NumericalError):
    def __init__(self, message, max_rank=None):
        super().__init__(message)
        self.max_rank = max_rank


class DegenerateSpectrumError(NumericalError):
    pass


class CutLocusError(NumericalError):
    def __init__(self, message, parameter=None):
        super().__init__(message)
        self.parameter = parameter


class DegenerateAlignmentError(NumericalError):
    pass


class InstabilityError(NumericalError):
    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class UndefinedErrorMetric(NumericalError):
    pass


class StorageError(GrassromError, OSError):
    exit_code = 4


class FormatError(StorageError):
    pass
