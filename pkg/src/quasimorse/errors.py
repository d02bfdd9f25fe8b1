"""Exception hierarchy shared by all stages."""


class QuasiMorseError(Exception):
    """Base class for every error raised by the package."""


class InvalidInputError(QuasiMorseError, ValueError):
    pass


class EmptySpaceError(QuasiMorseError):
    """The discretization has no free degrees of freedom."""


class AssemblyError(QuasiMorseError):
    def __init__(self, message, smallest_eigenvalue=None):
        super().__init__(message)
        self.smallest_eigenvalue = smallest_eigenvalue


class NoConvergenceError(QuasiMorseError):
    def __init__(self, message, last_iterate=None, iterations=0):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.iterations = iterations


class DegenerateSplittingError(QuasiMorseError):
    def __init__(self, message, near_zero=()):
        super().__init__(message)
        self.near_zero = tuple(near_zero)


class ConstructionError(QuasiMorseError):
    pass


class IntegratorError(QuasiMorseError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class PreconditionError(QuasiMorseError, ValueError):
    pass


class EstimationError(QuasiMorseError):
    pass


class ClassificationConflictError(QuasiMorseError):
    pass


class ShootingBracketError(QuasiMorseError):
    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class IncompleteDataError(QuasiMorseError):
    pass


class IntegrityError(QuasiMorseError):
    def __init__(self, message, degrees=None):
        super().__init__(message)
        self.degrees = degrees


class ConfigError(QuasiMorseError):
    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
