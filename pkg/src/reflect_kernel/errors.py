"""Exception hierarchy shared by all modules."""


class ReflectKernelError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(ReflectKernelError, ValueError):
    pass


class RootSystemError(ReflectKernelError, ValueError):
    """A root system failed validation."""


class ClosureError(RootSystemError):
    pass


class DegenerateCheckVectorError(RootSystemError):
    pass


class MultiplicityError(RootSystemError):
    pass


class InconsistentRootSystemError(RootSystemError):
    pass


class NonFiniteClosureError(RootSystemError):
    pass


class OnWallError(ReflectKernelError, ValueError):
    """A point lies on a mirror hyperplane, so its chamber is undefined."""


class SingularityError(ReflectKernelError, ArithmeticError):
    pass


class UnsupportedCharacterError(ReflectKernelError, ValueError):
    pass


class ConfigError(ReflectKernelError):
    """Bad user configuration (CLI flags, JSON documents)."""


class SeriesConvergenceWarning(RuntimeWarning):
    pass
