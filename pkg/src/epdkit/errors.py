"""Exception hierarchy shared by all epdkit modules."""


class EPDError(Exception):
    """Base class for every error raised by epdkit."""


class SingularPointError(EPDError):
    """A kernel was evaluated at (or numerically at) one of its branch points."""


class CoincidentPointError(EPDError):
    """z and zb coincide, so logarithmic kernels are undefined."""


class ConvergenceError(EPDError):
    """An iterative procedure (quadrature doubling, Newton, corrector) did not converge."""


class DegenerateHessianError(EPDError):
    """The pure second derivative at a critical point is numerically zero."""


class CollapseError(ConvergenceError):
    """Newton iterates approached the real axis, where beta and conj(beta) merge."""


class MobiusPoleError(EPDError):
    """cz + d vanished in an Appell transformation."""


class GridError(EPDError):
    """A grid is too small or malformed for the requested finite differences."""


class NoRootError(EPDError):
    """A root-finding problem provably or numerically has no admissible root."""


class DomainError(EPDError):
    """An argument lies outside the domain of a density or map (e.g. rho <= 0)."""


class ConfigError(EPDError):
    """A CLI configuration or serialized object could not be parsed."""
