"""Exception types shared across the package.

Physics errors (unstable dynamics, non-cooling configurations, failed
inversions) map to CLI exit code 1; input/configuration problems map to
exit code 2.
"""


class SqzCoolError(Exception):
    """Base class for all package errors."""


class NotCooling(SqzCoolError):
    """Drive is not red-detuned (no net optical damping); occupancy undefined."""


class DiscriminantNegative(SqzCoolError):
    """Squeezing below the critical value: the detuning pair does not exist."""


class NoConvergence(SqzCoolError):
    """Self-consistent (fixed-point) iteration failed to converge."""


class Unstable(SqzCoolError):
    """Linearized dynamics has a growing mode; no stationary spectrum exists."""


class NonConvergent(SqzCoolError):
    """Iterative refinement (integration or least-squares fit) did not converge."""


class NotLorentzian(SqzCoolError):
    """Lineshape is too asymmetric (Fano) for Lorentzian sideband analysis."""


class NoSolution(SqzCoolError):
    """State inversion has no root with nonnegative squeezing parameters."""


class IllConditioned(SqzCoolError):
    """State inversion Jacobian is numerically singular."""


class ConfigError(SqzCoolError):
    """Invalid run configuration or malformed input file."""
