"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems -> 1,
numerical instability -> 2, snapshot/output I/O -> 3.
"""


class DiracFluidError(Exception):
    """Base class for all library errors."""


class ConfigError(DiracFluidError):
    """Invalid configuration, scenario, or parameter input."""


class GridError(ConfigError):
    """Grid construction rejected (point counts, CFL bound, axis count)."""


class NumericalInstabilityError(DiracFluidError):
    """Time stepping aborted because field growth exceeded the safety limits."""


class SnapshotIOError(DiracFluidError):
    """Field snapshot file missing, unreadable, or inconsistent with the grid."""
