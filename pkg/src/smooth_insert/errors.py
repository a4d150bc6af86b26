"""Exception hierarchy shared by all modules.

Every failure mode that callers are expected to branch on gets its own
class; the CLI maps them to exit codes.
"""


class SmoothInsertError(Exception):
    """Base class for all package errors."""


class InputError(SmoothInsertError):
    """Malformed or inconsistent input data (bad file, bad shape, empty mask)."""


class DomainError(SmoothInsertError):
    """A point or sample lies outside the domain where an operation is defined."""


class RangeError(SmoothInsertError):
    """A grid index or offset leaves the valid index range."""


class EstimationError(SmoothInsertError):
    """A regularity estimate has no valid sample pairs to work with."""


class RankError(SmoothInsertError):
    """Sample cloud is affinely degenerate (collinear / coplanar)."""


class PreconditionError(SmoothInsertError):
    """A documented operation precondition does not hold for the given inputs."""


class ModulationError(SmoothInsertError):
    """Convexification failed: the modulation constant escalated past its cap."""


class CoverError(SmoothInsertError):
    """A partition-of-unity cover leaves part of the target region uncovered."""


class ResolutionError(SmoothInsertError):
    """The grid is too coarse to resolve the requested radius or set distance."""


class LevelError(SmoothInsertError):
    """No candidate level passes the regular-level gradient floor."""
