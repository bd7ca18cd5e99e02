"""Error types raised by the simulation and retrieval layers"""

from typing import Optional


class SubordinationLabError(Exception):
    """Base class for every error raised by the library"""


class ParameterError(SubordinationLabError, ValueError):
    """A parameter lies outside its admissible range"""


class RangeError(SubordinationLabError, ValueError):
    """An evaluation point lies outside the horizon of a path"""


class HorizonError(SubordinationLabError):
    """A sampled process was evaluated past the end of its grid"""


class DomainError(SubordinationLabError):
    """A value that must be strictly positive was not"""


class UnsupportedError(SubordinationLabError):
    """The requested normalization/alpha combination has no sampler"""


class TruncationError(SubordinationLabError):
    """
    The jump cutoff of a path is too coarse for the requested threshold.

    Args:
        cutoff: Cutoff the path was sampled with
        required: Largest cutoff that keeps the count exact
    """

    def __init__(self, cutoff: float, required: float, message: Optional[str] = None):
        self.cutoff = cutoff
        self.required = required
        super().__init__(
            message or f"cutoff {cutoff:.6g} exceeds the exact-count bound {required:.6g}"
        )
