"""Exception types shared across the package."""


class CircleMixError(Exception):
    """Base class for every error raised by this package."""


class ConstructionError(CircleMixError):
    """A measure, table or chain violates a structural invariant."""


class SpecError(CircleMixError):
    """A measure spec file or run configuration is malformed.

    ``path`` points at the offending field, e.g. ``components[1].weight``.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")


class MemoryGuardError(CircleMixError):
    """A requested table or grid exceeds the configured size guard."""


class DivergentSeriesError(CircleMixError):
    """The one-sided ergodic Hilbert transform diverges at a frequency."""

    def __init__(self, frequency: int):
        self.frequency = frequency
        super().__init__(f"series diverges at frequency {frequency}")


class ConzeUndefinedError(CircleMixError):
    """The aperiodicity ratio is undefined because some |coefficient| = 1."""

    def __init__(self, frequency: int):
        self.frequency = frequency
        super().__init__(
            f"ratio undefined (not strictly aperiodic at n={frequency})"
        )


class ZafranPremiseError(CircleMixError):
    """The summability test needs coefficients tending to zero."""


class SamplingError(CircleMixError):
    """The measure cannot be sampled with the available machinery."""


class GridBuildError(CircleMixError):
    """Cell masses cannot be produced at the requested resolution."""

    def __init__(self, message: str, required_stage: int | None = None):
        self.required_stage = required_stage
        super().__init__(message)
