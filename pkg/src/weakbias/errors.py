"""Exception and warning types for the weakbias package."""


class WeakBiasError(Exception):
    """Base class for all weakbias-specific errors."""


class ValidationError(WeakBiasError):
    """A constructed value violates one of its structural invariants."""


class InvalidParameterError(WeakBiasError, ValueError):
    """A parameter value is outside its documented domain."""


class InvalidStateError(WeakBiasError):
    """A state produced probabilities that cannot be repaired by clamping."""


class SupportMismatchError(WeakBiasError):
    """The reference distribution has mass where the model has none."""


class UninformativeModelError(WeakBiasError):
    """Fisher information (or a bias denominator) is too small to divide by."""


class UninformativeBasisError(WeakBiasError):
    """The measurement basis carries no first-order information about g."""


class DegeneratePostselectionError(WeakBiasError):
    """Postselection overlap or probability is below the defined threshold."""


class DegenerateProbeError(WeakBiasError):
    """Every measurement outcome has vanishing baseline probability."""


class SearchIntervalError(WeakBiasError):
    """The likelihood maximum sits on the search-interval boundary."""


class NumericalFailureError(WeakBiasError):
    """A numerical routine failed to converge or violated an internal check."""


class PerturbativeRegimeWarning(UserWarning):
    """A coupling exceeds the validity scale of the first-order expansion."""
