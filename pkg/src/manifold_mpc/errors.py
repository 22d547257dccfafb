"""Exception types shared across the package."""


class OutOfChartError(ValueError):
    """A perturbation or point pair left the local chart where the
    retraction/lifting maps are invertible (e.g. rotation angle at pi,
    antipodal sphere points)."""


class TrackingLostError(RuntimeError):
    """The current state is too far from the reference for the error-state
    parametrization to be valid. Recovery policy is up to the caller."""


class InfeasibleReferenceError(ValueError):
    """A reference trajectory cannot be realized by the system model
    (thrust singularity, rate demand beyond bounds, ...)."""


class IllConditionedWeightsError(ValueError):
    """A weight matrix combination produced a Hessian that cannot be
    factorized."""


class DegenerateSampleError(ValueError):
    """Surface samples do not determine a unique quadratic fit."""
