"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """Input lies outside the mathematical domain of an operation.

    Carries an optional integration step index when raised mid-rollout.
    """

    def __init__(self, message, step=None):
        if step is not None:
            message = f"{message} (at step {step})"
        super().__init__(message)
        self.step = step


class TooFewSamples(ValueError):
    """A demonstration has fewer samples than fitting requires."""


class NonMonotonicTime(ValueError):
    """Timestamps are not strictly increasing."""


class NonUniformStamps(ValueError):
    """Operation requires uniformly spaced timestamps."""


class DegenerateScene(ValueError):
    """Scene geometry does not determine the construction (e.g. chord parallel to the surface normal)."""


class DegenerateRegressionWarning(UserWarning):
    """A regression denominator vanished; the affected weights were set to zero."""


class DegenerateScalingWarning(UserWarning):
    """An orientation scaling diagonal vanished; that axis keeps zero weights."""


class MissingReferenceWarning(UserWarning):
    """A generality score needed a reference trajectory that was not supplied."""
