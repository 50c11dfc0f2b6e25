"""Exception hierarchy shared by all cocycle_lab modules."""


class CocycleLabError(Exception):
    """Base class for every error raised by this package."""


class SingularMatrixError(CocycleLabError):
    """Matrix inversion requested for a (numerically) singular matrix."""


class NoConvergenceError(CocycleLabError):
    """An iterative kernel (eigensolver, ODE stepper) hit its iteration cap."""


class CenterMismatchError(CocycleLabError):
    """Series operands are expanded about different centers."""


class NotInvertibleError(CocycleLabError):
    """Series reversion needs a nonzero linear coefficient."""


class NonzeroConstantTermError(CocycleLabError):
    """Series exponential requires a vanishing constant term."""


class NoInteriorFixedPointError(CocycleLabError):
    """Fixed-point search failed or landed on/outside the unit circle."""


class ZeroRateError(CocycleLabError):
    """The attraction rate -f'(z0) is numerically zero."""


class OutOfDomainError(CocycleLabError):
    """Evaluation point lies outside the open unit disk."""


class DomainEscapeError(CocycleLabError):
    """An integrated trajectory left the unit disk (invalid generator input)."""


class SamplePointIsFixedPointError(CocycleLabError):
    """The spatial-derivative identity needs f(z) != 0 at the sample point."""


class VNotInvertibleError(CocycleLabError):
    """The time-averaged cocycle V(t0, z) is not invertible; retry with smaller t0."""


class NotInvariantError(CocycleLabError):
    """A sampled trajectory exited the disk the growth report assumes invariant."""


class NotResonantError(CocycleLabError):
    """Sharpness witness requested at an order that is not resonant."""


class PoleOnPathError(CocycleLabError):
    """The generator denominator vanishes on the integration segment."""


class TailNotConvergingError(CocycleLabError):
    """The improper linearization integral has no decaying tail (Re rate <= 0)."""


class OutsideConvergenceRegionError(CocycleLabError):
    """Reconstruction sample lies outside the certified convergence region."""


class ScenarioParseError(CocycleLabError):
    """Scenario file is malformed or inconsistent."""
