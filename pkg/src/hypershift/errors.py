"""Exception hierarchy and warning categories.

Two error families matter to callers (and to the CLI exit codes):

* ``ValidationError`` -- the input was malformed or outside a documented
  precondition (bad parameters, points outside the ball, poles, ...).
* ``ToleranceError`` -- the inputs were fine but a numerical routine could
  not certify the requested accuracy (quadrature tails, stiff ODE steps,
  divergent series, ill-conditioned solves).
"""


class HypershiftError(Exception):
    """Base class for all package errors."""


class ValidationError(HypershiftError, ValueError):
    """Invalid input or violated precondition."""


class DomainError(ValidationError):
    """Geometric argument outside its domain (|w| >= 1, t >= -1/2, ...)."""


class PoleError(ValidationError):
    """Special-function argument at or too close to a pole."""


class ToleranceError(HypershiftError, ArithmeticError):
    """A numerical routine could not certify the requested tolerance."""


class DivergenceError(ToleranceError):
    """A series or iteration failed to converge within its cap."""


class StiffnessError(ToleranceError):
    """ODE step size collapsed below the hard floor."""


class IllConditionedError(ToleranceError):
    """Linear system condition estimate exceeds the safe threshold."""


class TailNotConvergedWarning(UserWarning):
    """Mode tail of a phase-shift spectrum is not yet negligible."""


class TailDominatedWarning(UserWarning):
    """The last decile of a mode sum contributes more than 1% of the total."""
