"""Exceptions raised by the wilsonnev package.

Every error derives from `WilsonNevError`; the command line maps
`ConfigError` to exit code 2 and every other `WilsonNevError` to exit
code 3.
"""


class WilsonNevError(Exception):
    """Base class of all wilsonnev errors."""


class ParameterError(WilsonNevError, ValueError):
    """A parameter lies in an excluded set or is degenerate."""


class GammaPoleError(ParameterError):
    """A gamma argument sits on a nonpositive integer."""


class DivergenceError(WilsonNevError):
    """A series was requested outside its domain of convergence."""


class StripError(WilsonNevError, ValueError):
    """Argument outside the strip of an integral representation."""


class PoleAtShiftError(WilsonNevError):
    """The evaluator is infinite at a point of the shift stencil."""


class NonDifferentiableError(WilsonNevError):
    """Finite-difference derivative estimates disagree."""


class EvaluatorRequiredError(WilsonNevError):
    """The operation needs an evaluator but the model is divisor-only."""


class MissingDivisorError(WilsonNevError):
    """The divisor needed by an operation is not declared."""


class ContourError(WilsonNevError):
    """A declared divisor lies on or too close to the contour."""


class NudgeError(ContourError):
    """Radius nudging did not move the circle off the divisors."""


class DegenerateGridError(WilsonNevError, ValueError):
    """The radius grid is too short for the requested fit."""


class IdentityViolationError(WilsonNevError):
    """A fixture identity does not hold at the sampled points."""


class NotASolutionError(WilsonNevError):
    """The supplied function does not solve the equation."""


class ConfigError(WilsonNevError, ValueError):
    """Invalid run configuration or command-line usage."""
