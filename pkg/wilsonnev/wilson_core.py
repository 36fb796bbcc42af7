"""
Wilson operator calculus on the square-root lattice.

Points are carried as `LatticeCoord` values, i.e. a root z of x together
with the shift c and an integer count of half steps, so that
x^{+(m)} = (z + m c/2)^2 is exact and consistent across the branch cut.
The Wilson divided difference is

    D_{W,c} f(x) = (f(x^+) - f(x^-)) / (x^+ - x^-),   x^+ - x^- = 2 c z,

and the averaging operator is A_{W,c} f(x) = (f(x^+) + f(x^-)) / 2. The
default shift c = i gives the classical Wilson operator.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace

import numpy as np

from wilsonnev.errors import (
    NonDifferentiableError,
    ParameterError,
    PoleAtShiftError,
)
from wilsonnev.logger import get_logger

log = get_logger(__name__)

Evaluator = Callable[[complex | np.ndarray], complex | np.ndarray]

DEFAULT_SHIFT = 1j


def sqrt_with_cut(
    x: complex | np.ndarray,
    c: complex = DEFAULT_SHIFT,
) -> complex | np.ndarray:
    """
    Square root with the line through 0 and c as branch cut.

    The returned root z satisfies Re(z * conj(v)) >= 0 with
    v = -i c/|c|; for c = i this is Re z >= 0. Points on the cut are taken
    from the side of increasing argument, so sqrt_with_cut(-1) = i.
    """
    if c == 0:
        msg = "lattice shift c must be nonzero"
        raise ParameterError(msg)
    v = -1j * c / abs(c)
    arr = np.asarray(x, dtype=complex)
    q = arr if v == 1 else arr / (v * v)
    # signed zero on the cut
    q = q.real + 1j * (q.imag + 0.0)
    root = np.sqrt(q)
    if v != 1:
        root = v * root
    return complex(root) if root.ndim == 0 else root


@dataclass(frozen=True)
class LatticeCoord:
    """
    A point of the Wilson lattice in square-root coordinates.

    Attributes
    ----------
    base : complex
        Root of the anchor point.
    shift : complex
        Lattice shift c (nonzero); one half step moves z by c/2.
    steps : int
        Number of half steps taken from the anchor.
    """

    base: complex
    shift: complex = DEFAULT_SHIFT
    steps: int = 0

    def __post_init__(self) -> None:
        if self.shift == 0:
            msg = "lattice shift c must be nonzero"
            raise ParameterError(msg)

    @property
    def z(self) -> complex:
        """Square-root coordinate."""
        return self.base + self.steps * self.shift / 2

    @property
    def x(self) -> complex:
        """Point of the x-plane."""
        z = self.z
        return z * z

    def plus(self, m: int = 1) -> LatticeCoord:
        """Point x^{+(m)}."""
        return replace(self, steps=self.steps + m)

    def minus(self, m: int = 1) -> LatticeCoord:
        """Point x^{-(m)}."""
        return replace(self, steps=self.steps - m)

    @classmethod
    def from_x(cls, x: complex, shift: complex = DEFAULT_SHIFT) -> LatticeCoord:
        """Anchor at x using the root selected by `sqrt_with_cut`."""
        return cls(sqrt_with_cut(complex(x), shift), shift)

    @classmethod
    def from_z(cls, z: complex, shift: complex = DEFAULT_SHIFT) -> LatticeCoord:
        """Anchor at an explicitly chosen root."""
        return cls(complex(z), shift)


def shift(p: LatticeCoord, m: int) -> LatticeCoord:
    """Move p by m half steps: z becomes z + m c/2."""
    return p.plus(m)


@dataclass(frozen=True)
class WilsonEvaluation:
    """A Wilson difference together with the lattice points it used."""

    value: complex
    at: LatticeCoord
    used_points: tuple[LatticeCoord, ...] = field(default_factory=tuple)


def _finite_or_raise(value: complex, where: str) -> complex:
    if not np.all(np.isfinite(value)):
        msg = f"evaluator is not finite at {where}"
        raise PoleAtShiftError(msg)
    return value


def apply_DW_lattice(
    g: Evaluator,
    p: LatticeCoord,
) -> complex:
    """
    Wilson difference of a function given in square-root coordinates.

    Returns (g(z + c/2) - g(z - c/2)) / (2 c z). This is the form used on
    branch solutions that are only defined on one side of the cut.
    """
    z, c = p.z, p.shift
    if z == 0:
        msg = "Wilson difference at the origin needs apply_DW_origin"
        raise ParameterError(msg)
    upper = _finite_or_raise(g(p.plus().z), f"z={p.plus().z}")
    lower = _finite_or_raise(g(p.minus().z), f"z={p.minus().z}")
    return complex((upper - lower) / (2 * c * z))


def apply_DW(f: Evaluator, p: LatticeCoord) -> complex:
    """
    Wilson divided difference D_{W,c} f at p.

    The value only depends on x = z^2, not on the root chosen.

    Raises
    ------
    PoleAtShiftError
        If f is not finite at x^+ or x^-.
    ParameterError
        If p.z = 0; see `apply_DW_origin`.
    """
    return apply_DW_lattice(lambda w: f(w * w), p)


def evaluate_dw(f: Evaluator, p: LatticeCoord) -> WilsonEvaluation:
    """`apply_DW` with the lattice points it used."""
    return WilsonEvaluation(apply_DW(f, p), p, (p.plus(), p.minus()))


def apply_DW_origin(
    f: Evaluator,
    derivative: Evaluator | None = None,
    c: complex = DEFAULT_SHIFT,
    h: float = 1e-3,
    rtol: float = 1e-4,
) -> complex:
    """
    Value of D_{W,c} f at x = 0, which is the derivative f'(c^2/4).

    Parameters
    ----------
    f : callable
        Evaluator.
    derivative : callable, optional
        Exact derivative of f; used when given.
    c : complex
        Lattice shift.
    h : float
        Step of the central difference stencil when no derivative is given.
    rtol : float
        Allowed relative disagreement of the estimates at h and h/2.

    Raises
    ------
    NonDifferentiableError
        If the two central differences disagree beyond rtol.
    """
    x0 = c * c / 4
    if derivative is not None:
        return complex(derivative(x0))
    coarse = (f(x0 + h) - f(x0 - h)) / (2 * h)
    fine = (f(x0 + h / 2) - f(x0 - h / 2)) / h
    if not (np.isfinite(coarse) and np.isfinite(fine)):
        msg = f"evaluator is not finite near x={x0}"
        raise PoleAtShiftError(msg)
    if abs(coarse - fine) > rtol * max(1.0, abs(fine)):
        msg = (
            f"central differences disagree at x={x0}: "
            f"{complex(coarse)} vs {complex(fine)}"
        )
        raise NonDifferentiableError(msg)
    return complex((4 * fine - coarse) / 3)


def apply_AW(f: Evaluator, p: LatticeCoord) -> complex:
    """Wilson average (f(x^+) + f(x^-)) / 2 at p."""
    upper = _finite_or_raise(f(p.plus().x), f"x^+={p.plus().x}")
    lower = _finite_or_raise(f(p.minus().x), f"x^-={p.minus().x}")
    return complex((upper + lower) / 2)


def dw_iter_values(
    f: Evaluator,
    z: complex | np.ndarray,
    k: int,
    c: complex = DEFAULT_SHIFT,
) -> np.ndarray:
    """
    k-fold Wilson difference on the symmetric stencil, vectorised over z.

    F_0(w) = f(w^2) and F_{j+1}(w) = (F_j(w + c/2) - F_j(w - c/2)) / (2cw),
    so only the points z + j c/2, j = -k, -k+2, ..., k, are evaluated.

    Raises
    ------
    PoleAtShiftError
        If f is not finite at a stencil point; the message names j.
    ParameterError
        If an inner stencil point is the origin.
    """
    if k < 0:
        msg = f"iteration count must be nonnegative, got {k}"
        raise ParameterError(msg)
    z = np.asarray(z, dtype=complex)
    level = {}
    for j in range(-k, k + 1, 2):
        w = z + j * c / 2
        value = np.asarray(f(w * w), dtype=complex)
        if not np.all(np.isfinite(value)):
            msg = f"evaluator is not finite on the stencil at j={j}"
            raise PoleAtShiftError(msg)
        level[j] = value
    for depth in range(k - 1, -1, -1):
        following = {}
        for j in range(-depth, depth + 1, 2):
            w = z + j * c / 2
            if np.any(w == 0):
                msg = f"stencil point j={j} is the origin at level {k - depth}"
                raise ParameterError(msg)
            following[j] = (level[j + 1] - level[j - 1]) / (2 * c * w)
        level = following
    return level[0]


def apply_DW_iter(f: Evaluator, p: LatticeCoord, k: int) -> complex:
    """
    Iterated Wilson difference D_{W,c}^k f at p.

    Raises
    ------
    PoleAtShiftError
        If f is not finite at a stencil point; the message names j.
    """
    if k < 1:
        msg = f"apply_DW_iter needs k >= 1, got {k}"
        raise ParameterError(msg)
    return complex(dw_iter_values(f, p.z, k, p.shift))


@dataclass(frozen=True)
class CShiftReport:
    """Errors |D_{W,c} f(x) - f'(x)| along a sequence of shifts."""

    x: complex
    shifts: tuple[float, ...]
    errors: tuple[float, ...]
    order: float


def cshift_limit_check(
    f: Evaluator,
    x: complex,
    c_sequence: Sequence[float],
    derivative: Evaluator | None = None,
    h: float = 1e-4,
) -> CShiftReport:
    """
    Convergence of the c-shift Wilson difference to the derivative.

    Parameters
    ----------
    f : callable
        Evaluator holomorphic near x.
    x : complex
        Evaluation point off the cuts of every shift.
    c_sequence : sequence of float
        Shifts decreasing to 0.
    derivative : callable, optional
        Exact derivative; otherwise a Richardson-extrapolated central
        difference with step h.

    Returns
    -------
    CShiftReport
        ``order`` is the least-squares slope of log error against log c
        over the nonzero errors, inf when every error vanishes.
    """
    x = complex(x)
    if derivative is not None:
        reference = complex(derivative(x))
    else:
        coarse = (f(x + h) - f(x - h)) / (2 * h)
        fine = (f(x + h / 2) - f(x - h / 2)) / h
        reference = complex((4 * fine - coarse) / 3)

    shifts = tuple(float(c) for c in c_sequence)
    errors = tuple(
        abs(apply_DW(f, LatticeCoord.from_x(x, c)) - reference)
        for c in shifts
    )
    scale = 1e-14 * max(1.0, abs(reference))
    usable = [(c, e) for c, e in zip(shifts, errors, strict=True) if e > scale]
    if len(usable) < 2:
        order = math.inf
    else:
        log_c, log_e = np.log(np.array(usable)).T
        order = float(np.polyfit(log_c, log_e, 1)[0])
    msg = f"c-shift limit at x={x}: order {order:.3f}"
    log.debug(msg)
    return CShiftReport(x, shifts, errors, order)
