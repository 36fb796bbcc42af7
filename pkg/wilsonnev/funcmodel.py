"""
Meromorphic-function data model and the catalog of example functions.

A `MeromorphicModel` bundles an evaluator (and a log-space evaluator, so
that circles of radius 1e6 do not overflow) with declared zero and pole
divisors and a declared order. Divisors come as `DivisorStream` objects
built from explicit lists and from lattice families
x_k = (base + step*k)^2, which is the shape of every infinite divisor in
the catalog.
"""

from __future__ import annotations

import cmath
import json
import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Literal

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import special

from wilsonnev.errors import (
    ContourError,
    DegenerateGridError,
    EvaluatorRequiredError,
    MissingDivisorError,
    ParameterError,
)
from wilsonnev.logger import get_logger
from wilsonnev.specfun import log_hyperbolic_gamma, trigamma_shifted
from wilsonnev.wilson_core import DEFAULT_SHIFT, Evaluator, sqrt_with_cut

log = get_logger(__name__)

Kind = Literal["zero", "pole"]
INFINITY = complex(math.inf, 0.0)
MERGE_TOLERANCE = 1e-9
POLE_FLAG = complex(math.inf, 0.0)


def is_infinite(a: complex | None) -> bool:
    """True for the point at infinity (None or any infinite complex)."""
    return a is None or cmath.isinf(a)


# ---------------------------------------------------------------------------
# divisors


@dataclass(frozen=True)
class Divisor:
    """A zero or pole with multiplicity; ``root`` is an exact square root."""

    location: complex
    multiplicity: int
    kind: Kind = "zero"
    root: complex | None = None

    def __post_init__(self) -> None:
        if self.multiplicity < 1:
            msg = f"multiplicity must be >= 1, got {self.multiplicity}"
            raise ParameterError(msg)


@dataclass(frozen=True)
class LatticeFamily:
    """
    Divisors at (base + step*k)^2 for k >= start.

    The multiplicity at index k is multiplicity + growth*(k - start).
    """

    base: complex
    step: complex
    multiplicity: int = 1
    growth: int = 0
    start: int = 0
    kind: Kind = "zero"

    def mult(self, k: int) -> int:
        return self.multiplicity + self.growth * (k - self.start)

    def root(self, k: int) -> complex:
        return self.base + self.step * k

    def index_bound(self, radius: float) -> int:
        """First index K such that |x_k| > radius for every k >= K."""
        quad = abs(self.step) ** 2
        lin = (self.base * self.step.conjugate()).real
        const = abs(self.base) ** 2 - radius
        disc = lin * lin - quad * const
        if disc < 0:
            return self.start
        k_star = (-lin + math.sqrt(disc)) / quad
        return max(self.start, math.floor(k_star) + 1)

    def head(self, radius: float) -> list[Divisor]:
        return [
            Divisor(self.root(k) ** 2, self.mult(k), self.kind, self.root(k))
            for k in range(self.start, self.index_bound(radius))
        ]

    def tail_moment(self, radius: float) -> tuple[complex, float]:
        """
        Sums of m_k / x_k and m_k / |x_k| over the indices beyond radius.

        Raises
        ------
        ParameterError
            If multiplicities grow, where the sums diverge.
        """
        if self.growth:
            msg = "tail moment diverges for growing multiplicities"
            raise ParameterError(msg)
        first = self.index_bound(radius)
        w = self.base / self.step + first
        moment = self.multiplicity / self.step**2 * trigamma_shifted(w)
        explicit = 64
        head_abs = sum(1 / abs(w + j) ** 2 for j in range(explicit))
        rest = w.real + explicit
        tail_abs = float(special.polygamma(1, rest)) if rest > 0 else math.inf
        moment_abs = self.multiplicity / abs(self.step) ** 2 * (
            head_abs + tail_abs
        )
        return moment, moment_abs


def _merge(divisors: Iterable[Divisor]) -> list[Divisor]:
    ordered = sorted(divisors, key=lambda d: (abs(d.location), d.location.real))
    merged: list[Divisor] = []
    for divisor in ordered:
        scale = MERGE_TOLERANCE * max(1.0, abs(divisor.location))
        for idx in range(len(merged) - 1, -1, -1):
            other = merged[idx]
            if abs(other.location) < abs(divisor.location) - scale:
                break
            if abs(other.location - divisor.location) <= scale:
                merged[idx] = Divisor(
                    other.location,
                    other.multiplicity + divisor.multiplicity,
                    other.kind,
                    other.root if other.root is not None else divisor.root,
                )
                break
        else:
            merged.append(divisor)
    return merged


class DivisorStream:
    """
    Zeros or poles enumerable by increasing modulus.

    Parameters
    ----------
    families : iterable of LatticeFamily
        Infinite lattice families.
    explicit : iterable of Divisor
        Finitely many further divisors.
    convergence_exponent : float
        Declared exponent of convergence of the locations.
    """

    def __init__(
        self,
        families: Iterable[LatticeFamily] = (),
        explicit: Iterable[Divisor] = (),
        convergence_exponent: float = 0.0,
    ) -> None:
        self.families = tuple(families)
        self.explicit = tuple(_merge(explicit))
        self.convergence_exponent = convergence_exponent

    def __repr__(self) -> str:
        return (
            f"DivisorStream(families={len(self.families)}, "
            f"explicit={len(self.explicit)})"
        )

    @classmethod
    def empty(cls) -> DivisorStream:
        return cls()

    @classmethod
    def from_divisors(cls, divisors: Iterable[Divisor]) -> DivisorStream:
        return cls(explicit=divisors)

    @classmethod
    def from_families(
        cls,
        *families: LatticeFamily,
        convergence_exponent: float = 0.5,
    ) -> DivisorStream:
        return cls(families, convergence_exponent=convergence_exponent)

    @property
    def is_finite(self) -> bool:
        return not self.families

    @property
    def is_empty(self) -> bool:
        return not self.families and not self.explicit

    def enumerate(self, radius: float) -> list[Divisor]:
        """Divisors with |location| <= radius, sorted by modulus and merged."""
        found = [d for d in self.explicit if abs(d.location) <= radius]
        for family in self.families:
            found.extend(
                d for d in family.head(radius) if abs(d.location) <= radius
            )
        return _merge(found)

    def split(self, radius: float) -> tuple[list[Divisor], complex, float]:
        """
        Divisors up to the family index bounds plus the tail moments.

        Returns
        -------
        head : list of Divisor
            Every explicit divisor and the family members below their
            index bound for the radius.
        moment, moment_abs : complex, float
            Sums of m/x and m/|x| over the remaining family members.
        """
        head = list(self.explicit)
        moment, moment_abs = 0j, 0.0
        for family in self.families:
            head.extend(family.head(radius))
            fam_moment, fam_abs = family.tail_moment(radius)
            moment += fam_moment
            moment_abs += fam_abs
        return head, moment, moment_abs

    def multiplicity_at(self, x: complex, rtol: float = 1e-12) -> int:
        """Total multiplicity declared at x (0 when x is not a divisor)."""
        scale = rtol * max(1.0, abs(x))
        return sum(
            d.multiplicity
            for d in self.enumerate(abs(x) + scale)
            if abs(d.location - x) <= scale
        )

    def nearest_distance(self, x: np.ndarray | complex, radius: float) -> float:
        """Smallest distance from the points x to divisors within radius."""
        divisors = self.enumerate(radius)
        if not divisors:
            return math.inf
        locations = np.array([d.location for d in divisors])
        points = np.atleast_1d(np.asarray(x, dtype=complex))
        return float(np.min(np.abs(points[:, None] - locations[None, :])))


@dataclass(frozen=True)
class SyntheticDivisorData:
    """Divisor data without an evaluator."""

    zeros: tuple[Divisor, ...] = ()
    poles: tuple[Divisor, ...] = ()

    def with_pole(
        self, location: complex, multiplicity: int = 1
    ) -> SyntheticDivisorData:
        return SyntheticDivisorData(
            self.zeros,
            (*self.poles, Divisor(complex(location), multiplicity, "pole")),
        )


# ---------------------------------------------------------------------------
# models


@dataclass(frozen=True)
class MeromorphicModel:
    """
    Evaluator plus declared divisors and order.

    Attributes
    ----------
    label : str
        Catalog label.
    zeros : DivisorStream or None
        Declared zeros; None when they are unknown.
    poles : DivisorStream
        Declared poles.
    declared_order : float
        Order of growth sigma.
    evaluate : callable or None
        Vectorised evaluator; returns complex infinity at poles.
    log_evaluate : callable or None
        Vectorised log f, any branch; -inf real part at zeros.
    shift : complex
        Lattice shift the model is meant to be studied with.
    constant : complex or None
        Value of a constant model.
    a_points : mapping
        Further declared a-point streams keyed by a.
    derivative : callable or None
        Exact derivative, used at the origin of the Wilson difference.
    lattice_evaluate : callable or None
        Evaluator in square-root coordinates; defaults to f(z^2).
    params : mapping
        Constructor parameters, for reports.
    """

    label: str
    zeros: DivisorStream | None
    poles: DivisorStream
    declared_order: float
    evaluate: Evaluator | None = None
    log_evaluate: Evaluator | None = None
    shift: complex = DEFAULT_SHIFT
    constant: complex | None = None
    a_points: Mapping[complex, DivisorStream] = field(default_factory=dict)
    derivative: Evaluator | None = None
    lattice_evaluate: Evaluator | None = None
    params: Mapping[str, Any] = field(default_factory=dict)

    @property
    def has_evaluator(self) -> bool:
        return self.evaluate is not None

    def require_evaluator(self, operation: str) -> None:
        if self.evaluate is None:
            msg = f"{operation} needs an evaluator; model {self.label!r} has none"
            raise EvaluatorRequiredError(msg)

    def value(self, x: complex | np.ndarray) -> complex | np.ndarray:
        self.require_evaluator("evaluation")
        return self.evaluate(x)

    def log_value(self, x: complex | np.ndarray) -> complex | np.ndarray:
        """log f(x) with real part -inf at zeros and +inf at poles."""
        self.require_evaluator("log evaluation")
        if self.log_evaluate is not None:
            return self.log_evaluate(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(np.asarray(self.evaluate(x), dtype=complex))

    def lattice_value(self, z: complex | np.ndarray) -> complex | np.ndarray:
        """Value at the square-root coordinate z."""
        if self.lattice_evaluate is not None:
            return self.lattice_evaluate(z)
        self.require_evaluator("lattice evaluation")
        z = np.asarray(z, dtype=complex)
        value = self.evaluate(z * z)
        return complex(value) if np.ndim(value) == 0 else value

    def divisors_for(self, a: complex | None) -> DivisorStream:
        """
        Points where f takes the value a (poles for a = infinity).

        Raises
        ------
        MissingDivisorError
            If the a-points are not declared.
        ParameterError
            If f is the constant a.
        """
        if is_infinite(a):
            return self.poles
        a = complex(a)
        if self.constant is not None:
            if abs(self.constant - a) <= 1e-15 * max(1.0, abs(a)):
                msg = f"f - a vanishes identically for a={a}"
                raise ParameterError(msg)
            return DivisorStream.empty()
        if a == 0:
            if self.zeros is None:
                msg = f"zeros of model {self.label!r} are not declared"
                raise MissingDivisorError(msg)
            return self.zeros
        for value, stream in self.a_points.items():
            if abs(value - a) <= 1e-12 * max(1.0, abs(a)):
                return stream
        msg = f"{a}-points of model {self.label!r} are not declared"
        raise MissingDivisorError(msg)


def _is_gamma_pole(z: np.ndarray) -> np.ndarray:
    n = np.round(z.real)
    return (n <= 0) & (np.abs(z - n) < 1e-12)


def log_gamma_quotient(
    numerator: Sequence[np.ndarray],
    denominator: Sequence[np.ndarray],
) -> np.ndarray:
    """
    sum log Gamma(numerator) - sum log Gamma(denominator), pole aware.

    Where numerator poles outnumber denominator poles the result is
    +inf, in the opposite case -inf; balanced (removable) cases are
    evaluated 1e-9 off the poles.
    """
    shape = np.broadcast(*numerator, *denominator).shape
    count = np.zeros(shape, dtype=int)
    for arg in numerator:
        count = count + _is_gamma_pole(np.asarray(arg, dtype=complex))
    for arg in denominator:
        count = count - _is_gamma_pole(np.asarray(arg, dtype=complex))
    total = np.zeros(shape, dtype=complex)
    for sign, args in ((1, numerator), (-1, denominator)):
        for arg in args:
            arr = np.broadcast_to(np.asarray(arg, dtype=complex), shape)
            arr = np.where(_is_gamma_pole(arr), arr + 1e-9, arr)
            total = total + sign * special.loggamma(arr)
    total = np.where(count > 0, complex(math.inf, 0.0), total)
    return np.where(count < 0, complex(-math.inf, 0.0), total)


def _exp_or_flag(log_value: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        value = np.exp(log_value)
    value = np.where(np.real(log_value) == math.inf, POLE_FLAG, value)
    return np.where(np.real(log_value) == -math.inf, 0j, value)


def _vectorised(log_function: Evaluator) -> Evaluator:
    def evaluate(x: complex | np.ndarray) -> complex | np.ndarray:
        value = _exp_or_flag(np.asarray(log_function(x), dtype=complex))
        return complex(value) if value.ndim == 0 else value

    return evaluate


def _log_sinh_over(u: np.ndarray) -> np.ndarray:
    """log(sinh(u)/u) for Re u >= 0."""
    u = np.asarray(u, dtype=complex)
    safe = np.where(u == 0, 1.0, u)
    with np.errstate(divide="ignore", invalid="ignore"):
        value = safe + np.log(-np.expm1(-2 * safe) / (2 * safe))
    return np.where(u == 0, 0j, value)


def _log_cosh(u: np.ndarray) -> np.ndarray:
    """log cosh(u), stable for large |Re u|."""
    u = np.asarray(u, dtype=complex)
    flip = np.where(u.real < 0, -u, u)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return flip + np.log((1 + np.exp(-2 * flip)) / 2)


def model_exp() -> MeromorphicModel:
    """The exponential e^x: no zeros, no poles, order 1."""

    def log_evaluate(x: complex | np.ndarray) -> complex | np.ndarray:
        return np.asarray(x, dtype=complex) if np.ndim(x) else complex(x)

    return MeromorphicModel(
        label="exp",
        zeros=DivisorStream.empty(),
        poles=DivisorStream.empty(),
        declared_order=1.0,
        evaluate=np.exp,
        log_evaluate=log_evaluate,
        derivative=np.exp,
    )


def model_constant(value: complex = 1.0) -> MeromorphicModel:
    """Constant model f = value (nonzero)."""
    value = complex(value)
    if value == 0:
        msg = "the constant model needs a nonzero value"
        raise ParameterError(msg)

    def evaluate(x: complex | np.ndarray) -> complex | np.ndarray:
        return np.full(np.shape(x), value) if np.ndim(x) else value

    def log_evaluate(x: complex | np.ndarray) -> complex | np.ndarray:
        return np.full(np.shape(x), cmath.log(value)) if np.ndim(x) else (
            cmath.log(value)
        )

    def derivative(x: complex | np.ndarray) -> complex | np.ndarray:
        return np.zeros(np.shape(x), complex) if np.ndim(x) else 0j

    return MeromorphicModel(
        label="constant",
        zeros=DivisorStream.empty(),
        poles=DivisorStream.empty(),
        declared_order=0.0,
        evaluate=evaluate,
        log_evaluate=log_evaluate,
        constant=value,
        derivative=derivative,
        params={"value": value},
    )


def model_rational(
    zeros: Sequence[complex] = (),
    poles: Sequence[complex] = (),
    scale: complex = 1.0,
) -> MeromorphicModel:
    """
    Rational model scale * prod(x - z_j) / prod(x - p_k).

    Repeated entries give multiplicities; polynomials have no poles.
    """
    zeros = [complex(z) for z in zeros]
    poles = [complex(p) for p in poles]
    if set(zeros) & set(poles):
        msg = "rational model with a common zero and pole"
        raise ParameterError(msg)
    numerator = npoly.polyfromroots(zeros) * complex(scale) if zeros else (
        np.array([complex(scale)])
    )
    denominator = npoly.polyfromroots(poles) if poles else np.array([1.0])
    d_numerator = npoly.polyder(numerator)
    d_denominator = npoly.polyder(denominator)

    def log_evaluate(x: complex | np.ndarray) -> complex | np.ndarray:
        arr = np.asarray(x, dtype=complex)
        with np.errstate(divide="ignore"):
            total = np.full(arr.shape, cmath.log(complex(scale)))
            for zero in zeros:
                total = total + np.log(arr - zero)
            for pole in poles:
                total = total - np.log(arr - pole)
        total = np.where(np.isnan(total), complex(-math.inf, 0), total)
        return complex(total) if total.ndim == 0 else total

    def derivative(x: complex | np.ndarray) -> complex | np.ndarray:
        n = npoly.polyval(x, numerator)
        d = npoly.polyval(x, denominator)
        dn = npoly.polyval(x, d_numerator)
        dd = npoly.polyval(x, d_denominator)
        return (dn * d - n * dd) / (d * d)

    def divisors(points: list[complex], kind: Kind) -> DivisorStream:
        return DivisorStream.from_divisors(
            Divisor(p, 1, kind) for p in points
        )

    return MeromorphicModel(
        label="rational",
        zeros=divisors(zeros, "zero"),
        poles=divisors(poles, "pole"),
        declared_order=0.0,
        evaluate=_vectorised(log_evaluate),
        log_evaluate=log_evaluate,
        derivative=derivative,
        params={"zeros": zeros, "poles": poles, "scale": complex(scale)},
    )


def model_cosh_root(scale: float = 1.0, amplitude: float = 1.0) -> MeromorphicModel:
    """
    amplitude * cosh(scale * sqrt(x)), entire of order 1/2.

    Simple zeros at -((k + 1/2) pi / scale)^2. scale = 2 pi is in the
    kernel of the Wilson operator and 2 cosh(pi sqrt x) is the coefficient
    of the hyperbolic gamma interpolation equation.
    """
    if scale <= 0 or amplitude == 0:
        msg = f"cosh model needs scale > 0 and amplitude != 0: {scale}, {amplitude}"
        raise ParameterError(msg)

    def log_evaluate(x: complex | np.ndarray) -> complex | np.ndarray:
        u = scale * np.asarray(sqrt_with_cut(x), dtype=complex)
        value = math.log(abs(amplitude)) + _log_cosh(u)
        if amplitude < 0:
            value = value + 1j * math.pi
        return complex(value) if np.ndim(value) == 0 else value

    def derivative(x: complex | np.ndarray) -> complex | np.ndarray:
        z = np.asarray(sqrt_with_cut(x), dtype=complex)
        safe = np.where(z == 0, 1.0, z)
        value = np.where(
            z == 0,
            scale * scale / 2,
            scale * np.sinh(scale * safe) / (2 * safe),
        )
        value = amplitude * value
        return complex(value) if value.ndim == 0 else value

    zeros = DivisorStream.from_families(
        LatticeFamily(1j * math.pi / (2 * scale), 1j * math.pi / scale)
    )
    return MeromorphicModel(
        label="cosh",
        zeros=zeros,
        poles=DivisorStream.empty(),
        declared_order=0.5,
        evaluate=_vectorised(log_evaluate),
        log_evaluate=log_evaluate,
        derivative=derivative,
        params={"scale": scale, "amplitude": amplitude},
    )


def model_product_i(b: complex = 1.0, c: complex = DEFAULT_SHIFT) -> MeromorphicModel:
    """
    Canonical product prod_{k>=0} (1 - x/(b + ck)^2).

    Evaluated through its closed form
    Gamma(b/c)^2 / (Gamma(b/c + sqrt(x)/c) Gamma(b/c - sqrt(x)/c)).
    Simple zeros at (b + ck)^2, order 1/2. b = 1, c = 2 gives
    cos(pi sqrt(x)/2).

    Raises
    ------
    ParameterError
        If b/c is an integer (b in i N_0 for c = i).
    """
    b, c = complex(b), complex(c)
    beta = b / c
    if abs(beta - round(beta.real)) < 1e-12:
        msg = f"product model needs b/c outside the integers, got b={b}, c={c}"
        raise ParameterError(msg)

    def log_evaluate(x: complex | np.ndarray) -> complex | np.ndarray:
        w = np.asarray(sqrt_with_cut(x), dtype=complex) / c
        value = log_gamma_quotient([beta, beta], [beta + w, beta - w])
        return complex(value) if np.ndim(value) == 0 else value

    zeros = DivisorStream.from_families(LatticeFamily(b, c))
    return MeromorphicModel(
        label="product_i",
        zeros=zeros,
        poles=DivisorStream.empty(),
        declared_order=0.5,
        evaluate=_vectorised(log_evaluate),
        log_evaluate=log_evaluate,
        shift=c,
        params={"b": b, "c": c},
    )


def model_phi_ii(a: complex = 1.0) -> MeromorphicModel:
    """
    Product of the two Kummer-evaluable 2F1 factors of the Wilson
    generating function at t = -1 (parameters a = c, b = d = 1/2).

    Double zeros at -(a + 1 + 2k)^2, k >= 0, and nothing else; studied
    with the shift c = 2i.

    Raises
    ------
    ParameterError
        If a is in {1/2 - k : k = 1, 2, ...}.
    """
    a = complex(a)
    k = 0.5 - a
    if abs(k.imag) < 1e-12 and abs(k.real - round(k.real)) < 1e-12 and (
        round(k.real) >= 1
    ):
        msg = f"phi model excludes a = 1/2 - k, got a={a}"
        raise ParameterError(msg)

    def log_evaluate(x: complex | np.ndarray) -> complex | np.ndarray:
        iz = 1j * np.asarray(sqrt_with_cut(x), dtype=complex)
        value = log_gamma_quotient(
            [a + 0.5, a + 0.5, 1 + a / 2 + iz / 2, 1 + a / 2 - iz / 2],
            [1 + a + iz, 1 + a - iz, 0.5 + a / 2 + iz / 2, 0.5 + a / 2 - iz / 2],
        )
        return complex(value) if np.ndim(value) == 0 else value

    zeros = DivisorStream.from_families(
        LatticeFamily(1j * (a + 1), 2j, multiplicity=2)
    )
    return MeromorphicModel(
        label="phi_ii",
        zeros=zeros,
        poles=DivisorStream.empty(),
        declared_order=0.5,
        evaluate=_vectorised(log_evaluate),
        log_evaluate=log_evaluate,
        shift=2j,
        params={"a": a},
    )


def model_g_iii(p: int = 2, q: int = 1) -> MeromorphicModel:
    """
    prod_{k>=1} (1 + x/(2k)^2)^p (1 + x/(2k-1)^2)^q.

    Closed form (sinh(u)/u)^p cosh(u)^q with u = pi sqrt(x)/2; zeros at
    -(2k)^2 of multiplicity p and at -(2k-1)^2 of multiplicity q.
    """
    if not (p >= 1 and 0 <= q <= p) or p != int(p) or q != int(q):
        msg = f"g model needs integers p >= 1 and 0 <= q <= p, got p={p}, q={q}"
        raise ParameterError(msg)
    p, q = int(p), int(q)

    def log_evaluate(x: complex | np.ndarray) -> complex | np.ndarray:
        u = np.pi / 2 * np.asarray(sqrt_with_cut(x), dtype=complex)
        value = p * _log_sinh_over(u)
        if q:
            value = value + q * _log_cosh(u)
        return complex(value) if np.ndim(value) == 0 else value

    families = [LatticeFamily(0j, 2j, multiplicity=p, start=1)]
    if q:
        families.append(LatticeFamily(-1j, 2j, multiplicity=q, start=1))
    return MeromorphicModel(
        label="g_iii",
        zeros=DivisorStream.from_families(*families),
        poles=DivisorStream.empty(),
        declared_order=0.5,
        evaluate=_vectorised(log_evaluate),
        log_evaluate=log_evaluate,
        params={"p": p, "q": q},
    )


def h_iv_residues(s: float) -> tuple[int, list[int]]:
    """
    Period M and residues n_1..n_v of the zero indices k + floor((1-s)k).

    With 1 - s = u/v in lowest terms the index set {k + a_k : k >= 1} is
    the union of the progressions n_j + M t, t >= 0, with M = u + v.
    """
    ratio = Fraction(1 - s).limit_denominator(1000)
    u, v = ratio.numerator, ratio.denominator
    period = u + v
    residues = [k + (u * k) // v for k in range(1, v + 1)]
    return period, residues


def model_h_iv(s: float = 0.5) -> MeromorphicModel:
    """
    prod_{k>=1} (1 + x/(k + a_k)^2) with a_k = floor((1-s)k).

    Each residue progression n_j + M t contributes
    Gamma(n_j/M)^2 / (Gamma(n_j/M + i sqrt(x)/M) Gamma(n_j/M - i sqrt(x)/M)).
    """
    if not 0 <= s <= 1:
        msg = f"h model needs s in [0, 1], got {s}"
        raise ParameterError(msg)
    period, residues = h_iv_residues(s)

    def log_evaluate(x: complex | np.ndarray) -> complex | np.ndarray:
        w = 1j * np.asarray(sqrt_with_cut(x), dtype=complex) / period
        value = 0j
        for n in residues:
            beta = n / period
            value = value + log_gamma_quotient(
                [beta, beta], [beta + w, beta - w]
            )
        return complex(value) if np.ndim(value) == 0 else value

    zeros = DivisorStream.from_families(
        *(LatticeFamily(1j * n, 1j * period) for n in residues)
    )
    return MeromorphicModel(
        label="h_iv",
        zeros=zeros,
        poles=DivisorStream.empty(),
        declared_order=0.5,
        evaluate=_vectorised(log_evaluate),
        log_evaluate=log_evaluate,
        params={"s": s},
    )


def _log_2i_sinh(w: np.ndarray) -> np.ndarray:
    """log(2i sinh(pi w)) on any branch, stable in Re w."""
    w = np.asarray(w, dtype=complex)
    flip = w.real < 0
    v = np.where(flip, -w, w)
    with np.errstate(divide="ignore", invalid="ignore"):
        value = np.pi * v + np.log(-np.expm1(-2 * np.pi * v))
    value = np.where(flip, value + 1j * np.pi, value)
    value = np.where(w == 0, complex(-math.inf, 0.0), value)
    return value + 0.5j * np.pi


def log_ghyp(
    z: complex | np.ndarray,
    tol: float = 1e-10,
    matching_abscissa: float = 8.0,
) -> complex | np.ndarray:
    """
    log G_hyp(1, 1; z) on the whole plane.

    Continuation by G(w + i) = 2i sinh(pi w) G(w) from the band
    |Im z| <= 1/2, and for |Re z| beyond the matching abscissa by the
    quadratic asymptotic log G(w) = -i pi w^2 / 2 + const (Re w > 0) and
    oddness. Real part -inf at zeros (z = ki, k >= 1) and +inf at poles.
    """
    arr = np.atleast_1d(np.asarray(z, dtype=complex))
    k = np.round(arr.imag)
    z0 = arr - 1j * k
    far = np.abs(z0.real) > matching_abscissa
    sign = np.where(z0.real < 0, -1.0, 1.0)
    inner = np.where(far, sign * matching_abscissa + 1j * z0.imag, z0)
    log_inner = np.asarray(log_hyperbolic_gamma(1.0, 1.0, inner, tol))
    quadratic = -0.5j * np.pi * sign * (z0 * z0 - inner * inner)
    log_band = np.where(far, log_inner + quadratic, log_inner)
    parity = np.mod(k * (k - 1) / 2, 2)
    with np.errstate(invalid="ignore"):
        step = np.where(k == 0, 0j, k * _log_2i_sinh(z0))
    value = log_band + step + 1j * np.pi * parity
    return complex(value[0]) if np.ndim(z) == 0 else value.reshape(np.shape(z))


def model_ghyp_solution(
    tol: float = 1e-10,
    matching_abscissa: float = 8.0,
) -> MeromorphicModel:
    """
    f(x) = (G(sqrt x) + G(-sqrt x)) / 2 = cosh(log G(sqrt x)) with
    G = G_hyp(1, 1; .).

    f is even in the root, has poles at -k^2 of order k and order 1.
    ``lattice_evaluate`` is the branch solution z -> G(z), which satisfies
    y(x^+) = 2 cosh(pi sqrt x) y(x^-) with the root of `sqrt_with_cut`.
    """

    def log_g(z: complex | np.ndarray) -> complex | np.ndarray:
        return log_ghyp(z, tol, matching_abscissa)

    def log_evaluate(x: complex | np.ndarray) -> complex | np.ndarray:
        logs = np.asarray(log_g(sqrt_with_cut(x)), dtype=complex)
        with np.errstate(invalid="ignore"):
            value = np.where(
                np.isinf(logs.real), complex(math.inf, 0.0), _log_cosh(logs)
            )
        return complex(value) if value.ndim == 0 else value

    def lattice_evaluate(z: complex | np.ndarray) -> complex | np.ndarray:
        value = _exp_or_flag(np.asarray(log_g(z), dtype=complex))
        return complex(value) if value.ndim == 0 else value

    poles = DivisorStream(
        [LatticeFamily(0j, 1j, multiplicity=1, growth=1, start=1, kind="pole")],
        convergence_exponent=1.0,
    )
    return MeromorphicModel(
        label="ghyp",
        zeros=None,
        poles=poles,
        declared_order=1.0,
        evaluate=_vectorised(log_evaluate),
        log_evaluate=log_evaluate,
        lattice_evaluate=lattice_evaluate,
        params={"tol": tol, "matching_abscissa": matching_abscissa},
    )


def model_from_synthetic(
    data: SyntheticDivisorData,
    label: str = "synthetic",
) -> MeromorphicModel:
    """Divisor-only model; evaluator-based operations raise."""
    return MeromorphicModel(
        label=label,
        zeros=DivisorStream.from_divisors(data.zeros),
        poles=DivisorStream.from_divisors(data.poles),
        declared_order=0.0,
    )


def load_synthetic(path: str | Path) -> SyntheticDivisorData:
    """
    Read divisor data from a JSON array of {re, im, mult, kind} records.

    Raises
    ------
    ParameterError
        If the file cannot be read, is not JSON or holds malformed records.
    """
    try:
        with Path(path).open() as f:
            records = json.load(f)
    except OSError as exc:
        msg = f"cannot read divisor data {path}: {exc.strerror or exc}"
        raise ParameterError(msg) from exc
    except json.JSONDecodeError as exc:
        msg = f"divisor data {path} is not valid JSON: {exc}"
        raise ParameterError(msg) from exc
    if not isinstance(records, list):
        msg = f"divisor data {path} must be a JSON array of records"
        raise ParameterError(msg)
    zeros, poles = [], []
    try:
        for record in records:
            kind = record.get("kind", "pole")
            divisor = Divisor(
                complex(float(record["re"]), float(record["im"])),
                int(record.get("mult", 1)),
                kind,
            )
            if kind == "zero":
                zeros.append(divisor)
            elif kind == "pole":
                poles.append(divisor)
            else:
                msg = f"unknown divisor kind {kind!r}"
                raise ParameterError(msg)
    except (KeyError, TypeError, ValueError) as exc:
        msg = f"malformed divisor record in {path}: {exc}"
        raise ParameterError(msg) from exc
    return SyntheticDivisorData(tuple(zeros), tuple(poles))


def dump_synthetic(data: SyntheticDivisorData, path: str | Path) -> None:
    """Write divisor data in the format read by `load_synthetic`."""
    records = [
        {
            "re": d.location.real,
            "im": d.location.imag,
            "mult": d.multiplicity,
            "kind": d.kind,
        }
        for d in (*data.zeros, *data.poles)
    ]
    with Path(path).open("w") as f:
        json.dump(records, f, indent=2)


FIGURE_LINES = (
    (0j, (1, 1, 2)),
    (1.6 - 0.7j, (1, 3, 0)),
    (2.8 - 1.5j, (1, 5, 5, 2)),
)


def figure_dataset(extent: float = 400.0) -> SyntheticDivisorData:
    """
    Poles of the three-sequence figure: all but five lie in Wilson pole
    sequences.

    Each line starts at a root z_j with the listed multiplicities (0 means
    absent) and continues with multiplicities increasing by one, step i in
    the root, until |x| exceeds 4 * extent.
    """
    poles = []
    for root, profile in FIGURE_LINES:
        k, last = 0, 0
        while abs((root + 1j * k) ** 2) <= 4 * extent:
            z = root + 1j * k
            if k < len(profile):
                mult = profile[k]
            else:
                mult = last + 1
            if mult:
                poles.append(Divisor(z * z, mult, "pole", z))
                last = mult
            k += 1
    return SyntheticDivisorData(poles=tuple(poles))


# ---------------------------------------------------------------------------
# catalog


CATALOG: dict[str, Callable[..., MeromorphicModel]] = {
    "exp": model_exp,
    "constant": model_constant,
    "rational": model_rational,
    "cosh": model_cosh_root,
    "product_i": model_product_i,
    "cos_half": lambda: model_product_i(1.0, 2.0),
    "phi_ii": model_phi_ii,
    "g_iii": model_g_iii,
    "h_iv": model_h_iv,
    "ghyp": model_ghyp_solution,
    "figure": lambda extent=400.0: model_from_synthetic(
        figure_dataset(extent), "figure"
    ),
}


def build_model(label: str, params: Mapping[str, Any] | None = None) -> MeromorphicModel:
    """
    Catalog model by label; ``synthetic:<path>`` loads divisor data.

    Raises
    ------
    ParameterError
        On unknown labels or parameters.
    """
    params = dict(params or {})
    if label.startswith("synthetic:"):
        return model_from_synthetic(load_synthetic(label.split(":", 1)[1]))
    if label not in CATALOG:
        msg = f"unknown model {label!r}; known: {sorted(CATALOG)}"
        raise ParameterError(msg)
    for key, value in params.items():
        if isinstance(value, str):
            try:
                params[key] = complex(value.replace("i", "j"))
            except ValueError:
                continue
            if params[key].imag == 0:
                params[key] = params[key].real
    try:
        return CATALOG[label](**params)
    except TypeError as exc:
        msg = f"bad parameters for model {label!r}: {exc}"
        raise ParameterError(msg) from exc


# ---------------------------------------------------------------------------
# checks


@dataclass(frozen=True)
class ConsistencyReport:
    """Argument-principle count against the declared divisor."""

    center: complex
    radius: float
    declared: int
    measured: float
    samples: int

    @property
    def count(self) -> int:
        return round(self.measured)

    @property
    def residual(self) -> float:
        return abs(self.measured - self.count)

    @property
    def passed(self) -> bool:
        return self.count == self.declared and self.residual < 0.1


def winding_number(values: np.ndarray) -> float:
    """Winding of a closed sampled curve around 0, in turns."""
    phase = np.angle(values)
    steps = np.diff(np.append(phase, phase[0]))
    steps = (steps + np.pi) % (2 * np.pi) - np.pi
    return float(np.sum(steps) / (2 * np.pi))


def log_winding_number(log_values: np.ndarray) -> float:
    """Winding computed from log values (any branch)."""
    return winding_number(np.exp(1j * np.imag(log_values)))


def consistency_check(
    model: MeromorphicModel,
    center: complex,
    radius: float,
    samples: int = 1024,
) -> ConsistencyReport:
    """
    Compare the argument-principle count on a circle with the declared
    zeros minus poles inside it.

    Samples double (up to 16 times the initial count) until two counts
    agree.

    Raises
    ------
    ContourError
        If a declared divisor lies within 1e-6 max(1, radius) of the circle.
    MissingDivisorError
        If the zeros of the model are not declared.
    """
    model.require_evaluator("consistency_check")
    center = complex(center)
    reach = abs(center) + radius * (1 + 1e-6) + 1
    zeros = model.divisors_for(0)
    declared = 0
    guard = 1e-6 * max(1.0, radius)
    for sign, stream in ((1, zeros), (-1, model.poles)):
        for divisor in stream.enumerate(reach):
            distance = abs(divisor.location - center)
            if abs(distance - radius) < guard:
                msg = (
                    f"divisor {divisor.location} lies on the contour "
                    f"|x - {center}| = {radius}"
                )
                raise ContourError(msg)
            if distance < radius:
                declared += sign * divisor.multiplicity

    measured = math.nan
    n = samples
    while n <= 16 * samples:
        theta = 2 * np.pi * np.arange(n) / n
        points = center + radius * np.exp(1j * theta)
        current = log_winding_number(model.log_value(points))
        if abs(current - measured) < 0.1:
            measured = current
            break
        measured = current
        n *= 2
    msg = f"{model.label}: winding {measured:.4f} vs declared {declared}"
    log.debug(msg)
    return ConsistencyReport(center, radius, declared, measured, n)


@dataclass(frozen=True)
class OrderEstimate:
    """Least-squares order over the top decade of a radius grid."""

    sigma: float
    band: float
    radii: tuple[float, ...]
    characteristic: tuple[float, ...]


def top_decade(r_grid: Sequence[float]) -> np.ndarray:
    """Radii of the grid within a factor 10 of its largest radius."""
    radii = np.sort(np.asarray(r_grid, dtype=float))
    return radii[radii >= radii[-1] / 10 * (1 - 1e-12)]


def fit_exponent(radii: Sequence[float], values: Sequence[float]) -> tuple[float, float]:
    """
    Slope of log(values) against log(radii) and twice its standard error.

    Returns (0, 0) for bounded data: nonpositive values, or a maximum
    below 1e-10.
    """
    values = np.asarray(values, dtype=float)
    if values.size < 2 or np.min(values) <= 0 or np.max(values) < 1e-10:
        return 0.0, 0.0
    log_r, log_v = np.log(np.asarray(radii, dtype=float)), np.log(values)
    if values.size > 3:
        coefficients, cov = np.polyfit(log_r, log_v, 1, cov=True)
        return float(coefficients[0]), float(2 * math.sqrt(max(cov[0, 0], 0)))
    return float(np.polyfit(log_r, log_v, 1)[0]), 0.0


def order_estimate(
    model: MeromorphicModel,
    r_grid: Sequence[float],
    tol: float | None = None,
    **quadrature: Any,
) -> OrderEstimate:
    """
    Order of growth from ln T(r) against ln r over the top decade.

    Raises
    ------
    DegenerateGridError
        If the grid spans fewer than 3 decades.
    EvaluatorRequiredError
        For divisor-only models.
    """
    radii = np.asarray(r_grid, dtype=float)
    if radii.size < 2 or radii.max() / radii.min() < 10**3 * (1 - 1e-9):
        msg = "order estimation needs a radius grid spanning 3 decades"
        raise DegenerateGridError(msg)
    model.require_evaluator("order_estimate")
    from wilsonnev.nevanlinna import characteristic  # noqa: PLC0415

    top = top_decade(radii)
    rows = [characteristic(model, r, tol, **quadrature) for r in top]
    values = [row.T for row in rows]
    if max(values) <= 1.0:
        sigma, band = 0.0, 0.0
    else:
        sigma, band = fit_exponent(top, values)
    msg = f"{model.label}: order {sigma:.3f} +/- {band:.3f}"
    log.info(msg)
    return OrderEstimate(sigma, band, tuple(top), tuple(values))
