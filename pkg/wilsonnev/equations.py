"""
Wilson difference polynomials and interpolation equations.

A Wilson difference polynomial is a sum of terms P_j(x) prod_l
(D_W^l f)^{d_lj}, where l = 0 stands for f itself. Interpolation
equations sum_k A_k(x) y(x^{+(k)}) = 0 are stored with half-step offsets,
so the two-term equation y(x^+) = 2 cosh(pi sqrt x) y(x^-) is the pair of
offsets (+1, -1). Solutions are evaluated in square-root coordinates
through `MeromorphicModel.lattice_value`.
"""

from __future__ import annotations

import json
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from numpy.polynomial import polynomial as npoly

from wilsonnev.errors import (
    IdentityViolationError,
    NotASolutionError,
    ParameterError,
    PoleAtShiftError,
)
from wilsonnev.funcmodel import (
    MeromorphicModel,
    build_model,
    fit_exponent,
    model_constant,
    model_cosh_root,
    order_estimate,
    top_decade,
)
from wilsonnev.logger import get_logger
from wilsonnev.nevanlinna import circle_mean, log_difference
from wilsonnev.wilson_core import (
    DEFAULT_SHIFT,
    Evaluator,
    dw_iter_values,
    sqrt_with_cut,
)

log = get_logger(__name__)

IDENTITY_TOLERANCE = 1e-6
SOLUTION_TOLERANCE = 1e-6


# ---------------------------------------------------------------------------
# Wilson difference polynomials


@dataclass(frozen=True)
class WDPTerm:
    """
    One term P(x) prod_l (D_W^l f)^{exponents[l]}.

    ``coefficient`` is a list of polynomial coefficients (ascending) or an
    evaluator; ``log_coefficient`` optionally evaluates log P in log space.
    """

    coefficient: Sequence[complex] | Evaluator
    exponents: tuple[int, ...] = ()
    log_coefficient: Evaluator | None = None

    def __post_init__(self) -> None:
        if any(d < 0 for d in self.exponents):
            msg = f"exponents must be nonnegative, got {self.exponents}"
            raise ParameterError(msg)

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    def coefficient_at(self, x: np.ndarray) -> np.ndarray:
        if callable(self.coefficient):
            return np.asarray(self.coefficient(x), dtype=complex)
        return np.asarray(npoly.polyval(x, np.asarray(self.coefficient)), complex)

    def log_coefficient_at(self, x: np.ndarray) -> np.ndarray:
        if self.log_coefficient is not None:
            return np.asarray(self.log_coefficient(x), dtype=complex)
        with np.errstate(divide="ignore"):
            return np.log(self.coefficient_at(x))


@dataclass(frozen=True)
class WilsonDifferencePolynomial:
    """Sum of `WDPTerm` objects; the degree over f is the largest term degree."""

    terms: tuple[WDPTerm, ...]

    @property
    def degree_over_f(self) -> int:
        return max((term.degree for term in self.terms), default=0)

    @property
    def max_order(self) -> int:
        return max((len(term.exponents) - 1 for term in self.terms), default=0)

    @classmethod
    def of(cls, *terms: WDPTerm) -> WilsonDifferencePolynomial:
        return cls(tuple(terms))


def _difference_levels(
    f: Evaluator,
    x: np.ndarray,
    order: int,
    c: complex,
) -> list[np.ndarray]:
    z = np.asarray(sqrt_with_cut(x, c), dtype=complex)
    levels = [np.asarray(f(x), dtype=complex)]
    levels.extend(
        np.asarray(dw_iter_values(f, z, l, c), dtype=complex)
        for l in range(1, order + 1)
    )
    return levels


def wdp_evaluate(
    P: WilsonDifferencePolynomial,
    f: Evaluator,
    x: complex | np.ndarray,
    c: complex = DEFAULT_SHIFT,
) -> complex | np.ndarray:
    """
    Value of P at f: sum_j P_j(x) prod_l (D_W^l f)(x)^{d_lj}.

    Raises
    ------
    PoleAtShiftError
        If f is not finite on a stencil point.
    """
    x = np.asarray(x, dtype=complex)
    levels = _difference_levels(f, x, P.max_order, c)
    total = np.zeros(x.shape, complex)
    for term in P.terms:
        value = term.coefficient_at(x)
        for level, exponent in zip(levels, term.exponents, strict=False):
            if exponent:
                value = value * level**exponent
        total = total + value
    return complex(total) if total.ndim == 0 else total


def wdp_log_abs(
    P: WilsonDifferencePolynomial,
    model: MeromorphicModel,
    x: np.ndarray,
    c: complex = DEFAULT_SHIFT,
) -> np.ndarray:
    """
    ln|P(f)(x)| in log space, for operator orders up to 1.

    Terms are combined by a log-sum-exp over their complex logs.

    Raises
    ------
    ParameterError
        For terms with second or higher differences.
    """
    if P.max_order > 1:
        msg = "log-space evaluation supports operator orders 0 and 1"
        raise ParameterError(msg)
    x = np.asarray(x, dtype=complex)
    log_f = np.asarray(model.log_value(x), dtype=complex)
    z = np.asarray(sqrt_with_cut(x, c), dtype=complex)
    log_dw = log_difference(
        model.log_value((z + c / 2) ** 2), model.log_value((z - c / 2) ** 2)
    ) - np.log(2 * c * z)
    levels = [log_f, log_dw]
    logs = []
    for term in P.terms:
        value = term.log_coefficient_at(x)
        for level, exponent in zip(levels, term.exponents, strict=False):
            if exponent:
                value = value + exponent * level
        logs.append(value)
    stacked = np.array(logs)
    peak = np.max(np.real(stacked), axis=0)
    finite_peak = np.where(np.isfinite(peak), peak, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        summed = np.sum(np.exp(stacked - finite_peak), axis=0)
        return finite_peak + np.log(np.abs(summed))


@dataclass(frozen=True)
class ClunieReport:
    """Growth of m(r, P(f)) for a Clunie-type identity f^n P(f) = Q(f)."""

    radii: tuple[float, ...]
    values: tuple[float, ...]
    exponent: float
    band: float
    bound: float

    @property
    def bounded(self) -> bool:
        return max(self.values, default=0.0) < 1e-10

    @property
    def passed(self) -> bool:
        return self.exponent <= self.bound


def check_identity(
    model: MeromorphicModel,
    P: WilsonDifferencePolynomial,
    Q: WilsonDifferencePolynomial,
    n: int,
    c: complex = DEFAULT_SHIFT,
    points: int = 20,
    radius: float = 5.0,
    seed: int = 0,
) -> float:
    """
    Largest relative mismatch of f^n P(f) and Q(f) at seeded points.

    Raises
    ------
    IdentityViolationError
        If the mismatch exceeds 1e-6.
    """
    rng = np.random.default_rng(seed)
    x = radius * np.sqrt(rng.uniform(0.05, 1, points)) * np.exp(
        2j * np.pi * rng.uniform(0, 1, points)
    )
    f = model.value
    left = np.asarray(f(x), dtype=complex) ** n * np.asarray(wdp_evaluate(P, f, x, c))
    right = np.asarray(wdp_evaluate(Q, f, x, c))
    scale = np.maximum(1.0, np.maximum(np.abs(left), np.abs(right)))
    mismatch = float(np.max(np.abs(left - right) / scale))
    if mismatch > IDENTITY_TOLERANCE:
        msg = f"f^n P(f) differs from Q(f) by {mismatch:.3g} (relative)"
        raise IdentityViolationError(msg)
    return mismatch


def clunie_growth_check(
    model: MeromorphicModel,
    P: WilsonDifferencePolynomial,
    Q: WilsonDifferencePolynomial,
    n: int,
    r_grid: Sequence[float],
    c: complex = DEFAULT_SHIFT,
    tol: float | None = None,
    **quadrature: Any,
) -> ClunieReport:
    """
    Fitted growth exponent of m(r, P(f)) over the top decade, to be
    compared with sigma - 1/2 + 0.15.

    Raises
    ------
    ParameterError
        If deg_f Q exceeds n.
    IdentityViolationError
        If f^n P(f) = Q(f) fails at the check points.
    """
    if Q.degree_over_f > n:
        msg = f"deg_f Q = {Q.degree_over_f} exceeds n = {n}"
        raise ParameterError(msg)
    model.require_evaluator("clunie_growth_check")
    check_identity(model, P, Q, n, c)

    def integrand(x: np.ndarray) -> np.ndarray:
        return np.maximum(wdp_log_abs(P, model, x, c), 0.0)

    radii = top_decade(r_grid)
    values = [circle_mean(integrand, r, tol, **quadrature)[0] for r in radii]
    exponent, band = fit_exponent(radii, values)
    bound = model.declared_order - 0.5 + 0.15
    msg = f"Clunie check on {model.label}: exponent {exponent:.3f} (bound {bound:.2f})"
    log.info(msg)
    return ClunieReport(tuple(radii), tuple(values), exponent, band, bound)


def _log_sinc_root(x: np.ndarray) -> np.ndarray:
    """log(sin(sqrt x) / sqrt x), stable for large |Im sqrt x|."""
    z = np.asarray(sqrt_with_cut(x), dtype=complex)
    safe = np.where(z == 0, 1.0, z)
    value = log_difference(1j * safe, -1j * safe) - np.log(2j * safe)
    return np.where(z == 0, 0j, value)


def clunie_fixture() -> tuple[WilsonDifferencePolynomial, WilsonDifferencePolynomial, int]:
    """
    f = e^x with n = 1, P(y) = e^{-1/4} sin(sqrt x)/sqrt x and Q(y) = D_W y.

    D_W e^x = e^{x - 1/4} sin(sqrt x)/sqrt x, so f P(f) = Q(f) exactly.
    """

    def log_coefficient(x: np.ndarray) -> np.ndarray:
        return -0.25 + _log_sinc_root(x)

    def coefficient(x: np.ndarray) -> np.ndarray:
        return np.exp(log_coefficient(x))

    P = WilsonDifferencePolynomial.of(WDPTerm(coefficient, (), log_coefficient))
    Q = WilsonDifferencePolynomial.of(WDPTerm([1.0], (0, 1)))
    return P, Q, 1


# ---------------------------------------------------------------------------
# interpolation equations


@dataclass(frozen=True)
class EquationTerm:
    """A_k(x) y(x^{+(offset)}), offset counted in half steps."""

    offset: int
    coefficient: Evaluator
    order: float = 0.0
    model: MeromorphicModel | None = None

    @classmethod
    def from_model(cls, offset: int, model: MeromorphicModel) -> EquationTerm:
        return cls(offset, model.value, model.declared_order, model)

    @classmethod
    def from_polynomial(cls, offset: int, coefficients: Sequence[complex]) -> EquationTerm:
        coefficients = np.asarray(coefficients, dtype=complex)
        return cls(offset, lambda x: npoly.polyval(x, coefficients), 0.0)


@dataclass(frozen=True)
class InterpolationEquation:
    """sum_k A_k(x) y(x^{+(k)}) = 0 on the lattice with shift c."""

    terms: tuple[EquationTerm, ...]
    c: complex = DEFAULT_SHIFT
    label: str = "equation"

    def __post_init__(self) -> None:
        if len(self.terms) < 2:
            msg = "an interpolation equation needs at least two terms"
            raise ParameterError(msg)

    @property
    def polynomial_coefficients(self) -> bool:
        return all(term.model is None for term in self.terms)


@dataclass(frozen=True)
class ResidualValue:
    """Residual of an equation with the largest term magnitude."""

    value: complex
    scale: float

    @property
    def relative(self) -> float:
        return abs(self.value) / max(1.0, self.scale)


def interp_residual(
    eq: InterpolationEquation,
    y: MeromorphicModel,
    x: complex,
) -> ResidualValue:
    """
    Residual sum_k A_k(x) y(x^{+(k)}) with y evaluated at z + k c/2.

    Raises
    ------
    PoleAtShiftError
        If y or a coefficient is not finite on the stencil.
    """
    z = complex(sqrt_with_cut(complex(x), eq.c))
    total = 0j
    scale = 0.0
    for term in eq.terms:
        w = z + term.offset * eq.c / 2
        value = complex(term.coefficient(complex(x))) * complex(y.lattice_value(w))
        if not np.isfinite(value):
            msg = f"equation term with offset {term.offset} is not finite at x={x}"
            raise PoleAtShiftError(msg)
        total += value
        scale = max(scale, abs(value))
    return ResidualValue(total, scale)


def ghyp_equation() -> InterpolationEquation:
    """y(x^+) - 2 cosh(pi sqrt x) y(x^-) = 0."""
    return InterpolationEquation(
        (
            EquationTerm.from_model(1, model_constant(1.0)),
            EquationTerm.from_model(-1, model_cosh_root(np.pi, -2.0)),
        ),
        label="ghyp",
    )


def kernel_equation() -> InterpolationEquation:
    """y(x^+) - y(x^-) = 0, solved by the kernel of the Wilson operator."""
    return InterpolationEquation(
        (
            EquationTerm.from_polynomial(1, [1.0]),
            EquationTerm.from_polynomial(-1, [-1.0]),
        ),
        label="kernel",
    )


def _complex_entry(value: Any) -> complex:
    if isinstance(value, Mapping):
        return complex(value["re"], value["im"])
    return complex(value)


def _coefficient_term(offset: int, entry: Any) -> EquationTerm:
    if isinstance(entry, str):
        return EquationTerm.from_model(offset, build_model(entry))
    if isinstance(entry, Mapping):
        return EquationTerm.from_model(
            offset, build_model(entry["label"], entry.get("params"))
        )
    return EquationTerm.from_polynomial(offset, [_complex_entry(v) for v in entry])


def equation_from_json(data: Mapping[str, Any]) -> InterpolationEquation:
    """
    Equation from {coeffs: [...], shift: "+" | "central", c: {re, im}}.

    Coefficients are polynomial coefficient lists (ascending), catalog
    labels, or {label, params} objects. With shift "+" the k-th
    coefficient multiplies y(x^{+(k)}); with "central" the offsets are
    -n, -n+2, ..., n.

    Raises
    ------
    ParameterError
        On an unknown shift orientation or a malformed coefficient.
    """
    coefficients = list(data["coeffs"])
    orientation = data.get("shift", "+")
    n = len(coefficients) - 1
    if orientation == "+":
        offsets = list(range(n + 1))
    elif orientation == "central":
        offsets = list(range(-n, n + 1, 2))
    else:
        msg = f"unknown shift orientation {orientation!r}"
        raise ParameterError(msg)
    shift = data.get("c", {"re": 0.0, "im": 1.0})
    try:
        terms = tuple(
            _coefficient_term(offset, entry)
            for offset, entry in zip(offsets, coefficients, strict=True)
        )
    except (KeyError, TypeError, ValueError) as exc:
        msg = f"malformed equation coefficient: {exc}"
        raise ParameterError(msg) from exc
    return InterpolationEquation(
        terms, complex(shift["re"], shift["im"]), data.get("label", "equation")
    )


def load_equation(path: str | Path) -> InterpolationEquation:
    with Path(path).open() as f:
        return equation_from_json(json.load(f))


@dataclass(frozen=True)
class OrderBoundReport:
    """Estimated orders of a solution and of the coefficients."""

    sigma_y: float
    sigma_l: float
    residual: float
    threshold: float = -0.1
    details: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.sigma_y - self.sigma_l - 0.5

    @property
    def passed(self) -> bool:
        return self.margin >= self.threshold


def check_solution(
    eq: InterpolationEquation,
    y: MeromorphicModel,
    points: int = 8,
    radius: float = 6.0,
    seed: int = 1,
) -> float:
    """
    Largest relative residual at seeded points off the cut.

    Raises
    ------
    NotASolutionError
        If the residual exceeds 1e-6.
    """
    rng = np.random.default_rng(seed)
    x = radius * rng.uniform(0.2, 1, points) * np.exp(
        1j * rng.uniform(-0.8, 0.8, points) * np.pi
    )
    worst = max(interp_residual(eq, y, xi).relative for xi in x)
    if worst > SOLUTION_TOLERANCE:
        msg = f"{y.label} leaves the residual {worst:.3g} in {eq.label}"
        raise NotASolutionError(msg)
    return worst


def order_bound_report(
    eq: InterpolationEquation,
    y: MeromorphicModel,
    r_grid: Sequence[float],
    tol: float | None = None,
    coefficient_order: Callable[[EquationTerm], float] | None = None,
    **quadrature: Any,
) -> OrderBoundReport:
    """
    Orders of y and of the coefficients with the margin
    sigma_y - sigma_l - 1/2, passing when it is at least -0.1.

    Polynomial coefficients have order 0; model coefficients are
    estimated with `order_estimate` (or ``coefficient_order``).

    Raises
    ------
    NotASolutionError
        If y does not solve the equation.
    """
    residual = check_solution(eq, y)
    sigma_y = order_estimate(y, r_grid, tol, **quadrature).sigma

    def estimate(term: EquationTerm) -> float:
        if coefficient_order is not None:
            return coefficient_order(term)
        if term.model is None or term.model.constant is not None:
            return 0.0
        return order_estimate(term.model, r_grid, tol, **quadrature).sigma

    orders = [estimate(term) for term in eq.terms]
    report = OrderBoundReport(
        sigma_y,
        max(orders),
        residual,
        details={"coefficient_orders": orders},
    )
    msg = (
        f"{eq.label}: sigma_y {sigma_y:.3f}, sigma_l {report.sigma_l:.3f}, "
        f"margin {report.margin:.3f}"
    )
    log.info(msg)
    return report
