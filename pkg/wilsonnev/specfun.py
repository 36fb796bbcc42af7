"""
Complex special functions used throughout the package.

Gamma and log-gamma wrap `scipy.special` with an explicit pole check,
`hyp2f1` sums the Gauss series and switches to the Gauss and Kummer closed
forms at z = 1 and z = -1, `hyp4f3_terminating` is the finite sum behind
Wilson polynomials, `infinite_product` evaluates genus-zero canonical
products over a divisor stream with a certified tail, and
`hyperbolic_gamma` integrates the hyperbolic gamma function inside its
strip.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special

from wilsonnev.errors import (
    DivergenceError,
    GammaPoleError,
    ParameterError,
    StripError,
)
from wilsonnev.logger import get_logger

if TYPE_CHECKING:
    from wilsonnev.funcmodel import DivisorStream

log = get_logger(__name__)

POLE_DISTANCE = 1e-13
SERIES_FLOOR = 1e-16
MAX_SERIES_TERMS = 200_000
POCHHAMMER_RESCALE = 1e30
GAUSS_NODES, GAUSS_WEIGHTS = leggauss(16)


@dataclass(frozen=True)
class TailBound:
    """
    Truncation bookkeeping of a series or product.

    Attributes
    ----------
    terms_used : int
        Number of terms (or factors) actually summed.
    tail_estimate : float
        Bound on the neglected tail.
    converged : bool
        True when the tail estimate is below the requested tolerance
        (floored at 1e-16 of the partial sum for series).
    at_zero : int
        Multiplicity of the declared zero hit by the argument, 0 otherwise.
    """

    terms_used: int
    tail_estimate: float
    converged: bool
    at_zero: int = 0

    def __post_init__(self) -> None:
        if self.tail_estimate < 0:
            msg = f"tail estimate must be nonnegative: {self.tail_estimate}"
            raise ValueError(msg)


def _is_nonpositive_integer(z: complex, atol: float = POLE_DISTANCE) -> bool:
    n = round(z.real)
    return n <= 0 and abs(z - n) < atol


def _check_gamma_poles(z: np.ndarray) -> None:
    n = np.round(z.real)
    bad = (n <= 0) & (np.abs(z - n) < POLE_DISTANCE)
    if np.any(bad):
        offending = complex(z[bad].flat[0])
        msg = f"gamma pole at nonpositive integer argument {offending}"
        raise GammaPoleError(msg)


def gamma(z: complex | np.ndarray) -> complex | np.ndarray:
    """
    Complex gamma function.

    Raises
    ------
    GammaPoleError
        If an argument is within 1e-13 of a nonpositive integer.
    """
    arr = np.asarray(z, dtype=complex)
    _check_gamma_poles(arr)
    value = special.gamma(arr)
    return complex(value) if arr.ndim == 0 else value


def log_gamma(z: complex | np.ndarray) -> complex | np.ndarray:
    """
    Principal branch of log Gamma, continuous along rays from +infinity.

    Raises
    ------
    GammaPoleError
        If an argument is within 1e-13 of a nonpositive integer.
    """
    arr = np.asarray(z, dtype=complex)
    _check_gamma_poles(arr)
    value = special.loggamma(arr)
    return complex(value) if arr.ndim == 0 else value


def gamma_ratio(
    w: complex | np.ndarray,
    alpha: complex,
    beta: complex,
) -> complex | np.ndarray:
    """Gamma(w + alpha) / Gamma(w + beta) evaluated in log space."""
    arr = np.asarray(w, dtype=complex)
    value = np.exp(log_gamma(arr + alpha) - log_gamma(arr + beta))
    return complex(value) if arr.ndim == 0 else value


def pochhammer(a: complex, k: int) -> complex:
    """
    Rising factorial (a)_k as a running product.

    The running product is renormalised in log space whenever its modulus
    exceeds 1e30, so intermediate overflow only happens when the result
    itself overflows.
    """
    if k < 0:
        msg = f"Pochhammer index must be nonnegative, got {k}"
        raise ParameterError(msg)
    value = 1.0 + 0.0j
    log_scale = 0.0
    for j in range(k):
        value *= a + j
        size = abs(value)
        if size > POCHHAMMER_RESCALE:
            log_scale += math.log(size)
            value /= size
    if value == 0:
        return 0j
    return value * math.exp(log_scale) if log_scale else value


def hyp2f1(
    a: complex,
    b: complex,
    c: complex,
    z: complex,
    tol: float = 1e-15,
) -> tuple[complex, TailBound]:
    """
    Gauss hypergeometric function 2F1(a, b; c; z).

    Parameters
    ----------
    a, b, c : complex
        Parameters; c must not be a nonpositive integer.
    z : complex
        Argument with |z| < 1, or z = 1 with Re(c - a - b) > 0 (Gauss),
        or z = -1 with c = 1 + a - b or c = 1 + b - a (Kummer).
    tol : float
        Absolute tolerance of the series tail.

    Returns
    -------
    value : complex
    bound : TailBound
        Zero tail for closed forms and terminating series.

    Raises
    ------
    ParameterError
        If c is a nonpositive integer.
    DivergenceError
        If |z| >= 1 outside the closed-form cases.
    """
    a, b, c, z = complex(a), complex(b), complex(c), complex(z)
    if _is_nonpositive_integer(c):
        msg = f"2F1 lower parameter c={c} is a nonpositive integer"
        raise ParameterError(msg)
    if z == 0:
        return 1.0 + 0.0j, TailBound(1, 0.0, True)

    terminating = [
        -round(p.real)
        for p in (a, b)
        if _is_nonpositive_integer(p, atol=1e-14)
    ]
    if terminating:
        return _hyp2f1_series(a, b, c, z, tol, last=min(terminating))

    if abs(z - 1) < 1e-15:
        if (c - a - b).real <= 0:
            msg = f"2F1 at z=1 needs Re(c-a-b) > 0, got {c - a - b}"
            raise DivergenceError(msg)
        value = (
            gamma(c)
            * gamma(c - a - b)
            * special.rgamma(c - a)
            * special.rgamma(c - b)
        )
        return complex(value), TailBound(0, 0.0, True)

    if abs(z + 1) < 1e-15:
        if abs(c - (1 + b - a)) < 1e-12 and abs(c - (1 + a - b)) >= 1e-12:
            a, b = b, a
        if abs(c - (1 + a - b)) < 1e-12:
            value = (
                gamma(1 + a - b)
                * gamma(1 + a / 2)
                * special.rgamma(1 + a)
                * special.rgamma(1 + a / 2 - b)
            )
            return complex(value), TailBound(0, 0.0, True)

    if abs(z) >= 1:
        msg = f"2F1 series diverges at |z|={abs(z)} outside Gauss/Kummer"
        raise DivergenceError(msg)
    return _hyp2f1_series(a, b, c, z, tol)


def _hyp2f1_series(
    a: complex,
    b: complex,
    c: complex,
    z: complex,
    tol: float,
    last: int | None = None,
) -> tuple[complex, TailBound]:
    term = 1.0 + 0.0j
    total = 1.0 + 0.0j
    limit = MAX_SERIES_TERMS if last is None else last
    k = 0
    tail = math.inf
    while k < limit:
        ratio = (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        term *= ratio
        total += term
        k += 1
        if last is not None:
            continue
        following = abs((a + k) * (b + k) / ((c + k) * (k + 1)) * z)
        rho = max(following, abs(z))
        if rho < 1:
            tail = abs(term) * rho / (1 - rho)
            if tail <= max(tol, SERIES_FLOOR * abs(total)):
                return total, TailBound(k + 1, tail, True)
    if last is not None:
        return total, TailBound(k + 1, 0.0, True)
    msg = f"2F1 series used {k} terms with tail {tail:.3e} above {tol:.1e}"
    log.warning(msg)
    return total, TailBound(k + 1, tail, False)


def hyp4f3_terminating(
    n: int,
    upper: tuple,
    lower: tuple,
    arg: complex = 1.0,
) -> complex | np.ndarray:
    """
    Terminating 4F3(-n, u1, u2, u3; l1, l2, l3; arg) as an (n+1)-term sum.

    The parameters may be numpy arrays; they broadcast against each other.

    Raises
    ------
    ParameterError
        If a lower Pochhammer symbol vanishes inside the summation range.
    """
    if n < 0:
        msg = f"terminating 4F3 needs n >= 0, got {n}"
        raise ParameterError(msg)
    u1, u2, u3 = (np.asarray(u, dtype=complex) for u in upper)
    l1, l2, l3 = (np.asarray(lo, dtype=complex) for lo in lower)
    term = np.ones(np.broadcast(u1, u2, u3, l1, l2, l3).shape, complex)
    total = term.copy()
    for k in range(n):
        denominator = (l1 + k) * (l2 + k) * (l3 + k)
        if np.any(np.abs(denominator) < POLE_DISTANCE):
            msg = f"4F3 lower Pochhammer vanishes at k={k} for lower={lower}"
            raise ParameterError(msg)
        term = (
            term
            * (-n + k)
            * (u1 + k)
            * (u2 + k)
            * (u3 + k)
            / (denominator * (k + 1))
            * arg
        )
        total = total + term
    return complex(total) if total.ndim == 0 else total


def trigamma_shifted(w: complex) -> complex:
    """Trigamma psi_1(w) for complex w off the nonpositive integers."""
    w = complex(w)
    acc = 0j
    while abs(w) < 10 or w.real < 1:
        acc += 1 / (w * w)
        w += 1
    inv = 1 / w
    inv2 = inv * inv
    series = inv * (
        1
        + inv / 2
        + inv2 / 6
        - inv2 * inv2 / 30
        + inv2 * inv2 * inv2 / 42
    )
    return acc + series


def infinite_product(
    zeros: DivisorStream,
    x: complex,
    tol: float = 1e-12,
) -> tuple[complex, TailBound]:
    """
    Canonical product prod (1 - x/x_k)^{m_k} over a divisor stream.

    Factors up to a cut radius R are multiplied in log space; the tail
    beyond R contributes its first-order term -x * M1(R) exactly (M1 is
    the stream's moment sum m_k / x_k) and the remaining error is bounded
    by |x|^2 M1abs / (2 R (1 - |x|/R)). R is quadrupled until that bound
    is below tol. A zero at the origin contributes x^m.

    Returns
    -------
    value : complex
        Exactly 0 when x is a declared zero.
    bound : TailBound
        ``at_zero`` carries the multiplicity in that case.
    """
    x = complex(x)
    if x == 0:
        at_origin = zeros.multiplicity_at(0j)
        value = 0j if at_origin else 1.0 + 0.0j
        return value, TailBound(0, 0.0, True, at_zero=at_origin)

    hit = zeros.multiplicity_at(x)
    if hit:
        return 0j, TailBound(0, 0.0, True, at_zero=hit)

    radius = max(64.0, 4.0 * abs(x))
    while True:
        head, moment, moment_abs = zeros.split(radius)
        if moment_abs == 0 or abs(x) >= radius:
            error = 0.0 if moment_abs == 0 else math.inf
        else:
            error = (
                abs(x) ** 2
                * moment_abs
                / (2 * radius * (1 - abs(x) / radius))
            )
        if error <= tol or radius > 1e18:
            break
        radius *= 4.0

    log_value = 0j
    for divisor in head:
        if divisor.location == 0:
            log_value += divisor.multiplicity * np.log(x)
        else:
            log_value += divisor.multiplicity * np.log1p(
                -x / divisor.location
            )
    log_value -= x * moment
    converged = error <= tol
    if not converged:
        msg = f"infinite product tail {error:.3e} above {tol:.1e} at x={x}"
        log.warning(msg)
    return complex(np.exp(log_value)), TailBound(
        len(head), float(error), converged
    )


def _check_strip(a: float, b: float, z: np.ndarray) -> float:
    if a <= 0 or b <= 0:
        msg = f"hyperbolic gamma needs a, b > 0, got {a}, {b}"
        raise ParameterError(msg)
    width = a + b - float(np.max(np.abs(2 * z.imag), initial=0.0))
    if width <= 0:
        worst = complex(z.flat[int(np.argmax(np.abs(z.imag)))])
        msg = f"|Im 2z| must stay below a+b={a + b} for z={worst}"
        raise StripError(msg)
    return width


def _composite_gauss(
    integrand: Callable[[np.ndarray, np.ndarray], np.ndarray],
    z: np.ndarray,
    lower: float,
    upper: float,
    panels: int,
) -> np.ndarray:
    edges = np.linspace(lower, upper, panels + 1)
    half = np.diff(edges)[:, None] / 2
    mid = (edges[:-1] + edges[1:])[:, None] / 2
    t = (mid + half * GAUSS_NODES[None, :]).ravel()
    w = (half * GAUSS_WEIGHTS[None, :]).ravel()
    return integrand(t[None, :], z[:, None]) @ w


def _small_t_integrand(
    t: np.ndarray, z: np.ndarray, a: float, b: float
) -> np.ndarray:
    kernel = np.sin(2 * t * z) / (2 * np.sinh(a * t) * np.sinh(b * t))
    return (kernel - z / (a * b * t)) / t


def _large_t_integrand(
    t: np.ndarray, z: np.ndarray, a: float, b: float
) -> np.ndarray:
    decay = -(a + b) * t
    numerator = np.exp(2j * t * z + decay) - np.exp(-2j * t * z + decay)
    denominator = 1j * t * (-np.expm1(-2 * a * t)) * (-np.expm1(-2 * b * t))
    return numerator / denominator


def log_hyperbolic_gamma(
    a: float,
    b: float,
    z: complex | np.ndarray,
    tol: float = 1e-10,
    chunk: int = 256,
) -> complex | np.ndarray:
    """
    Logarithm i*I(z) of the hyperbolic gamma function in its strip.

    I(z) is the integral over t > 0 of
    (sin(2tz) / (2 sinh(at) sinh(bt)) - z/(abt)) / t. Near t = 0 the
    integrand is replaced by its limit, on [t_min, 1] it is integrated as
    is, and beyond t = 1 the exponentially decaying form is integrated up
    to the cut T = ln(20/(delta tol))/delta with delta = a+b-|Im 2z|, the
    subtracted z/(abt^2) part being added analytically. Panels double until
    two estimates agree to tol.

    Raises
    ------
    StripError
        If |Im 2z| >= a + b.
    """
    arr = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty(arr.shape, dtype=complex)
    flat = arr.ravel()
    result = out.ravel()
    for start in range(0, flat.size, chunk):
        block = flat[start : start + chunk]
        result[start : start + chunk] = 1j * _integral(a, b, block, tol)
    if np.ndim(z) == 0:
        return complex(result[0])
    return result.reshape(np.shape(z))


def _integral(a: float, b: float, z: np.ndarray, tol: float) -> np.ndarray:
    delta = _check_strip(a, b, z)
    size = float(np.max(np.abs(z), initial=0.0))
    t_min = min(1e-3, 1e-3 / max(1.0, size))
    t_mid = 1.0
    t_max = max(2.0, math.log(20.0 / (delta * tol)) / delta)
    frequency = 2.0 * float(np.max(np.abs(z.real), initial=0.0)) + 1.0

    g0 = -(z / (a * b)) * (2 * z * z / 3 + (a * a + b * b) / 6)
    analytic = g0 * t_min - z / (a * b * t_mid)

    def small(t: np.ndarray, w: np.ndarray) -> np.ndarray:
        return _small_t_integrand(t, w, a, b)

    def large(t: np.ndarray, w: np.ndarray) -> np.ndarray:
        return _large_t_integrand(t, w, a, b)

    inner = max(4, math.ceil(frequency))
    outer = max(8, math.ceil((t_max - t_mid) * frequency / 4))
    previous = None
    for _ in range(8):
        estimate = (
            analytic
            + _composite_gauss(small, z, t_min, t_mid, inner)
            + _composite_gauss(large, z, t_mid, t_max, outer)
        )
        if previous is not None and np.max(np.abs(estimate - previous)) < tol:
            return estimate
        previous = estimate
        inner *= 2
        outer *= 2
        msg = f"hyperbolic gamma: doubling to {inner}+{outer} panels"
        log.debug(msg)
    msg = "hyperbolic gamma quadrature did not settle within 8 doublings"
    log.warning(msg)
    return estimate


def hyperbolic_gamma(
    a: float,
    b: float,
    z: complex | np.ndarray,
    tol: float = 1e-10,
) -> complex | np.ndarray:
    """
    Hyperbolic gamma function G(a, b; z) inside |Im 2z| < a + b.

    G is odd in the exponent, so G(-z) G(z) = 1 and G(0) = 1 hold exactly.

    Raises
    ------
    StripError
        Outside the strip of the integral representation.
    """
    value = np.exp(log_hyperbolic_gamma(a, b, z, tol))
    return complex(value) if np.ndim(value) == 0 else value
