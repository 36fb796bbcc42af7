"""
Classical Nevanlinna functionals on circles |x| = r.

The proximity function m(r, f) is the circle mean of ln+|f|, computed by
a composite trapezoid rule whose sample count doubles until two estimates
agree; counting functions are closed-form sums over declared divisors.
Everything works on log f, so radii up to 1e6 are safe for e^x.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from functools import partial
from multiprocessing.pool import ThreadPool
from typing import Any, NamedTuple, TypeVar

import numpy as np

from wilsonnev.errors import MissingDivisorError, NudgeError
from wilsonnev.funcmodel import (
    DivisorStream,
    MeromorphicModel,
    fit_exponent,
    is_infinite,
    top_decade,
)
from wilsonnev.logger import get_logger, get_progress
from wilsonnev.wilson_core import DEFAULT_SHIFT, sqrt_with_cut

log = get_logger(__name__)

DEFAULT_TOL = 1e-8
T = TypeVar("T")


class ProximityResult(NamedTuple):
    """Circle mean with its error estimate and the radius actually used."""

    value: float
    error: float
    radius: float
    samples: int
    nudges: int = 0


@dataclass(frozen=True)
class CharacteristicRow:
    """One radius of the characteristic: T = m + N."""

    r: float
    m: float
    N: float
    T: float
    quadrature_error: float
    nudges: int = 0

    @classmethod
    def from_parts(
        cls,
        r: float,
        proximity: ProximityResult,
        counting: float,
    ) -> CharacteristicRow:
        return cls(
            r=r,
            m=proximity.value,
            N=counting,
            T=proximity.value + counting,
            quadrature_error=proximity.error,
            nudges=proximity.nudges,
        )


def radius_sweep(
    function: Callable[[float], T],
    radii: Iterable[float],
    threads: int = 1,
    description: str | None = None,
) -> list[T]:
    """
    Apply ``function`` to every radius, in order.

    Rows are independent, so with threads > 1 they are computed by a
    thread pool; ``imap`` keeps the output in radius order. A progress bar
    is shown when a description is given.
    """
    radii = list(radii)
    pool = ThreadPool(threads) if threads > 1 else None
    rows = pool.imap(function, radii) if pool else map(function, radii)
    try:
        if description is None:
            return list(rows)
        with get_progress() as progress:
            task = progress.add_task(description, total=len(radii))
            collected = []
            for row in rows:
                collected.append(row)
                progress.advance(task)
            return collected
    finally:
        if pool:
            pool.close()
            pool.join()


def circle_mean(
    integrand: Callable[[np.ndarray], np.ndarray],
    r: float,
    tol: float | None = None,
    initial_samples: int = 256,
    max_samples: int = 131072,
    absolute_radius: float = 1000.0,
    relative_tol: float = 1e-6,
    **_: Any,
) -> tuple[float, float, int]:
    """
    Mean of integrand(r e^{i theta}) over theta by the trapezoid rule.

    The sample count doubles (reusing previous samples) until successive
    estimates differ by less than the tolerance: ``tol`` up to
    ``absolute_radius``, ``relative_tol`` times the estimate above.
    Non-finite samples count as 0.

    Returns
    -------
    mean, error, samples : float, float, int
    """
    tol = DEFAULT_TOL if tol is None else tol

    def sample(theta: np.ndarray) -> np.ndarray:
        values = np.asarray(integrand(r * np.exp(1j * theta)), dtype=float)
        bad = ~np.isfinite(values)
        if np.any(bad):
            msg = f"{int(bad.sum())} non-finite samples on |x|={r}"
            log.debug(msg)
            values = np.where(bad, 0.0, values)
        return values

    n = initial_samples
    total = float(np.sum(sample(2 * np.pi * np.arange(n) / n)))
    estimate = total / n
    error = math.inf
    while 2 * n <= max_samples:
        theta = 2 * np.pi * (np.arange(n) + 0.5) / n
        total += float(np.sum(sample(theta)))
        n *= 2
        refined = total / n
        error = abs(refined - estimate)
        estimate = refined
        limit = tol if r <= absolute_radius else relative_tol * max(
            1.0, abs(estimate)
        )
        if error < limit:
            break
    else:
        msg = f"circle mean on |x|={r} stopped at {n} samples, error {error:.3g}"
        log.warning(msg)
    return estimate, error, n


def _declared_streams(model: MeromorphicModel, a: complex | None) -> list[DivisorStream]:
    streams = [model.poles]
    if model.zeros is not None:
        streams.append(model.zeros)
    if not is_infinite(a) and complex(a) != 0:
        try:
            streams.append(model.divisors_for(a))
        except MissingDivisorError:
            pass
    return streams


def nudged_radius(
    streams: Sequence[DivisorStream],
    r: float,
    nudge_factor: float = 1e-5,
    nudge_distance: float = 1e-6,
    max_nudges: int = 3,
    **_: Any,
) -> tuple[float, int]:
    """
    Move r to r (1 + nudge_factor) while a divisor lies within
    nudge_distance * r of the circle.

    Raises
    ------
    NudgeError
        If the circle is still too close after ``max_nudges`` moves.
    """
    radius = r
    for nudges in range(max_nudges + 1):
        reach = radius * (1 + nudge_distance) + 1
        close = [
            d.location
            for stream in streams
            for d in stream.enumerate(reach)
            if abs(abs(d.location) - radius) <= nudge_distance * radius
        ]
        if not close:
            if nudges:
                msg = f"radius {r} nudged {nudges} times to {radius}"
                log.debug(msg)
            return radius, nudges
        if nudges < max_nudges:
            radius *= 1 + nudge_factor
    msg = f"divisor {close[0]} stays within {nudge_distance}*r of |x|={radius}"
    raise NudgeError(msg)


def _log_abs_integrand(
    model: MeromorphicModel,
    a: complex | None,
) -> Callable[[np.ndarray], np.ndarray]:
    """ln+ of |f| (a = infinity) or of 1/|f - a|."""
    if is_infinite(a):
        return lambda x: np.maximum(np.real(model.log_value(x)), 0.0)
    a = complex(a)
    if a == 0:
        return lambda x: np.maximum(-np.real(model.log_value(x)), 0.0)

    def integrand(x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            return np.maximum(-np.log(np.abs(model.value(x) - a)), 0.0)

    return integrand


def proximity(
    model: MeromorphicModel,
    r: float,
    tol: float | None = None,
    a: complex | None = None,
    **quadrature: Any,
) -> ProximityResult:
    """
    Proximity function m(r, f), or m(r, 1/(f - a)) for finite a.

    Parameters
    ----------
    model : MeromorphicModel
        Model with an evaluator.
    r : float
        Radius of the circle.
    tol : float, optional
        Absolute tolerance (default 1e-8) used up to the absolute radius.
    a : complex, optional
        Value; None or infinity gives m(r, f).
    **quadrature
        Entries of the ``quadrature`` configuration section.

    Raises
    ------
    EvaluatorRequiredError
        For divisor-only models.
    NudgeError
        If no admissible radius is found near r.
    """
    model.require_evaluator("proximity")
    radius, nudges = nudged_radius(_declared_streams(model, a), r, **quadrature)
    value, error, samples = circle_mean(
        _log_abs_integrand(model, a), radius, tol, **quadrature
    )
    return ProximityResult(value, error, radius, samples, nudges)


def counting_unintegrated(stream: DivisorStream, r: float) -> int:
    """n(r): divisors with |location| <= r, with multiplicity."""
    return sum(d.multiplicity for d in stream.enumerate(r))


def counting_integrated(stream: DivisorStream, r: float) -> float:
    """
    N(r) = sum over 0 < |b| <= r of m ln(r/|b|) + n(0) ln r.
    """
    total = 0.0
    for divisor in stream.enumerate(r):
        modulus = abs(divisor.location)
        if modulus == 0:
            total += divisor.multiplicity * math.log(r)
        else:
            total += divisor.multiplicity * math.log(r / modulus)
    return total


def characteristic(
    model: MeromorphicModel,
    r: float,
    tol: float | None = None,
    a: complex | None = None,
    **quadrature: Any,
) -> CharacteristicRow:
    """
    Characteristic T(r, f) = m(r, f) + N(r, f).

    For finite a this is T(r, 1/(f - a)), with N counting the a-points.
    The counting function is taken at the nudged radius of the proximity
    function.
    """
    prox = proximity(model, r, tol, a, **quadrature)
    stream = model.divisors_for(None if is_infinite(a) else a)
    return CharacteristicRow.from_parts(
        r, prox, counting_integrated(stream, prox.radius)
    )


def characteristic_sweep(
    model: MeromorphicModel,
    radii: Iterable[float],
    tol: float | None = None,
    a: complex | None = None,
    threads: int = 1,
    **quadrature: Any,
) -> list[CharacteristicRow]:
    """`characteristic` over a radius grid, in radius order."""
    func = partial(characteristic, model, tol=tol, a=a, **quadrature)
    return radius_sweep(func, radii, threads, f"T(r) of {model.label}")


@dataclass(frozen=True)
class FFTReport:
    """T(r, 1/(f - a)) - T(r, f) along a radius grid."""

    a: complex
    radii: tuple[float, ...]
    residuals: tuple[float, ...]
    slope: float

    @property
    def passed(self) -> bool:
        return abs(self.slope) <= 0.05


def fft_residual(
    model: MeromorphicModel,
    a: complex,
    r_grid: Sequence[float],
    tol: float | None = None,
    threads: int = 1,
    **quadrature: Any,
) -> FFTReport:
    """
    First-main-theorem residual T(r, 1/(f - a)) - T(r, f).

    The residual is bounded, so its least-squares slope against ln r is
    close to zero.

    Raises
    ------
    MissingDivisorError
        If the a-points of the model are not declared.
    """
    model.divisors_for(a)

    def residual(r: float) -> float:
        inverse = characteristic(model, r, tol, a, **quadrature)
        direct = characteristic(model, r, tol, None, **quadrature)
        return inverse.T - direct.T

    radii = [float(r) for r in r_grid]
    residuals = radius_sweep(residual, radii, threads, f"FFT a={a}")
    slope = (
        float(np.polyfit(np.log(radii), residuals, 1)[0]) if len(radii) > 1 else 0.0
    )
    msg = f"{model.label}: FFT residual slope {slope:.3g} for a={a}"
    log.info(msg)
    return FFTReport(complex(a), tuple(radii), tuple(residuals), slope)


def log_difference(
    log_upper: np.ndarray,
    log_lower: np.ndarray,
) -> np.ndarray:
    """log(e^A - e^B) from log values A and B, on some branch."""
    log_upper = np.asarray(log_upper, dtype=complex)
    log_lower = np.asarray(log_lower, dtype=complex)
    swap = np.real(log_lower) > np.real(log_upper)
    big = np.where(swap, log_lower, log_upper)
    small = np.where(swap, log_upper, log_lower)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        value = big + np.log(1 - np.exp(small - big))
    value = np.where(swap, value + 1j * np.pi, value)
    both_zero = np.isneginf(np.real(big))
    return np.where(both_zero, complex(-math.inf, 0.0), value)


def log_abs_difference(
    log_upper: np.ndarray,
    log_lower: np.ndarray,
) -> np.ndarray:
    """ln|e^A - e^B|; -inf where the two values agree."""
    return np.real(log_difference(log_upper, log_lower))


def log_abs_wilson_difference(
    model: MeromorphicModel,
    x: np.ndarray,
    c: complex = DEFAULT_SHIFT,
) -> np.ndarray:
    """ln|D_{W,c} f(x)| computed from log f at x^+ and x^-."""
    z = np.asarray(sqrt_with_cut(x, c), dtype=complex)
    upper = np.asarray(model.log_value((z + c / 2) ** 2), dtype=complex)
    lower = np.asarray(model.log_value((z - c / 2) ** 2), dtype=complex)
    with np.errstate(divide="ignore"):
        return log_abs_difference(upper, lower) - np.log(np.abs(2 * c * z))


def log_wilson_proximity(
    model: MeromorphicModel,
    r: float,
    c: complex = DEFAULT_SHIFT,
    tol: float | None = None,
    **quadrature: Any,
) -> ProximityResult:
    """
    m(r, D_{W,c} f / f).

    ln+ of an exact zero of D_W f counts as 0, so constants give 0.
    """
    model.require_evaluator("log_wilson_proximity")
    radius, nudges = nudged_radius(_declared_streams(model, None), r, **quadrature)

    def integrand(x: np.ndarray) -> np.ndarray:
        value = log_abs_wilson_difference(model, x, c) - np.real(model.log_value(x))
        return np.maximum(np.nan_to_num(value, nan=0.0, neginf=0.0), 0.0)

    value, error, samples = circle_mean(integrand, radius, tol, **quadrature)
    return ProximityResult(value, error, radius, samples, nudges)


@dataclass(frozen=True)
class GrowthReport:
    """Values along a radius grid and their fitted top-decade exponent."""

    radii: tuple[float, ...]
    values: tuple[float, ...]
    exponent: float
    band: float


def growth_exponent(radii: Sequence[float], values: Sequence[float]) -> GrowthReport:
    """Least-squares exponent of values against r over the top decade."""
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    top = top_decade(radii)
    mask = np.isin(radii, top)
    exponent, band = fit_exponent(radii[mask], values[mask])
    return GrowthReport(tuple(radii), tuple(values), exponent, band)


@dataclass(frozen=True)
class ProbeReport:
    """Pointwise log-difference probe along a ray or a circle."""

    points: tuple[complex, ...]
    values: tuple[float, ...]
    bounds: tuple[float, ...]
    flagged: int
    excluded: int

    @property
    def fraction(self) -> float:
        counted = len(self.points) - self.excluded
        return self.flagged / counted if counted else 0.0


def _probe(
    model: MeromorphicModel,
    points: np.ndarray,
    eps: float,
    c: complex,
) -> ProbeReport:
    model.require_evaluator("pointwise log-difference probe")
    exponent = model.declared_order - 0.5 + eps
    bounds = np.abs(points) ** exponent
    z = np.asarray(sqrt_with_cut(points, c), dtype=complex)
    upper = np.real(np.asarray(model.log_value((z + c / 2) ** 2), dtype=complex))
    centre = np.real(np.asarray(model.log_value(points), dtype=complex))
    with np.errstate(invalid="ignore"):
        values = np.abs(upper - centre)

    near = np.zeros(points.shape, dtype=bool)
    reach = float(np.max(np.abs(points))) * (1 + 1e-3) + 1
    for stream in _declared_streams(model, None):
        locations = np.array([d.location for d in stream.enumerate(reach)])
        if locations.size:
            distance = np.min(np.abs(points[:, None] - locations[None, :]), axis=1)
            near |= distance <= 1e-3 * np.abs(points)
    near |= ~np.isfinite(values)
    flagged = int(np.sum((values > bounds) & ~near))
    return ProbeReport(
        tuple(complex(p) for p in points),
        tuple(float(v) for v in values),
        tuple(float(b) for b in bounds),
        flagged,
        int(np.sum(near)),
    )


def pointwise_logdiff_probe(
    model: MeromorphicModel,
    theta: float,
    r_grid: Sequence[float],
    eps: float = 0.1,
    c: complex = DEFAULT_SHIFT,
) -> ProbeReport:
    """
    Radial probe of |ln|f(x^+)/f(x)|| against r^{sigma - 1/2 + eps}.

    Points within 1e-3 r of a declared divisor are excluded and counted
    separately.
    """
    points = np.asarray(r_grid, dtype=float) * np.exp(1j * theta)
    return _probe(model, points, eps, c)


def angular_logdiff_probe(
    model: MeromorphicModel,
    r: float,
    samples: int = 360,
    eps: float = 0.1,
    c: complex = DEFAULT_SHIFT,
) -> ProbeReport:
    """The probe of `pointwise_logdiff_probe` on the circle |x| = r."""
    theta = 2 * np.pi * (np.arange(samples) + 0.5) / samples
    return _probe(model, r * np.exp(1j * theta), eps, c)
