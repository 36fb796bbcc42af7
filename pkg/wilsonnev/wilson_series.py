"""
Wilson series sum_k a_k tau_k(x; a) with tau_k(x; a) = prod_{j<k} ((a + j i)^2 - x).

Coefficients come from interpolation at the nodes x_j = (a + j i)^2:
tau_k vanishes at x_m for k > m, so the system is lower triangular.
Columns are scaled to a unit diagonal before the forward solve.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from wilsonnev.errors import ParameterError
from wilsonnev.funcmodel import top_decade
from wilsonnev.logger import get_logger
from wilsonnev.nevanlinna import radius_sweep
from wilsonnev.wilson_core import Evaluator

log = get_logger(__name__)

TWO_LN2 = 2 * np.log(2.0)


def nodes(a: complex, count: int) -> np.ndarray:
    """Interpolation nodes (a + j i)^2, j = 0..count-1."""
    return (complex(a) + 1j * np.arange(count)) ** 2


def tau(k: int, a: complex, x: complex | np.ndarray) -> complex | np.ndarray:
    """tau_k(x; a); tau_0 = 1."""
    if k < 0:
        msg = f"tau index must be nonnegative, got {k}"
        raise ParameterError(msg)
    x = np.asarray(x, dtype=complex)
    value = np.ones(x.shape, complex)
    for node in nodes(a, k):
        value = value * (node - x)
    return complex(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class WilsonSeries:
    """Truncated Wilson series at an anchor."""

    anchor: complex
    coefficients: tuple[complex, ...]
    gate_margin: float | None = None
    flags: tuple[str, ...] = field(default_factory=tuple)

    @property
    def truncation(self) -> int:
        return len(self.coefficients) - 1

    @property
    def gate_failed(self) -> bool:
        return self.gate_margin is not None and self.gate_margin <= 0

    def to_json(self) -> dict:
        return {
            "a": {"re": self.anchor.real, "im": self.anchor.imag},
            "coeffs": [{"re": c.real, "im": c.imag} for c in self.coefficients],
            "K": self.truncation,
            "gate_margin": self.gate_margin,
            "flags": list(self.flags),
        }


def growth_gate(
    f: Evaluator,
    r_grid: Sequence[float],
    gate_samples: int = 720,
    log_f: Evaluator | None = None,
    threads: int = 1,
    **_: object,
) -> float:
    """
    Margin 2 ln 2 - max over the top decade of ln M(r) / sqrt(r).

    M(r) is the maximum of |f| over ``gate_samples`` points on |x| = r;
    with ``log_f`` the maximum is taken in log space. A negative margin
    means the expansion hypothesis fails.
    """
    theta = 2 * np.pi * np.arange(gate_samples) / gate_samples

    def ratio(r: float) -> float:
        points = r * np.exp(1j * theta)
        if log_f is not None:
            log_max = float(np.max(np.real(log_f(points))))
        else:
            with np.errstate(divide="ignore"):
                log_max = float(np.log(np.max(np.abs(f(points)))))
        return log_max / np.sqrt(r)

    ratios = radius_sweep(ratio, top_decade(r_grid), threads)
    margin = TWO_LN2 - max(ratios)
    msg = f"growth gate margin {margin:.4f}"
    log.debug(msg)
    return float(margin)


def _scaled_system(a: complex, count: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Unit-diagonal matrix tau_k(x_m) / tau_k(x_k) with log|tau_k(x_k)| and
    the phase of tau_k(x_k).
    """
    x = nodes(a, count)
    scaled = np.zeros((count, count), complex)
    log_diag = np.zeros(count)
    phase = np.ones(count, complex)
    for k in range(count):
        factors = x[:k] - x[k]
        if np.any(np.abs(factors) < 1e-300):
            msg = f"anchor {a} has coincident nodes; tau_{k}(x_{k}) vanishes"
            raise ParameterError(msg)
        log_diag[k] = float(np.sum(np.log(np.abs(factors))))
        phase[k] = np.prod(factors / np.abs(factors))
        for m in range(k, count):
            ratio = (x[:k] - x[m]) / factors
            scaled[m, k] = np.prod(ratio)
    return scaled, log_diag, phase


def expand(
    f: Evaluator,
    a: complex = 0.0,
    K: int = 64,
    r_grid: Sequence[float] | None = None,
    log_f: Evaluator | None = None,
    gate_samples: int = 720,
    threads: int = 1,
) -> WilsonSeries:
    """
    Wilson series coefficients a_0..a_K at the anchor a.

    When a radius grid is given the growth gate is evaluated first; a
    failing gate is logged and flagged, and the expansion is still
    returned.

    Raises
    ------
    ParameterError
        If K < 0 or two nodes coincide.
    """
    if K < 0:
        msg = f"truncation must be nonnegative, got {K}"
        raise ParameterError(msg)
    a = complex(a)
    margin = None
    flags = []
    if r_grid is not None:
        margin = growth_gate(f, r_grid, gate_samples, log_f, threads)
        if margin <= 0:
            msg = f"growth gate fails (margin {margin:.3f}); expansion flagged"
            log.warning(msg)
            flags.append("gate-failed")

    scaled, log_diag, phase = _scaled_system(a, K + 1)
    values = np.asarray(f(nodes(a, K + 1)), dtype=complex)
    if not np.all(np.isfinite(values)):
        msg = f"evaluator is not finite at the nodes of anchor {a}"
        raise ParameterError(msg)
    solution = solve_triangular(scaled, values, lower=True, unit_diagonal=True)
    with np.errstate(under="ignore", over="ignore"):
        coefficients = solution * np.exp(-log_diag) / phase
    return WilsonSeries(a, tuple(complex(c) for c in coefficients), margin, tuple(flags))


def reconstruct(series: WilsonSeries, x: complex | np.ndarray) -> complex | np.ndarray:
    """Horner evaluation S_k = a_k + ((a + k i)^2 - x) S_{k+1}."""
    x = np.asarray(x, dtype=complex)
    total = np.zeros(x.shape, complex)
    coefficients = series.coefficients
    anchors = nodes(series.anchor, len(coefficients))
    for k in range(len(coefficients) - 1, -1, -1):
        total = coefficients[k] + (anchors[k] - x) * total
    return complex(total) if total.ndim == 0 else total


def reconstruction_error(
    series: WilsonSeries,
    f: Evaluator,
    radius: float = 10.0,
    samples: int = 50,
    seed: int = 0,
) -> float:
    """Largest |reconstruct - f| at seeded random points of |x| <= radius."""
    rng = np.random.default_rng(seed)
    points = radius * np.sqrt(rng.uniform(0, 1, samples)) * np.exp(
        2j * np.pi * rng.uniform(0, 1, samples)
    )
    return float(np.max(np.abs(reconstruct(series, points) - f(points))))
