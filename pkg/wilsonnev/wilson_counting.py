"""
Wilson counting functions, the ramification term, Wilson a-sequences and
Wilson defects.

Values a are handled by moving to the a-points: for a = infinity these
are the poles of f, for finite a the zeros of f - a. An a-point x of
multiplicity m is compared with x^{++}, the point two half steps further
along the lattice; the order of zero of D_W(1/f) at x^+ (with f replaced
by 1/(f - a) for finite a) decides how x is counted.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from functools import partial
from typing import Any, NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from wilsonnev.errors import DegenerateGridError, ParameterError
from wilsonnev.funcmodel import (
    Divisor,
    DivisorStream,
    MeromorphicModel,
    fit_exponent,
    is_infinite,
    log_winding_number,
    top_decade,
)
from wilsonnev.logger import get_logger
from wilsonnev.nevanlinna import (
    characteristic,
    circle_mean,
    counting_integrated,
    log_abs_wilson_difference,
    log_difference,
    nudged_radius,
    proximity,
    radius_sweep,
)
from wilsonnev.wilson_core import DEFAULT_SHIFT, apply_DW_origin, sqrt_with_cut

log = get_logger(__name__)

ROOT_TOLERANCE = 1e-9


class ShiftOrder(NamedTuple):
    """Order of zero of the Wilson difference at x^+; ambiguous on unresolved ties."""

    order: int
    ambiguous: bool = False


@dataclass(frozen=True)
class WilsonCountRow:
    """Wilson counting functions at one radius."""

    r: float
    n_W: int
    n_W_tilde: int
    N_W: float
    N_W_tilde: float


def canonical_root(z: complex, c: complex = DEFAULT_SHIFT) -> complex:
    """The root of z^2 selected by `sqrt_with_cut`, chosen from +-z."""
    v = -1j * c / abs(c)
    side = (z * v.conjugate()).real
    scale = ROOT_TOLERANCE * max(1.0, abs(z))
    if side > scale:
        return z
    if side < -scale:
        return -z
    reference = sqrt_with_cut(z * z, c)
    return z if abs(reference - z) <= abs(reference + z) else -z


def root_of(divisor: Divisor, c: complex = DEFAULT_SHIFT) -> complex:
    if divisor.root is not None:
        return canonical_root(divisor.root, c)
    return sqrt_with_cut(divisor.location, c)


def enumeration_radius(radius: float, c: complex = DEFAULT_SHIFT) -> float:
    """Radius that holds x^{++} for every x with |x| <= radius, with margin."""
    return (math.sqrt(radius) + 4 * abs(c)) ** 2


def a_point_stream(model: MeromorphicModel, a: complex | None) -> DivisorStream:
    """Poles for a = infinity, zeros of f - a otherwise."""
    return model.divisors_for(None if is_infinite(a) else a)


def _log_reciprocal(
    model: MeromorphicModel,
    a: complex | None,
) -> Callable[[np.ndarray], np.ndarray]:
    """log of 1/f for a = infinity and of f - a for finite a."""
    if is_infinite(a):
        return lambda x: -np.asarray(model.log_value(x), dtype=complex)
    a = complex(a)
    if a == 0:
        return lambda x: np.asarray(model.log_value(x), dtype=complex)

    def log_shifted(x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(np.asarray(model.value(x), dtype=complex) - a)

    return log_shifted


def tie_order(
    model: MeromorphicModel,
    root: complex,
    a: complex | None = None,
    c: complex = DEFAULT_SHIFT,
    tie_samples: int = 512,
    tie_radius: float = 0.05,
    **_: Any,
) -> int:
    """
    Order of zero of the Wilson difference at x^+ by the argument principle.

    Counts on the circle |w - (z + c/2)| = tie_radius |c| in square-root
    coordinates, where h(w) = (g((w + c/2)^2) - g((w - c/2)^2)) / (2cw)
    with g = 1/f (a = infinity) or f - a.
    """
    model.require_evaluator("tie resolution")
    log_g = _log_reciprocal(model, a)
    centre = root + c / 2
    theta = 2 * np.pi * np.arange(tie_samples) / tie_samples
    w = centre + tie_radius * abs(c) * np.exp(1j * theta)
    logs = log_difference(log_g((w + c / 2) ** 2), log_g((w - c / 2) ** 2))
    logs = logs - np.log(2 * c * w)
    winding = log_winding_number(logs)
    msg = f"tie at z={root}: winding {winding:.4f}"
    log.debug(msg)
    return max(round(winding), 0)


def dw_vanishing_order_at_shift(
    stream: DivisorStream,
    divisor: Divisor,
    model: MeromorphicModel | None = None,
    a: complex | None = None,
    c: complex = DEFAULT_SHIFT,
    next_multiplicity: int | None = None,
    **counting: Any,
) -> ShiftOrder:
    """
    Order of zero of D_W(1/f) at x^+ for an a-point x of multiplicity m.

    With m' the multiplicity at x^{++} (0 if absent) the order is
    min(m, m') when m != m'. Ties are resolved numerically when the model
    has an evaluator; otherwise m is returned with the ambiguity flag set.
    """
    root = root_of(divisor, c)
    m = divisor.multiplicity
    if next_multiplicity is None:
        next_multiplicity = stream.multiplicity_at((root + c) ** 2)
    if m != next_multiplicity:
        return ShiftOrder(min(m, next_multiplicity))
    if model is None or not model.has_evaluator:
        return ShiftOrder(m, ambiguous=True)
    return ShiftOrder(tie_order(model, root, a, c, **counting))


def shift_orders(
    stream: DivisorStream,
    radius: float,
    model: MeromorphicModel | None = None,
    a: complex | None = None,
    c: complex = DEFAULT_SHIFT,
    **counting: Any,
) -> list[tuple[Divisor, ShiftOrder]]:
    """Every a-point within radius with its shift order."""
    divisors = stream.enumerate(enumeration_radius(radius, c))
    roots = np.array([root_of(d, c) for d in divisors], dtype=complex)
    index = _RootIndex(roots)
    pairs = []
    for divisor, root in zip(divisors, roots, strict=True):
        if abs(divisor.location) > radius:
            continue
        nxt = index.find(root + c)
        following = 0 if nxt is None else divisors[nxt].multiplicity
        order = dw_vanishing_order_at_shift(
            stream, divisor, model, a, c, following, **counting
        )
        pairs.append((divisor, order))
    ambiguous = sum(order.ambiguous for _, order in pairs)
    if ambiguous:
        msg = f"{ambiguous} equal-multiplicity ties left unresolved"
        log.warning(msg)
    return pairs


def _log_weight(r: float, location: complex) -> float:
    modulus = abs(location)
    return math.log(r) if modulus == 0 else math.log(r / modulus)


def count_row(
    pairs: Sequence[tuple[Divisor, ShiftOrder]],
    r: float,
) -> WilsonCountRow:
    """Wilson counting functions at r from precomputed shift orders."""
    n_w = n_tilde = 0
    big_n = big_tilde = 0.0
    for divisor, order in pairs:
        if abs(divisor.location) > r:
            continue
        excess = max(0, divisor.multiplicity - order.order)
        weight = _log_weight(r, divisor.location)
        n_w += order.order
        n_tilde += excess
        big_n += order.order * weight
        big_tilde += excess * weight
    return WilsonCountRow(r, n_w, n_tilde, big_n, big_tilde)


def wilson_counts(
    model: MeromorphicModel,
    a: complex | None,
    r: float,
    c: complex = DEFAULT_SHIFT,
    **counting: Any,
) -> WilsonCountRow:
    """
    n_W, n~_W, N_W and N~_W of f at the value a.

    Raises
    ------
    MissingDivisorError
        If the a-points are not declared.
    """
    stream = a_point_stream(model, a)
    return count_row(shift_orders(stream, r, model, a, c, **counting), r)


def wilson_count_sweep(
    model: MeromorphicModel,
    a: complex | None,
    radii: Sequence[float],
    c: complex = DEFAULT_SHIFT,
    threads: int = 1,
    description: str | None = None,
    **counting: Any,
) -> list[WilsonCountRow]:
    """
    `wilson_counts` over a grid, in the order of ``radii``.

    Shift orders are computed once up to the largest radius; the rows are
    then dispatched through `radius_sweep`.
    """
    radii = list(radii)
    stream = a_point_stream(model, a)
    pairs = shift_orders(stream, max(radii), model, a, c, **counting)
    return radius_sweep(partial(count_row, pairs), radii, threads, description)


def counting_gap(
    model: MeromorphicModel,
    a: complex | None,
    r: float,
    c: complex = DEFAULT_SHIFT,
    **counting: Any,
) -> float:
    """N(r) - N_W(r) - N~_W(r) at the value a; never positive."""
    stream = a_point_stream(model, a)
    row = wilson_counts(model, a, r, c, **counting)
    return counting_integrated(stream, r) - row.N_W - row.N_W_tilde


def ramification_term(
    model: MeromorphicModel,
    r: float,
    c: complex = DEFAULT_SHIFT,
    tol: float | None = None,
    **quadrature: Any,
) -> float:
    """
    Wilson ramification term N(r, 1/D_W f) + 2N(r, f) - N(r, D_W f).

    By Jensen's formula the first and last terms combine to the circle
    mean of ln|D_W f| minus ln|D_W f(0)|, where D_W f(0) = f'(c^2/4).

    Raises
    ------
    ParameterError
        If D_W f vanishes at the origin (in particular on the kernel).
    """
    model.require_evaluator("ramification_term")
    origin = apply_DW_origin(model.value, model.derivative, c)
    if origin == 0 or not np.isfinite(origin):
        msg = f"D_W f(0) = {origin} for model {model.label!r}"
        raise ParameterError(msg)
    streams = [model.poles] + ([model.zeros] if model.zeros is not None else [])
    radius, _ = nudged_radius(streams, r, **quadrature)
    mean, _, _ = circle_mean(
        lambda x: log_abs_wilson_difference(model, x, c), radius, tol, **quadrature
    )
    return 2 * counting_integrated(model.poles, radius) + mean - math.log(
        abs(origin)
    )


# ---------------------------------------------------------------------------
# Wilson a-sequences


@dataclass(frozen=True)
class Chain:
    """A Wilson a-sequence found within a radius."""

    start: complex
    root: complex
    multiplicities: tuple[int, ...]
    truncated: bool = True

    def to_json(self) -> dict:
        return {
            "start": {"re": self.start.real, "im": self.start.imag},
            "mults": list(self.multiplicities),
            "truncated": self.truncated,
        }


@dataclass(frozen=True)
class ChainReport:
    """Chains and the residual set E_W within a radius."""

    chains: tuple[Chain, ...]
    residual: tuple[complex, ...]
    a_value: complex | None
    radius: float

    def to_json(self) -> dict:
        return {
            "a": None if is_infinite(self.a_value) else {
                "re": complex(self.a_value).real,
                "im": complex(self.a_value).imag,
            },
            "radius": self.radius,
            "chains": [chain.to_json() for chain in self.chains],
            "residual": [{"re": x.real, "im": x.imag} for x in self.residual],
        }


class _RootIndex:
    """Exact-up-to-rounding lookup of canonical roots."""

    def __init__(self, roots: np.ndarray) -> None:
        self.roots = roots
        self.tree = cKDTree(np.column_stack([roots.real, roots.imag])) if len(
            roots
        ) else None

    def find(self, z: complex) -> int | None:
        if self.tree is None:
            return None
        distance, idx = self.tree.query([z.real, z.imag])
        if distance <= ROOT_TOLERANCE * max(1.0, abs(z)):
            return int(idx)
        return None


def detect_chains(
    divisors: Sequence[Divisor],
    a: complex | None = None,
    c: complex = DEFAULT_SHIFT,
    radius: float = math.inf,
) -> ChainReport:
    """
    Assemble Wilson a-sequences from divisors in square-root coordinates.

    Runs follow z -> z + c. Each run splits into maximal segments of
    nondecreasing multiplicity. A segment is a chain when it reaches
    beyond the radius in the data (truncated) and its first point has no
    smaller predecessor: x^{--} is absent, carries a larger multiplicity,
    or coincides with x (x on the cut within c^2/4 of the origin).
    E_W is the set of a-points within radius outside every chain.

    Parameters
    ----------
    divisors : sequence of Divisor
        a-points, enumerated beyond radius (see `enumeration_radius`).
    """
    divisors = list(divisors)
    roots = np.array([root_of(d, c) for d in divisors], dtype=complex)
    index = _RootIndex(roots)
    inside = [abs(d.location) <= radius for d in divisors]

    successor = [index.find(z + c) for z in roots]
    has_parent = [False] * len(divisors)
    for nxt in successor:
        if nxt is not None:
            has_parent[nxt] = True

    chain_points: set[int] = set()
    chains = []
    for start in range(len(divisors)):
        if has_parent[start]:
            continue
        run = [start]
        while successor[run[-1]] is not None and len(run) <= len(divisors):
            run.append(successor[run[-1]])
        segments = [[run[0]]]
        for idx in run[1:]:
            if divisors[idx].multiplicity >= divisors[segments[-1][-1]].multiplicity:
                segments[-1].append(idx)
            else:
                segments.append([idx])
        for number, segment in enumerate(segments):
            if all(inside[idx] for idx in segment):
                continue
            if number == 0 and not _predecessor_allows(
                divisors, roots, index, segment[0], c
            ):
                continue
            within = [idx for idx in segment if inside[idx]]
            if not within:
                continue
            chain_points.update(within)
            first = within[0]
            chains.append(
                Chain(
                    divisors[first].location,
                    roots[first],
                    tuple(divisors[idx].multiplicity for idx in within),
                )
            )

    residual = tuple(
        divisors[idx].location
        for idx in range(len(divisors))
        if inside[idx] and idx not in chain_points
    )
    msg = f"{len(chains)} chains, {len(residual)} residual points within {radius}"
    log.debug(msg)
    return ChainReport(tuple(chains), residual, a, radius)


def _predecessor_allows(
    divisors: Sequence[Divisor],
    roots: np.ndarray,
    index: _RootIndex,
    idx: int,
    c: complex,
) -> bool:
    z = roots[idx]
    back = canonical_root(canonical_root(z - c / 2, c) - c / 2, c)
    if abs(back - z) <= ROOT_TOLERANCE * max(1.0, abs(z)):
        return True
    previous = index.find(back)
    if previous is None:
        return True
    return divisors[previous].multiplicity > divisors[idx].multiplicity


def chain_report(
    stream: DivisorStream,
    a: complex | None,
    radius: float,
    c: complex = DEFAULT_SHIFT,
) -> ChainReport:
    """`detect_chains` on a stream enumerated beyond the radius."""
    return detect_chains(stream.enumerate(enumeration_radius(radius, c)), a, c, radius)


def ew_set(
    model: MeromorphicModel,
    a: complex | None,
    radius: float,
    c: complex = DEFAULT_SHIFT,
) -> tuple[complex, ...]:
    """E_W(a, f): a-points within radius outside every Wilson a-sequence."""
    return chain_report(a_point_stream(model, a), a, radius, c).residual


@dataclass(frozen=True)
class ExceptionalVerdict:
    """Sizes of E_W at checkpoints over the top half of the radius."""

    candidate: bool
    radii: tuple[float, ...]
    sizes: tuple[int, ...]

    @property
    def label(self) -> str:
        return "exceptional-candidate" if self.candidate else "not-exceptional"


def exceptional_value_verdict(
    model: MeromorphicModel,
    a: complex | None,
    radius: float,
    c: complex = DEFAULT_SHIFT,
    checkpoints: int = 5,
    **_: Any,
) -> ExceptionalVerdict:
    """
    Candidate Wilson exceptional value when |E_W| stays constant on
    checkpoints spread over [radius/2, radius].
    """
    stream = a_point_stream(model, a)
    radii = tuple(float(r) for r in np.linspace(radius / 2, radius, checkpoints))
    sizes = tuple(len(chain_report(stream, a, r, c).residual) for r in radii)
    return ExceptionalVerdict(len(set(sizes)) == 1, radii, sizes)


def _symmetric_difference(
    first: Sequence[complex],
    second: Sequence[complex],
) -> list[complex]:
    def missing(points: Sequence[complex], other: Sequence[complex]) -> list[complex]:
        index = _RootIndex(np.array(other, dtype=complex))
        return [x for x in points if index.find(x) is None]

    return missing(first, second) + missing(second, first)


@dataclass(frozen=True)
class SharingVerdict:
    """Whether two functions share a value IM in the Wilson sense."""

    shared: bool
    radii: tuple[float, ...]
    sizes: tuple[int, ...]
    tilde_differences: tuple[int, ...]
    ambiguous: bool = False


def share_im_wilson(
    f_divisors: DivisorStream,
    g_divisors: DivisorStream,
    a: complex | None,
    radius_grid: Sequence[float],
    c: complex = DEFAULT_SHIFT,
) -> SharingVerdict:
    """
    Shared iff |E_W(a, f) symmetric-difference E_W(a, g)| is constant over
    the top half of the grid.

    The difference of the n~_W counts uses the combinatorial shift orders;
    equal-multiplicity ties are flagged.
    """
    radii = sorted(float(r) for r in radius_grid)
    sizes, differences = [], []
    pairs_f = shift_orders(f_divisors, radii[-1], None, a, c)
    pairs_g = shift_orders(g_divisors, radii[-1], None, a, c)
    ambiguous = any(o.ambiguous for _, o in (*pairs_f, *pairs_g))
    for r in radii:
        e_f = chain_report(f_divisors, a, r, c).residual
        e_g = chain_report(g_divisors, a, r, c).residual
        sizes.append(len(_symmetric_difference(e_f, e_g)))
        differences.append(
            count_row(pairs_f, r).n_W_tilde - count_row(pairs_g, r).n_W_tilde
        )
    top = sizes[len(sizes) // 2 :]
    return SharingVerdict(
        len(set(top)) == 1,
        tuple(radii),
        tuple(sizes),
        tuple(differences),
        ambiguous,
    )


# ---------------------------------------------------------------------------
# defects


@dataclass(frozen=True)
class DefectEstimates:
    """Top-decade estimates of Theta_W, vartheta_W and delta at a."""

    a: complex | None
    theta_W: float
    vartheta_W: float
    delta: float
    grid: tuple[float, ...] = field(default_factory=tuple)


def _check_grid(r_grid: Sequence[float]) -> np.ndarray:
    radii = np.sort(np.asarray(r_grid, dtype=float))
    if radii.size < 2 or radii[-1] / radii[0] < 10**3 * (1 - 1e-9):
        msg = "defect estimation needs a radius grid spanning 3 decades"
        raise DegenerateGridError(msg)
    return radii


def _clamp(value: float, upper: float = 1.0) -> float:
    return min(max(value, 0.0), upper)


def defect_estimates(
    model: MeromorphicModel,
    a: complex | None,
    r_grid: Sequence[float],
    c: complex = DEFAULT_SHIFT,
    tol: float | None = None,
    threads: int = 1,
    quadrature: dict | None = None,
    counting: dict | None = None,
) -> DefectEstimates:
    """
    Theta_W = 1 - max N~_W/T, vartheta_W = min N_W/T and
    delta = min m(r, a)/T over the top decade, clamped.

    Raises
    ------
    DegenerateGridError
        If the grid spans fewer than 3 decades.
    """
    quadrature = quadrature or {}
    top = top_decade(_check_grid(r_grid))
    rows = wilson_count_sweep(model, a, top, c, threads, **(counting or {}))

    def ratios(r: float) -> tuple[float, float]:
        T = characteristic(model, r, tol, None, **quadrature).T
        m_a = proximity(model, r, tol, a, **quadrature).value
        return T, m_a

    values = radius_sweep(ratios, top, threads)
    theta, vartheta, delta = [], [], []
    for row, (T, m_a) in zip(rows, values, strict=True):
        if T <= 0:
            continue
        theta.append(row.N_W_tilde / T)
        vartheta.append(row.N_W / T)
        delta.append(m_a / T)
    if not theta:
        return DefectEstimates(a, 0.0, 0.0, 0.0, tuple(top))
    estimates = DefectEstimates(
        a,
        _clamp(1 - max(theta)),
        _clamp(min(vartheta), math.inf),
        _clamp(min(delta)),
        tuple(top),
    )
    msg = (
        f"{model.label} at a={a}: Theta_W {estimates.theta_W:.3f}, "
        f"vartheta_W {estimates.vartheta_W:.3f}, delta {estimates.delta:.3f}"
    )
    log.info(msg)
    return estimates


@dataclass(frozen=True)
class DefectSumReport:
    """Sum of Wilson defects and the second-main-theorem residual."""

    estimates: tuple[DefectEstimates, ...]
    total: float
    radii: tuple[float, ...]
    nsft_residuals: tuple[float, ...]
    nsft_exponent: float
    bound: float

    @property
    def sum_passed(self) -> bool:
        return self.total <= 2 + 0.1

    @property
    def nsft_passed(self) -> bool:
        return max(self.nsft_residuals) <= 0 or self.nsft_exponent <= self.bound

    @property
    def passed(self) -> bool:
        return self.sum_passed and self.nsft_passed


def nsft_residual(
    model: MeromorphicModel,
    targets: Sequence[complex],
    radii: Sequence[float],
    c: complex = DEFAULT_SHIFT,
    tol: float | None = None,
    quadrature: dict | None = None,
    counting: dict | None = None,
) -> list[float]:
    """
    (q - 1) T(r, f) - N~_W(r, f) - sum of N~_W(r, 1/(f - y)) over the q
    finite targets y.
    """
    quadrature = quadrature or {}
    counting = counting or {}
    q = len(targets)
    poles = wilson_count_sweep(model, None, radii, c, **counting)
    target_rows = [wilson_count_sweep(model, y, radii, c, **counting) for y in targets]
    residuals = []
    for idx, r in enumerate(radii):
        T = characteristic(model, r, tol, None, **quadrature).T
        total = (q - 1) * T - poles[idx].N_W_tilde
        total -= sum(rows[idx].N_W_tilde for rows in target_rows)
        residuals.append(total)
    return residuals


def defect_sum_check(
    model: MeromorphicModel,
    a_list: Sequence[complex | None],
    r_grid: Sequence[float],
    c: complex = DEFAULT_SHIFT,
    tol: float | None = None,
    threads: int = 1,
    quadrature: dict | None = None,
    counting: dict | None = None,
) -> DefectSumReport:
    """
    Sum of Theta_W over the values (at most 2 + 0.1) together with the
    second-main-theorem residual over the finite values, whose growth
    exponent must stay below sigma - 1/2 + 0.15 unless it is never
    positive.
    """
    estimate = partial(
        defect_estimates,
        model,
        r_grid=r_grid,
        c=c,
        tol=tol,
        threads=threads,
        quadrature=quadrature,
        counting=counting,
    )
    estimates = tuple(estimate(a) for a in a_list)
    total = sum(e.theta_W for e in estimates)
    top = top_decade(_check_grid(r_grid))
    targets = [complex(a) for a in a_list if not is_infinite(a)]
    residuals = nsft_residual(model, targets, top, c, tol, quadrature, counting)
    exponent, _ = fit_exponent(top, residuals)
    bound = model.declared_order - 0.5 + 0.15
    msg = f"{model.label}: defect sum {total:.3f}, NSFT exponent {exponent:.3f}"
    log.info(msg)
    return DefectSumReport(
        estimates, total, tuple(top), tuple(residuals), exponent, bound
    )
