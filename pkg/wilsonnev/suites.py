"""
Verification suites behind ``wnev verify``.

Every suite returns a list of `Criterion` rows with the measured value,
the acceptance threshold and the verdict; `criteria_table` renders them
with rich.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from rich.table import Table

from wilsonnev.config import Configuration, log_grid
from wilsonnev.equations import (
    check_solution,
    clunie_fixture,
    clunie_growth_check,
    ghyp_equation,
    kernel_equation,
    order_bound_report,
)
from wilsonnev.errors import ConfigError
from wilsonnev.funcmodel import (
    INFINITY,
    figure_dataset,
    model_cosh_root,
    model_exp,
    model_from_synthetic,
    model_g_iii,
    model_ghyp_solution,
    model_h_iv,
    model_phi_ii,
    model_product_i,
    model_rational,
    order_estimate,
    top_decade,
)
from wilsonnev.logger import get_logger
from wilsonnev.nevanlinna import (
    characteristic_sweep,
    fft_residual,
    growth_exponent,
    log_wilson_proximity,
)
from wilsonnev.specfun import hyperbolic_gamma
from wilsonnev.wilson_core import (
    LatticeCoord,
    apply_DW,
    cshift_limit_check,
)
from wilsonnev.wilson_counting import (
    chain_report,
    counting_gap,
    defect_estimates,
    defect_sum_check,
    exceptional_value_verdict,
    wilson_count_sweep,
)
from wilsonnev.wilson_polynomials import (
    eigenvalue,
    lowering_residual,
    lw_apply,
    physics_eigen_check,
    sturm_liouville_residual,
    wilson_poly,
)
from wilsonnev.wilson_series import (
    expand,
    growth_gate,
    reconstruction_error,
    tau,
)

log = get_logger(__name__)


@dataclass(frozen=True)
class Criterion:
    """One acceptance check with its measured value."""

    name: str
    measured: float
    threshold: str
    passed: bool


def at_most(name: str, measured: float, bound: float) -> Criterion:
    return Criterion(name, float(measured), f"<= {bound:g}", bool(measured <= bound))


def at_least(name: str, measured: float, bound: float) -> Criterion:
    return Criterion(name, float(measured), f">= {bound:g}", bool(measured >= bound))


def within(name: str, measured: float, low: float, high: float) -> Criterion:
    return Criterion(
        name, float(measured), f"[{low:g}, {high:g}]", bool(low <= measured <= high)
    )


def _off_cut_points(rng: np.random.Generator, count: int, radius: float) -> np.ndarray:
    modulus = radius * np.sqrt(rng.uniform(0.01, 1, count))
    return modulus * np.exp(1j * np.pi * rng.uniform(-0.95, 0.95, count))


# ---------------------------------------------------------------------------
# suites


def kernel_suite(cfg: Configuration, threads: int = 1) -> list[Criterion]:
    """Kernel element cosh(2 pi sqrt x), the c -> 0 limit and x^2."""
    rng = np.random.default_rng(0)
    kernel = model_cosh_root(2 * np.pi)
    worst = 0.0
    for x in _off_cut_points(rng, 200, 100.0):
        p = LatticeCoord.from_x(x)
        scale = max(
            1.0, abs(kernel.value(p.plus().x)), abs(kernel.value(p.minus().x))
        )
        worst = max(worst, abs(apply_DW(kernel.value, p)) / scale)
    criteria = [at_most("max |D_W cosh(2 pi sqrt x)| (scaled)", worst, 1e-9)]

    x0 = 1.3 + 0.4j
    shifts = [0.1, 0.05, 0.025, 0.0125]

    def cosh_root(x: complex) -> complex:
        return np.cosh(np.sqrt(x))

    def cosh_root_derivative(x: complex) -> complex:
        return np.sinh(np.sqrt(x)) / (2 * np.sqrt(x))

    limits = {
        "x^3": (lambda x: x**3, lambda x: 3 * x**2),
        "e^x": (np.exp, np.exp),
        "cosh sqrt x": (cosh_root, cosh_root_derivative),
    }
    for label, (f, derivative) in limits.items():
        report = cshift_limit_check(f, x0, shifts, derivative)
        criteria.append(at_least(f"c -> 0 order, {label}", report.order, 1.9))

    exact = 0.0
    for c in (0.1, 0.5, 1j, 0.3 + 0.2j):
        p = LatticeCoord.from_x(x0, c)
        value = apply_DW(lambda x: x * x, p)
        exact = max(exact, abs(value - 2 * x0 - c * c / 2))
    criteria.append(at_most("|D_{W,c} x^2 - 2x - c^2/2|", exact, 1e-12))
    return criteria


def polynomials_suite(cfg: Configuration, threads: int = 1) -> list[Criterion]:
    """Lowering relation D_W W_n = C_n W_{n-1}(shifted) for n <= 8."""
    rng = np.random.default_rng(1)
    criteria = []
    for n in range(1, 9):
        worst = 0.0
        for _ in range(20):
            params = rng.uniform(0.1, 1.0, 4)
            x = complex(*rng.uniform(-5, 5, 2))
            shifted = [p + 0.5 for p in params]
            scale = max(
                1.0, abs(eigenvalue(n, params) * wilson_poly(n - 1, shifted, x))
            )
            worst = max(worst, abs(lowering_residual(n, params, x)) / scale)
        criteria.append(at_most(f"lowering residual n={n}", worst, 1e-8))
    return criteria


STURM_POINTS = (0.7 + 0.3j, 2.1 - 1.4j, 5.3 + 2.2j, -3.1 + 0.8j)
STURM_PARAMS = (0.3, 0.45, 0.6, 0.8)


def sturm_suite(cfg: Configuration, threads: int = 1) -> list[Criterion]:
    """Sturm-Liouville form, L_W eigen relation and the physics check."""
    criteria = []
    for n in range(6):
        sl = max(
            sturm_liouville_residual(n, STURM_PARAMS, x).relative
            for x in STURM_POINTS
        )
        criteria.append(at_most(f"Sturm-Liouville n={n}", sl, 1e-6))

        def poly(x: complex, n: int = n) -> complex:
            return wilson_poly(n, STURM_PARAMS, x)

        worst = 0.0
        for x in STURM_POINTS:
            applied = lw_apply(poly, STURM_PARAMS, x)
            expected = eigenvalue(n, STURM_PARAMS) * poly(x)
            scale = max(abs(applied), abs(expected), 1e-300)
            worst = max(worst, abs(applied - expected) / scale if n else abs(applied))
        criteria.append(at_most(f"L_W eigen relation n={n}", worst, 1e-6))
    for n in range(5):
        physics = max(physics_eigen_check(n, x).relative for x in STURM_POINTS)
        criteria.append(at_most(f"physics eigen relation n={n}", physics, 1e-6))
    return criteria


def asymptotics_suite(cfg: Configuration, threads: int = 1) -> list[Criterion]:
    """Best-possible constant, log-difference growth, the g_iii example and FFT."""
    quadrature = cfg.quadrature
    criteria = []

    exp = model_exp()
    for r in (1e5, 1e6):
        m = log_wilson_proximity(exp, r, **quadrature).value
        criteria.append(
            within(f"m(r, D_W e^x/e^x) pi/(2 sqrt r), r={r:g}",
                   m * np.pi / (2 * math.sqrt(r)), 0.95, 1.05)
        )

    grid = log_grid(1e2, 1e5, 10)
    top = list(top_decade(grid))
    for model in (exp, model_cosh_root(), model_product_i(), model_g_iii()):
        values = [
            log_wilson_proximity(model, r, model.shift, **quadrature).value
            for r in top
        ]
        report = growth_exponent(top, values)
        criteria.append(
            at_most(f"log-difference exponent, {model.label}",
                    report.exponent, model.declared_order - 0.5 + 0.1)
        )

    g = model_g_iii(2, 1)
    full = log_grid(1e2, 1e6, 5)
    decade = list(top_decade(full))
    rows = characteristic_sweep(g, decade, threads=threads, **quadrature)
    ratios = [row.T / math.sqrt(row.r) for row in rows]
    criteria.append(within("g_iii min T/sqrt r", min(ratios), 2.85, 3.15))
    criteria.append(within("g_iii max T/sqrt r", max(ratios), 2.85, 3.15))
    counts = wilson_count_sweep(g, 0, decade, g.shift, threads, **cfg.counting)
    tilde = [row.n_W_tilde / math.sqrt(row.r) for row in counts]
    criteria.append(within("g_iii min n~_W/sqrt r", min(tilde), 0.45, 0.55))
    criteria.append(within("g_iii max n~_W/sqrt r", max(tilde), 0.45, 0.55))
    theta = defect_estimates(
        g, 0, full, g.shift, threads=threads,
        quadrature=quadrature, counting=cfg.counting,
    ).theta_W
    criteria.append(within("Theta_W(0, g_iii)", theta, 0.61, 0.72))

    for model in (model_product_i(1.0), g):
        report = fft_residual(model, 0, full, threads=threads, **quadrature)
        criteria.append(
            within(f"FFT slope, {model.label}", report.slope, -0.05, 0.05)
        )
    return criteria


def defects_suite(cfg: Configuration, threads: int = 1) -> list[Criterion]:
    """Wilson defects of the catalog examples and the figure chains."""
    quadrature, counting = cfg.quadrature, cfg.counting
    grid = log_grid(1e2, 1e5, 5)
    criteria = []

    f = model_product_i(1.0)
    report = defect_sum_check(
        f, [0, INFINITY], grid, f.shift, threads=threads,
        quadrature=quadrature, counting=counting,
    )
    criteria.append(at_least("Theta_W(0, product_i)", report.estimates[0].theta_W, 0.95))
    criteria.append(within("sum Theta_W over {0, inf}, product_i", report.total, 1.9, 2.0))
    verdict = exceptional_value_verdict(f, 0, 1e4, f.shift, **counting)
    criteria.append(
        Criterion("exceptional verdict, product_i", float(verdict.sizes[-1]),
                  "candidate", verdict.candidate)
    )

    half = model_product_i(1.0, 2.0)
    for a, name in ((0, "0"), (INFINITY, "inf")):
        theta = defect_estimates(
            half, a, grid, half.shift, threads=threads,
            quadrature=quadrature, counting=counting,
        ).theta_W
        criteria.append(at_least(f"Theta_W,2({name}, cos_half)", theta, 0.95))

    for s in (0.0, 0.25, 0.5, 1.0):
        h = model_h_iv(s)
        theta = defect_estimates(
            h, 0, grid, h.shift, threads=threads,
            quadrature=quadrature, counting=counting,
        ).theta_W
        criteria.append(within(f"Theta_W(0, h_iv s={s:g})", theta, s - 0.07, s + 0.07))

    g = model_g_iii(2, 1)
    nsft = defect_sum_check(
        g, [0, INFINITY], grid, g.shift, threads=threads,
        quadrature=quadrature, counting=counting,
    )
    criteria.append(
        Criterion("NSFT residual, g_iii", max(nsft.nsft_residuals),
                  f"<= 0 or exponent <= {nsft.bound:g}", nsft.nsft_passed)
    )

    figure = model_from_synthetic(figure_dataset(400.0), "figure")
    chains = chain_report(figure.poles, None, 100.0)
    criteria.append(within("figure chains", len(chains.chains), 3, 3))
    criteria.append(within("figure |E_W|", len(chains.residual), 5, 5))

    radii = np.logspace(1, 4, 25)
    for model in (f, g, model_h_iv(0.5), model_phi_ii(), model_rational([2.0, -3.0 + 1j])):
        gap = max(counting_gap(model, 0, r, model.shift, **counting) for r in radii)
        criteria.append(at_most(f"N - N_W - N~_W at 0, {model.label}", gap, 1e-9))
    return criteria


def equations_suite(cfg: Configuration, threads: int = 1) -> list[Criterion]:
    """Hyperbolic gamma equation, order bounds and the Clunie fixture."""
    quadrature = cfg.quadrature
    criteria = []

    re, im = np.meshgrid(np.linspace(-3, 3, 13), np.linspace(-0.3, 0.3, 5))
    z = (re + 1j * im).ravel()
    tol = cfg.hyperbolic.get("tol", 1e-10)
    upper = hyperbolic_gamma(1.0, 1.0, z + 0.5j, tol)
    lower = hyperbolic_gamma(1.0, 1.0, z - 0.5j, tol)
    residual = np.abs(upper - 2 * np.cosh(np.pi * z) * lower) / np.maximum(
        1.0, np.abs(upper)
    )
    criteria.append(at_most("hyperbolic gamma functional equation", float(np.max(residual)), 1e-6))

    ghyp = model_ghyp_solution(**cfg.hyperbolic)
    equation = ghyp_equation()
    criteria.append(at_most("ghyp solves y(x+) = 2cosh(pi sqrt x) y(x-)",
                            check_solution(equation, ghyp), 1e-6))
    grid = log_grid(1.0, 1e3, 10)
    sigma = order_estimate(ghyp, grid, **quadrature).sigma
    criteria.append(within("order of ghyp", sigma, 0.9, 1.1))
    coefficient = order_estimate(equation.terms[1].model, grid, **quadrature).sigma
    criteria.append(within("order of 2cosh(pi sqrt x)", coefficient, 0.45, 0.55))
    bound = order_bound_report(
        equation, ghyp, grid,
        coefficient_order=lambda term: coefficient if term.model.constant is None else 0.0,
        **quadrature,
    )
    criteria.append(at_least("order margin, ghyp", bound.margin, -0.1))

    kernel = order_bound_report(kernel_equation(), model_cosh_root(2 * np.pi), grid, **quadrature)
    criteria.append(at_least("order margin, kernel equation", kernel.margin, -0.1))

    P, Q, n = clunie_fixture()
    exp = model_exp()
    clunie = clunie_growth_check(exp, P, Q, n, log_grid(1e2, 1e5, 10), exp.shift, **quadrature)
    criteria.append(at_most("Clunie growth exponent, e^x", clunie.exponent, clunie.bound))
    return criteria


def series_suite(cfg: Configuration, threads: int = 1) -> list[Criterion]:
    """Wilson series round trips and the 2 ln 2 growth gate."""
    criteria = []
    cubic = model_rational([1.0, -2.0 + 0.5j, 3.5], scale=0.7)
    series = expand(cubic.value, 0.0, 5)
    criteria.append(at_most("polynomial round trip", reconstruction_error(series, cubic.value), 1e-10))

    unit = expand(lambda x: tau(2, 0.0, x), 0.0, 6)
    target = np.zeros(7)
    target[2] = 1.0
    criteria.append(at_most("tau_2 coefficients", float(np.max(np.abs(np.array(unit.coefficients) - target))), 1e-10))

    gate_grid = log_grid(1e2, 1e4, 5)
    slow, fast = model_cosh_root(1.0), model_cosh_root(np.pi)
    criteria.append(at_least("gate margin, cosh(sqrt x)",
                             growth_gate(slow.value, gate_grid, log_f=slow.log_value, threads=threads, **cfg.series), 1e-6))
    criteria.append(at_most("gate margin, cosh(pi sqrt x)",
                            growth_gate(fast.value, gate_grid, log_f=fast.log_value, threads=threads, **cfg.series), -1e-6))
    expansion = expand(slow.value, 0.0, 40)
    criteria.append(at_most("cosh(sqrt x) K=40 reconstruction", reconstruction_error(expansion, slow.value), 1e-8))
    return criteria


SUITES: dict[str, Callable[[Configuration, int], list[Criterion]]] = {
    "kernel": kernel_suite,
    "polynomials": polynomials_suite,
    "sturm": sturm_suite,
    "asymptotics": asymptotics_suite,
    "defects": defects_suite,
    "equations": equations_suite,
    "series": series_suite,
}


def run_suite(name: str, cfg: Configuration, threads: int = 1) -> list[Criterion]:
    """
    Run a suite by name.

    Raises
    ------
    ConfigError
        On an unknown suite name.
    """
    if name not in SUITES:
        msg = f"unknown suite {name!r}; known: {sorted(SUITES)}"
        raise ConfigError(msg)
    msg = f"Running suite {name}."
    log.info(msg)
    criteria = SUITES[name](cfg, threads)
    failed = sum(not c.passed for c in criteria)
    msg = f"Suite {name}: {len(criteria) - failed} passed, {failed} failed."
    log.info(msg)
    return criteria


def criteria_table(name: str, criteria: list[Criterion]) -> Table:
    table = Table(title=f"wnev verify {name}")
    table.add_column("criterion")
    table.add_column("measured", justify="right")
    table.add_column("threshold")
    table.add_column("result")
    for c in criteria:
        table.add_row(
            c.name,
            f"{c.measured:.6g}",
            c.threshold,
            "[green]pass[/green]" if c.passed else "[red]FAIL[/red]",
        )
    return table
