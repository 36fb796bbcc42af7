import numpy as np
import pytest
from numpy.testing import assert_allclose

from wilsonnev.errors import (
    IdentityViolationError,
    NotASolutionError,
    ParameterError,
)
from wilsonnev.equations import (
    EquationTerm,
    InterpolationEquation,
    WDPTerm,
    WilsonDifferencePolynomial,
    check_identity,
    check_solution,
    clunie_fixture,
    clunie_growth_check,
    equation_from_json,
    ghyp_equation,
    interp_residual,
    kernel_equation,
    order_bound_report,
    wdp_evaluate,
)
from wilsonnev.funcmodel import model_cosh_root, model_exp, model_ghyp_solution


def square(x):
    return x * x


def test_wdp_terms():
    with pytest.raises(ParameterError):
        WDPTerm([1.0], (1, -1))
    P = WilsonDifferencePolynomial.of(
        WDPTerm([0.0, 1.0], (0, 1)), WDPTerm([1.0], (2, 0, 1))
    )
    assert P.degree_over_f == 3
    assert P.max_order == 2


def test_wdp_evaluate():
    # x D_W f + D_W^2 f at f = x^2
    P = WilsonDifferencePolynomial.of(
        WDPTerm([0.0, 1.0], (0, 1)), WDPTerm([1.0], (0, 0, 1))
    )
    x = 2.0 + 1.0j
    assert_allclose(wdp_evaluate(P, square, x), x * (2 * x - 0.5) + 2, atol=1e-10)


def test_clunie_identity():
    P, Q, n = clunie_fixture()
    assert check_identity(model_exp(), P, Q, n) < 1e-6
    doubled = WilsonDifferencePolynomial.of(WDPTerm([2.0], (0, 1)))
    with pytest.raises(IdentityViolationError):
        check_identity(model_exp(), P, doubled, n)


def test_clunie_rejects_high_degree_right_side(quadrature):
    P, _, n = clunie_fixture()
    Q = WilsonDifferencePolynomial.of(WDPTerm([1.0], (2,)))
    with pytest.raises(ParameterError):
        clunie_growth_check(model_exp(), P, Q, n, [10.0, 100.0], **quadrature)


def test_clunie_growth(quadrature):
    P, Q, n = clunie_fixture()
    report = clunie_growth_check(
        model_exp(), P, Q, n, list(np.logspace(1, 4, 16)), **quadrature
    )
    assert report.bound == pytest.approx(0.65)
    assert report.passed
    assert 0.4 < report.exponent < 0.65
    assert not report.bounded


def test_clunie_growth_of_a_trivial_polynomial(quadrature):
    P = WilsonDifferencePolynomial.of(WDPTerm([1.0]))
    Q = WilsonDifferencePolynomial.of(WDPTerm([1.0], (1,)))
    report = clunie_growth_check(
        model_exp(), P, Q, 1, list(np.logspace(1, 3, 11)), **quadrature
    )
    assert report.bounded
    assert report.exponent == 0.0
    assert report.passed


def test_equation_needs_two_terms():
    with pytest.raises(ParameterError):
        InterpolationEquation((EquationTerm.from_polynomial(1, [1.0]),))


def test_hyperbolic_gamma_solves_its_equation():
    assert check_solution(ghyp_equation(), model_ghyp_solution()) < 1e-6


def test_kernel_equation():
    kernel = model_cosh_root(2 * np.pi)
    assert check_solution(kernel_equation(), kernel) < 1e-6
    with pytest.raises(NotASolutionError):
        check_solution(kernel_equation(), model_exp())


def test_residual_record():
    kernel = model_cosh_root(2 * np.pi)
    residual = interp_residual(kernel_equation(), kernel, 2.0 + 1.0j)
    assert residual.scale > 1.0
    assert residual.relative < 1e-9


def test_equation_from_json():
    forward = equation_from_json({"coeffs": [[1.0], [0.0, -1.0]]})
    assert [term.offset for term in forward.terms] == [0, 1]
    assert forward.c == 1j
    assert forward.polynomial_coefficients

    central = equation_from_json(
        {
            "coeffs": [[1.0], [{"re": -1.0, "im": 0.0}]],
            "shift": "central",
            "c": {"re": 0.0, "im": 1.0},
            "label": "kernel",
        }
    )
    assert [term.offset for term in central.terms] == [-1, 1]
    assert central.label == "kernel"
    kernel = model_cosh_root(2 * np.pi)
    assert check_solution(central, kernel) < 1e-6

    with pytest.raises(ParameterError):
        equation_from_json({"coeffs": [[1.0], [1.0]], "shift": "sideways"})
    with pytest.raises(ParameterError):
        equation_from_json({"coeffs": [[1.0]]})
    with pytest.raises(ParameterError):
        equation_from_json({"coeffs": [[1.0], [{"re": 1.0}]]})


def test_kernel_order_bound(three_decades, quadrature):
    report = order_bound_report(
        kernel_equation(), model_cosh_root(2 * np.pi), three_decades, **quadrature
    )
    assert report.sigma_l == 0.0
    assert report.sigma_y == pytest.approx(0.5, abs=0.05)
    assert report.passed
    assert report.details["coefficient_orders"] == [0.0, 0.0]
