import numpy as np
import pytest
from numpy.polynomial import polynomial as npoly
from numpy.testing import assert_allclose

from wilsonnev.errors import (
    NonDifferentiableError,
    ParameterError,
    PoleAtShiftError,
)
from wilsonnev.funcmodel import model_cosh_root, model_product_i
from wilsonnev.wilson_core import (
    LatticeCoord,
    apply_AW,
    apply_DW,
    apply_DW_iter,
    apply_DW_origin,
    cshift_limit_check,
    dw_iter_values,
    evaluate_dw,
    sqrt_with_cut,
)

X_POINTS = [1.3 + 0.4j, -2.0 + 0.5j, 7.5 - 3.0j, -0.3 - 0.1j, 40.0j]


def square(x):
    return x * x


def test_sqrt_with_cut_conventions(rng):
    assert sqrt_with_cut(-1) == 1j
    x = rng.normal(size=50) + 1j * rng.normal(size=50)
    root = sqrt_with_cut(x)
    assert np.all(root.real >= 0)
    assert_allclose(root**2, x, rtol=1e-14)

    real_shift = sqrt_with_cut(x, 1.0)
    assert np.all(real_shift.imag <= 0)
    assert_allclose(real_shift**2, x, rtol=1e-14)

    with pytest.raises(ParameterError):
        sqrt_with_cut(1.0, 0)


def test_lattice_steps():
    p = LatticeCoord.from_x(2.0 + 1.0j)
    assert p.plus().minus() == p
    assert p.plus(2).z == pytest.approx(p.z + 1j)
    assert p.x == pytest.approx(2.0 + 1.0j)
    with pytest.raises(ParameterError):
        LatticeCoord(1.0, 0)


@pytest.mark.parametrize("x", X_POINTS)
def test_dw_of_square(x):
    # D_W x^2 = 2x - 1/2 for c = i
    assert_allclose(apply_DW(square, LatticeCoord.from_x(x)), 2 * x - 0.5, atol=1e-12)


@pytest.mark.parametrize("c", [1j, 1.0, 0.3 + 0.7j, 2j])
def test_dw_of_square_any_shift(c):
    x = 1.3 + 0.4j
    value = apply_DW(square, LatticeCoord.from_x(x, c))
    assert_allclose(value, 2 * x + c * c / 2, atol=1e-12)


def test_dw_independent_of_root():
    x = -2.0 + 0.5j
    z = sqrt_with_cut(x)
    forward = apply_DW(np.exp, LatticeCoord.from_z(z))
    backward = apply_DW(np.exp, LatticeCoord.from_z(-z))
    assert_allclose(forward, backward, rtol=1e-13)


def test_dw_of_constant_vanishes():
    p = LatticeCoord.from_x(3.0 - 2.0j)
    assert apply_DW(lambda x: 5.0 + 0 * x, p) == 0


@pytest.mark.parametrize("x", X_POINTS)
def test_kernel_element(x):
    kernel = model_cosh_root(2 * np.pi)
    p = LatticeCoord.from_x(x)
    scale = max(1.0, abs(kernel.value(p.plus().x)))
    assert abs(apply_DW(kernel.value, p)) / scale < 1e-9


def test_origin():
    with pytest.raises(ParameterError):
        apply_DW(square, LatticeCoord.from_x(0))
    assert_allclose(apply_DW_origin(square), -0.5, atol=1e-9)
    assert_allclose(apply_DW_origin(square, lambda x: 2 * x), -0.5)
    near = apply_DW(square, LatticeCoord.from_x(1e-8))
    assert_allclose(near, -0.5, atol=1e-7)


def test_origin_non_differentiable():
    def kink(x):
        return np.where(np.real(x) > -0.25, x, 0.0)

    with pytest.raises(NonDifferentiableError):
        apply_DW_origin(kink)


def test_pole_at_shift():
    p = LatticeCoord.from_x(2.0)
    pole = p.plus().x

    def f(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return 1 / (np.asarray(x, dtype=complex) - pole)

    with pytest.raises(PoleAtShiftError):
        apply_DW(f, p)


def test_average_and_evaluation_record():
    p = LatticeCoord.from_x(1.5 - 0.5j)
    expected = (p.plus().x ** 2 + p.minus().x ** 2) / 2
    assert_allclose(apply_AW(square, p), expected, rtol=1e-14)
    record = evaluate_dw(square, p)
    assert record.used_points == (p.plus(), p.minus())
    assert record.at == p


def test_iterated_difference():
    p = LatticeCoord.from_x(2.0 + 1.0j)
    # D_W x^2 = 2x - 1/2, D_W^2 x^2 = 2, D_W^3 x^3 = 6
    assert_allclose(apply_DW_iter(square, p, 2), 2.0, atol=1e-11)
    assert_allclose(apply_DW_iter(lambda x: x**3, p, 3), 6.0, atol=1e-10)
    once = dw_iter_values(square, np.array([p.z]), 1)
    assert_allclose(once, [2 * p.x - 0.5], atol=1e-12)
    with pytest.raises(ParameterError):
        apply_DW_iter(square, p, 0)


def test_iterated_difference_pole_names_stencil():
    p = LatticeCoord.from_x(2.0 + 1.0j)
    pole = p.plus(2).x

    def f(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return 1 / (np.asarray(x, dtype=complex) - pole)

    with pytest.raises(PoleAtShiftError, match="j=2"):
        apply_DW_iter(f, p, 2)


@pytest.mark.parametrize(
    ("f", "derivative"),
    [
        (np.exp, np.exp),
        (lambda x: x**3, lambda x: 3 * x**2),
        (lambda x: np.cosh(np.sqrt(x)), None),
    ],
)
def test_cshift_converges_quadratically(f, derivative):
    report = cshift_limit_check(
        f, 1.3 + 0.4j, [0.1, 0.05, 0.025, 0.0125], derivative
    )
    assert report.order >= 1.9
    assert report.errors[-1] < report.errors[0]


def cubic(x):
    return x**3 - 2 * x + 1


PRODUCT_FACTORS = [
    (cubic, np.exp),
    (np.exp, lambda x: np.cosh(np.sqrt(x))),
    (square, model_product_i(1.0).value),
    (model_product_i(1.0).value, model_product_i(0.5).value),
]


@pytest.mark.parametrize(("f", "g"), PRODUCT_FACTORS)
@pytest.mark.parametrize("x", X_POINTS)
def test_product_rule(f, g, x):
    p = LatticeCoord.from_x(x)
    left = apply_DW(lambda t: f(t) * g(t), p)
    right = apply_AW(f, p) * apply_DW(g, p) + apply_AW(g, p) * apply_DW(f, p)
    scale = max(1.0, abs(apply_AW(f, p) * apply_AW(g, p)))
    assert abs(left - right) / scale < 1e-10


@pytest.mark.parametrize(("f", "g"), [(cubic, np.exp), (np.exp, lambda x: x + 7.0)])
@pytest.mark.parametrize("x", X_POINTS)
def test_quotient_rule(f, g, x):
    p = LatticeCoord.from_x(x)
    left = apply_DW(lambda t: f(t) / g(t), p)
    denominator = g(p.plus().x) * g(p.minus().x)
    right = (apply_AW(g, p) * apply_DW(f, p) - apply_AW(f, p) * apply_DW(g, p)) / (
        denominator
    )
    scale = max(1.0, abs(apply_AW(f, p) / apply_AW(g, p)))
    assert abs(left - right) / scale < 1e-10


def test_linearity(rng):
    alpha, beta = rng.normal(size=2) + 1j * rng.normal(size=2)
    for x in X_POINTS:
        p = LatticeCoord.from_x(x)
        combined = apply_DW(lambda t: alpha * cubic(t) + beta * np.exp(t), p)
        separate = alpha * apply_DW(cubic, p) + beta * apply_DW(np.exp, p)
        assert_allclose(combined, separate, rtol=1e-12)


@pytest.mark.parametrize("degree", range(1, 7))
def test_difference_lowers_the_degree(degree, rng):
    coefficients = rng.uniform(-1, 1, degree + 1)
    coefficients[-1] = 1.0
    x = np.arange(degree + 1) + 0.5
    values = np.array(
        [
            apply_DW(lambda t: npoly.polyval(t, coefficients), LatticeCoord.from_x(s))
            for s in x
        ]
    )
    assert np.max(np.abs(values.imag)) < 1e-9 * np.max(np.abs(values))
    fitted = npoly.polyfit(x, values.real, degree)
    # D_W x^k has leading term k x^(k-1)
    assert abs(fitted[-1]) < 1e-7
    assert fitted[-2] == pytest.approx(degree, rel=1e-7)


@pytest.mark.parametrize("c", [1j, 1.0, 0.3 + 0.7j])
def test_average_of_linear_and_exponential(c):
    for x in X_POINTS:
        p = LatticeCoord.from_x(x, c)
        # A_W x = x + c^2/4
        assert_allclose(apply_AW(lambda t: t, p), x + c * c / 4, atol=1e-12)
        expected = (np.exp(p.plus().x) + np.exp(p.minus().x)) / 2
        assert_allclose(apply_AW(np.exp, p), expected, rtol=1e-14)
        flipped = LatticeCoord.from_z(-p.z, c)
        assert_allclose(apply_AW(np.exp, flipped), apply_AW(np.exp, p), rtol=1e-13)
    assert apply_AW(lambda t: 4.0 + 0 * t, LatticeCoord.from_x(2.0)) == 4.0
