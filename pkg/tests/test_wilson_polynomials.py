import mpmath
import numpy as np
import pytest
from numpy.testing import assert_allclose

from wilsonnev.errors import ParameterError
from wilsonnev.wilson_polynomials import (
    PHYSICS_PARAMS,
    WilsonParams,
    eigenvalue,
    lowering_residual,
    lw_apply,
    physics_eigen_check,
    physics_solution,
    sturm_liouville_residual,
    weight_mu,
    weight_mu_z,
    weight_omega,
    wilson_poly,
)

PARAMS = (0.3, 0.45, 0.6, 0.8)
POINTS = [0.7 + 0.3j, 2.1 - 1.4j, 5.3 + 2.2j, -3.1 + 0.8j]


def test_params():
    p = WilsonParams.of(PARAMS)
    assert p.total == pytest.approx(2.15)
    assert p.shifted().a == pytest.approx(0.8)
    assert WilsonParams.of(p) is p
    with pytest.raises(ParameterError):
        WilsonParams.of((1.0, 2.0, 3.0))
    p.check_weight()
    with pytest.raises(ParameterError):
        WilsonParams.of((0.5, -0.5, 1.0, 1.0)).check_weight()


def test_eigenvalue():
    assert eigenvalue(0, PARAMS) == 0
    assert eigenvalue(2, PARAMS) == pytest.approx(-2 * (2 + 2.15 - 1))


def test_first_polynomial_closed_form():
    a, b, c, d = PARAMS
    x = 1.7 - 0.4j
    expected = (a + b) * (a + c) * (a + d) - (a + b + c + d) * (a * a + x)
    assert_allclose(wilson_poly(1, PARAMS, x), expected, rtol=1e-13)
    assert wilson_poly(0, PARAMS, x) == 1


def test_polynomial_against_mpmath():
    a, b, c, d = PARAMS
    n, x = 3, 2.5 + 1.0j
    z = complex(mpmath.sqrt(x))
    expected = (
        mpmath.rf(a + b, n)
        * mpmath.rf(a + c, n)
        * mpmath.rf(a + d, n)
        * mpmath.hyper(
            [-n, n + a + b + c + d - 1, a - 1j * z, a + 1j * z],
            [a + b, a + c, a + d],
            1,
        )
    )
    assert_allclose(wilson_poly(n, PARAMS, x), complex(expected), rtol=1e-11)


def test_polynomial_has_real_coefficients():
    x = np.array([1.0 + 2.0j, -4.0 + 0.5j])
    assert_allclose(
        wilson_poly(4, PARAMS, np.conj(x)),
        np.conj(wilson_poly(4, PARAMS, x)),
        rtol=1e-12,
    )
    with pytest.raises(ParameterError):
        wilson_poly(-1, PARAMS, 1.0)


@pytest.mark.parametrize("n", range(1, 9))
def test_lowering_identity(n, rng):
    for _ in range(5):
        params = rng.uniform(0.1, 1.5, 4)
        x = complex(rng.normal(0, 3), rng.normal(0, 3))
        residual = lowering_residual(n, params, x)
        p = WilsonParams.of(params)
        scale = max(
            1.0,
            abs(wilson_poly(n, p, x)),
            abs(eigenvalue(n, p) * wilson_poly(n - 1, p.shifted(), x)),
        )
        assert abs(residual) / scale < 1e-8


def test_lowering_identity_at_origin():
    assert abs(lowering_residual(2, PARAMS, 0)) < 1e-6


def test_weight_is_even():
    z = 0.7 + 0.4j
    assert_allclose(weight_mu_z(z, PARAMS), weight_mu_z(-z, PARAMS), rtol=1e-12)


def test_weight_rejects_degenerate_parameters():
    degenerate = (0.5, -0.5, 1.0, 1.0)
    with pytest.raises(ParameterError, match="nonpositive integer"):
        weight_mu(2.0 + 1.0j, degenerate)
    with pytest.raises(ParameterError):
        weight_omega(0.7 + 0.4j, (0.3, 0.45, -1.3, 0.8))
    with pytest.raises(ParameterError):
        sturm_liouville_residual(2, degenerate, POINTS[0])
    with pytest.raises(ParameterError):
        lw_apply(lambda t: t, degenerate, POINTS[0])


def test_physics_weights_are_exempt():
    physics = WilsonParams.of(PHYSICS_PARAMS)
    assert physics.is_physics_weight
    assert physics.shifted().is_physics_weight
    assert not WilsonParams.of(PARAMS).is_physics_weight
    physics.check_weight()
    assert np.isfinite(weight_mu_z(0.7 + 0.4j, PHYSICS_PARAMS, 1.0))


@pytest.mark.parametrize("n", range(6))
@pytest.mark.parametrize("x", POINTS)
def test_sturm_liouville(n, x):
    assert sturm_liouville_residual(n, PARAMS, x).relative < 1e-6


@pytest.mark.parametrize("n", range(1, 6))
def test_operator_eigenvalue(n):
    x = POINTS[1]
    value = lw_apply(lambda t: wilson_poly(n, PARAMS, t), PARAMS, x)
    expected = eigenvalue(n, PARAMS) * wilson_poly(n, PARAMS, x)
    assert_allclose(value, expected, rtol=1e-6)


@pytest.mark.parametrize("n", range(5))
def test_physics_eigenfunctions(n):
    for x in POINTS:
        assert physics_eigen_check(n, x).relative < 1e-6


def test_physics_solution():
    assert physics_solution(0)(3.0) == 1
    # g_1 = (x - 1/4) (2!/2!) W_0 = x - 1/4
    assert_allclose(physics_solution(1)(2.0 + 1.0j), 1.75 + 1.0j)
    with pytest.raises(ParameterError):
        physics_solution(-1)
