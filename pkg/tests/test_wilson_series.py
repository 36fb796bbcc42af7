import numpy as np
import pytest
from numpy.testing import assert_allclose

from wilsonnev.errors import ParameterError
from wilsonnev.funcmodel import model_cosh_root
from wilsonnev.wilson_series import (
    expand,
    growth_gate,
    nodes,
    reconstruct,
    reconstruction_error,
    tau,
)


def cubic(x):
    return x**3 - 2 * x + 1


def test_nodes_and_tau():
    assert_allclose(nodes(0, 3), [0, -1, -4])
    x = np.array([0.5 + 1j, -3.0])
    assert_allclose(tau(2, 0, x), x * (x + 1))
    assert tau(0, 0.3, 2.0) == 1
    with pytest.raises(ParameterError):
        tau(-1, 0, 1.0)


def test_expansion_of_a_basis_element():
    series = expand(lambda x: tau(2, 0, x), 0, K=5)
    expected = [0, 0, 1, 0, 0, 0]
    assert_allclose(series.coefficients, expected, atol=1e-10)
    assert series.truncation == 5
    assert series.gate_margin is None
    assert series.flags == ()


def test_polynomial_reconstructs_exactly():
    series = expand(cubic, 0.3, K=6)
    assert_allclose(series.coefficients[4:], 0, atol=1e-9)
    x = np.array([2.0 + 1.0j, -5.0, 7.5j])
    assert_allclose(reconstruct(series, x), cubic(x), rtol=1e-9)
    assert reconstruction_error(series, cubic) < 1e-8


def test_leading_coefficients_ignore_later_nodes():
    f = model_cosh_root(1.0).value
    short = expand(f, 0.2, K=5)
    long = expand(f, 0.2, K=10)
    assert_allclose(short.coefficients, long.coefficients[:6], rtol=1e-10)


def test_invalid_expansions():
    with pytest.raises(ParameterError):
        expand(cubic, 0, K=-1)
    # (a + j i)^2 repeats for a = -i/2
    with pytest.raises(ParameterError):
        expand(cubic, -0.5j, K=3)


def test_growth_gate_signs():
    grid = list(np.logspace(2, 4, 11))
    slow = model_cosh_root(1.0)
    fast = model_cosh_root(np.pi)
    assert growth_gate(slow.value, grid, log_f=slow.log_value) > 0
    assert growth_gate(fast.value, grid, log_f=fast.log_value) < 0


def test_failed_gate_is_flagged():
    fast = model_cosh_root(np.pi)
    grid = list(np.logspace(2, 4, 11))
    series = expand(fast.value, 0, K=8, r_grid=grid, log_f=fast.log_value)
    assert series.gate_failed
    assert "gate-failed" in series.flags
    assert series.to_json()["flags"] == ["gate-failed"]


def test_cosh_root_series_converges():
    f = model_cosh_root(1.0).value
    series = expand(f, 0, K=24, r_grid=list(np.logspace(2, 4, 11)))
    assert not series.gate_failed
    assert reconstruction_error(series, f) < 1e-7
    document = series.to_json()
    assert document["K"] == 24
    assert len(document["coeffs"]) == 25
