import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from wilsonnev.config import log_grid
from wilsonnev.errors import EvaluatorRequiredError, NudgeError
from wilsonnev.funcmodel import (
    Divisor,
    DivisorStream,
    SyntheticDivisorData,
    model_constant,
    model_cosh_root,
    model_exp,
    model_from_synthetic,
    model_product_i,
    model_rational,
)
from wilsonnev.nevanlinna import (
    angular_logdiff_probe,
    characteristic,
    characteristic_sweep,
    circle_mean,
    counting_integrated,
    counting_unintegrated,
    fft_residual,
    growth_exponent,
    log_difference,
    log_wilson_proximity,
    nudged_radius,
    pointwise_logdiff_probe,
    proximity,
    radius_sweep,
)


def test_circle_mean_of_log_modulus():
    value, error, samples = circle_mean(lambda x: np.log(np.abs(x)), 7.0)
    assert value == pytest.approx(math.log(7.0))
    assert error < 1e-8
    assert samples >= 256


def test_proximity_of_exp(quadrature):
    result = proximity(model_exp(), 100.0, **quadrature)
    assert result.value == pytest.approx(100.0 / np.pi, rel=1e-7)
    assert result.nudges == 0


def test_characteristic_of_exp(quadrature):
    row = characteristic(model_exp(), 100.0, **quadrature)
    assert row.N == 0
    assert row.T == pytest.approx(100.0 / np.pi, rel=1e-7)
    inverse = characteristic(model_exp(), 100.0, a=0, **quadrature)
    assert inverse.T == pytest.approx(row.T, rel=1e-7)


def test_constant_has_zero_characteristic(quadrature):
    row = characteristic(model_constant(0.5), 50.0, **quadrature)
    assert row.T == 0
    row = characteristic(model_constant(0.5), 50.0, a=0, **quadrature)
    assert row.T == pytest.approx(math.log(2.0))


def test_first_main_theorem_for_a_polynomial(quadrature):
    f = model_rational([2.0])
    direct = characteristic(f, 10.0, **quadrature)
    inverse = characteristic(f, 10.0, a=0, **quadrature)
    assert inverse.N == pytest.approx(math.log(5.0))
    assert inverse.T - direct.T == pytest.approx(-math.log(2.0), abs=1e-8)


def test_counting_functions():
    stream = DivisorStream.from_divisors(
        [Divisor(0.0, 1), Divisor(2.0, 2), Divisor(-30.0, 1)]
    )
    assert counting_unintegrated(stream, 10.0) == 3
    assert counting_integrated(stream, 10.0) == pytest.approx(
        math.log(10.0) + 2 * math.log(5.0)
    )


def test_nudged_radius():
    streams = [DivisorStream.from_divisors([Divisor(10.0, 1)])]
    radius, nudges = nudged_radius(streams, 10.0)
    assert nudges == 1
    assert radius == pytest.approx(10.0 * (1 + 1e-5))
    assert nudged_radius(streams, 12.0) == (12.0, 0)

    crowded = [
        DivisorStream.from_divisors(
            [Divisor(10.0 * (1 + 1e-5) ** k, 1) for k in range(4)]
        )
    ]
    with pytest.raises(NudgeError):
        nudged_radius(crowded, 10.0)


def test_divisor_only_model_needs_evaluator():
    f = model_from_synthetic(SyntheticDivisorData().with_pole(1.0))
    with pytest.raises(EvaluatorRequiredError):
        proximity(f, 2.0)


def test_log_difference():
    value = log_difference(np.log(3.0), np.log(1.0))
    assert_allclose(np.exp(value), 2.0)
    swapped = log_difference(np.log(1.0), np.log(3.0))
    assert_allclose(np.exp(swapped), -2.0, atol=1e-14)
    assert np.isneginf(np.real(log_difference(-np.inf, -np.inf)))


def test_wilson_proximity_of_exp(quadrature):
    # D_W e^x / e^x = e^{-1/4} sin(sqrt x) / sqrt x
    r = 1e4
    result = log_wilson_proximity(model_exp(), r, **quadrature)
    theta = 2 * np.pi * np.arange(2**17) / 2**17
    z = np.sqrt(r * np.exp(1j * theta))
    ratio = np.log(np.abs(np.exp(-0.25) * np.sin(z) / z))
    expected = float(np.mean(np.maximum(ratio, 0.0)))
    assert result.value == pytest.approx(expected, rel=1e-4)
    assert result.value > 0.85 * 2 / np.pi * np.sqrt(r)


def test_fft_residual_is_flat(quadrature):
    grid = list(np.logspace(1, 3, 11))
    report = fft_residual(model_product_i(), 0, grid, **quadrature)
    assert report.passed
    assert max(abs(v) for v in report.residuals) < 1e-4


def test_growth_exponent():
    radii = np.logspace(0, 4, 41)
    report = growth_exponent(radii, 3 * radii**0.5)
    assert report.exponent == pytest.approx(0.5)


def test_pointwise_probe_of_exp():
    report = pointwise_logdiff_probe(model_exp(), 0.3, np.logspace(2, 5, 16))
    assert report.flagged == 0
    assert report.excluded == 0
    assert report.fraction == 0


def test_radius_sweep_keeps_order():
    assert radius_sweep(lambda r: 2 * r, [1.0, 2.0, 3.0], threads=2) == [2, 4, 6]


def test_characteristic_sweep(quadrature):
    rows = characteristic_sweep(model_exp(), [10.0, 20.0], **quadrature)
    assert [row.r for row in rows] == [10.0, 20.0]
    assert rows[1].T == pytest.approx(20.0 / np.pi, rel=1e-6)


def test_angular_probe_of_exp():
    # |ln|e^{x^+}/e^x|| = |Im sqrt x| stays below r^{0.6}
    report = angular_logdiff_probe(model_exp(), 1e4)
    assert len(report.points) == 360
    assert report.flagged == 0


@pytest.mark.parametrize(
    "model",
    [
        model_exp(),
        model_product_i(1.0),
        model_rational([2.0, -3.0 + 1.0j], [5.0j]),
        model_cosh_root(1.0),
    ],
)
def test_characteristic_is_nondecreasing(model, quadrature):
    rows = characteristic_sweep(model, log_grid(10.0, 1e3, 5), threads=2, **quadrature)
    for low, high in zip(rows, rows[1:], strict=False):
        slack = low.quadrature_error + high.quadrature_error + 1e-9 * max(1.0, low.T)
        assert high.T >= low.T - slack
    assert rows[-1].T > rows[0].T
