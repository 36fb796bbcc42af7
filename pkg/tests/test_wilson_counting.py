import math

import numpy as np
import pytest

from wilsonnev.config import log_grid
from wilsonnev.errors import DegenerateGridError, ParameterError
from wilsonnev.funcmodel import (
    Divisor,
    DivisorStream,
    figure_dataset,
    model_constant,
    model_exp,
    model_g_iii,
    model_product_i,
    model_rational,
)
from wilsonnev.wilson_counting import (
    ShiftOrder,
    canonical_root,
    chain_report,
    count_row,
    counting_gap,
    defect_estimates,
    defect_sum_check,
    detect_chains,
    dw_vanishing_order_at_shift,
    enumeration_radius,
    ew_set,
    exceptional_value_verdict,
    ramification_term,
    share_im_wilson,
    wilson_count_sweep,
    wilson_counts,
)


def test_canonical_root():
    assert canonical_root(-2 + 1j) == 2 - 1j
    assert canonical_root(2 - 1j) == 2 - 1j
    # on the cut the root of sqrt_with_cut wins
    assert canonical_root(-3j) == 3j
    assert enumeration_radius(100.0) == pytest.approx(196.0)


def test_shift_order_rules():
    stream = DivisorStream.from_divisors(
        [Divisor(1.0, 2, root=1.0), Divisor((1 + 1j) ** 2, 3, root=1 + 1j)]
    )
    first = stream.enumerate(10)[0]
    assert dw_vanishing_order_at_shift(stream, first) == ShiftOrder(2)
    lonely = DivisorStream.from_divisors([Divisor(1.0, 2)])
    assert dw_vanishing_order_at_shift(lonely, lonely.enumerate(2)[0]) == (0, False)
    tie = DivisorStream.from_divisors(
        [Divisor(1.0, 1, root=1.0), Divisor((1 + 1j) ** 2, 1, root=1 + 1j)]
    )
    order = dw_vanishing_order_at_shift(tie, tie.enumerate(10)[0])
    assert order.ambiguous


def test_count_row():
    pairs = [
        (Divisor(1.0, 3), ShiftOrder(1)),
        (Divisor(4.0, 1), ShiftOrder(1)),
        (Divisor(50.0, 2), ShiftOrder(0)),
    ]
    row = count_row(pairs, 10.0)
    assert (row.n_W, row.n_W_tilde) == (2, 2)
    assert row.N_W == pytest.approx(math.log(10.0) + math.log(2.5))
    assert row.N_W_tilde == pytest.approx(2 * math.log(10.0))


def test_empty_model_rows():
    rows = wilson_count_sweep(model_exp(), 0, [10.0, 100.0])
    assert all(
        (row.n_W, row.n_W_tilde, row.N_W, row.N_W_tilde) == (0, 0, 0.0, 0.0)
        for row in rows
    )


def test_g_model_counts():
    row = wilson_counts(model_g_iii(2, 1), 0, 1e4)
    # every double zero at -(2k)^2 keeps one unit of excess
    assert row.n_W_tilde == 50
    assert row.n_W == 100


@pytest.mark.parametrize(
    "model", [model_g_iii(), model_product_i(), model_rational([1.0, 1.0, -4.0])]
)
def test_counting_gap_vanishes(model):
    for r in (10.0, 250.0, 4000.0):
        assert abs(counting_gap(model, 0, r)) <= 1e-9


def test_figure_chains():
    figure = DivisorStream.from_divisors(figure_dataset().poles)
    report = chain_report(figure, None, 100.0)
    assert len(report.chains) == 3
    assert len(report.residual) == 5
    document = report.to_json()
    assert document["a"] is None
    assert len(document["chains"]) == 3
    assert all(chain["truncated"] for chain in document["chains"])


def test_detect_chains_on_a_single_point():
    report = detect_chains([Divisor(2.0, 1)], 0)
    assert report.chains == ()
    assert report.residual == (2.0,)


def test_product_zeros_form_one_chain():
    assert ew_set(model_product_i(), 0, 400.0) == ()
    report = chain_report(model_product_i().zeros, 0, 400.0)
    assert len(report.chains) == 1
    assert report.chains[0].root == pytest.approx(1.0)


def test_exceptional_value_verdict():
    verdict = exceptional_value_verdict(model_product_i(), 0, 1e4)
    assert verdict.candidate
    assert verdict.label == "exceptional-candidate"
    assert set(verdict.sizes) == {0}
    assert verdict.radii[0] == pytest.approx(5e3)


def test_sharing_with_itself():
    zeros = model_product_i().zeros
    verdict = share_im_wilson(zeros, zeros, 0, [100.0, 200.0, 400.0])
    assert verdict.shared
    assert set(verdict.tilde_differences) == {0}
    assert verdict.ambiguous


def test_ramification_of_exp(quadrature):
    # D_W e^x = e^{x - 1/4} sin(sqrt x)/sqrt x: zeros at (k pi)^2
    r = 100.0
    expected = sum(
        math.log(r / (k * math.pi) ** 2)
        for k in range(1, 10)
        if (k * math.pi) ** 2 <= r
    )
    assert ramification_term(model_exp(), r, **quadrature) == pytest.approx(
        expected, abs=1e-7
    )


def test_ramification_of_square(quadrature):
    f = model_rational([0.0, 0.0])
    assert ramification_term(f, 10.0, **quadrature) == pytest.approx(
        math.log(40.0), abs=1e-8
    )


def test_ramification_of_reciprocal(quadrature):
    # D_W(1/x) = -1/(x + 1/4)^2: the double pole cancels 2 N(r, f)
    f = model_rational([], [0.0])
    assert ramification_term(f, 10.0, **quadrature) == pytest.approx(
        -2 * math.log(4.0), abs=1e-7
    )


def test_ramification_needs_nonzero_origin(quadrature):
    with pytest.raises(ParameterError):
        ramification_term(model_constant(3.0), 10.0, **quadrature)


def test_defect_estimates_grid():
    with pytest.raises(DegenerateGridError):
        defect_estimates(model_product_i(), 0, [10.0, 100.0])


def test_defect_of_an_omitted_value(quadrature):
    grid = list(np.logspace(1, 4, 16))
    estimates = defect_estimates(
        model_product_i(), 0, grid, quadrature=quadrature
    )
    assert estimates.theta_W == pytest.approx(1.0)
    assert 0 <= estimates.delta <= 1


def test_defect_sum_of_an_entire_product(quadrature):
    grid = list(np.logspace(1, 4, 16))
    report = defect_sum_check(
        model_product_i(), [0, None], grid, quadrature=quadrature
    )
    assert report.total == pytest.approx(2.0)
    assert set(report.nsft_residuals) == {0.0}
    assert report.passed


@pytest.mark.parametrize(
    ("model", "bound"),
    [(model_product_i(), 1.0), (model_rational([0.0, 0.0]), 2.0)],
)
def test_exceptional_values_have_logarithmic_excess(model, bound):
    assert exceptional_value_verdict(model, 0, 1e4).candidate
    rows = wilson_count_sweep(model, 0, log_grid(10.0, 1e4, 5))
    ratios = [row.N_W_tilde / math.log(row.r) for row in rows]
    assert max(ratios) <= bound + 1e-9


def test_double_zero_at_the_origin_is_all_excess():
    # no zero at x^{++} = -1, so the full multiplicity is excess
    row = wilson_counts(model_rational([0.0, 0.0]), 0, 50.0)
    assert (row.n_W, row.n_W_tilde) == (0, 2)
    assert row.N_W_tilde == pytest.approx(2 * math.log(50.0))


def test_threaded_count_sweep_keeps_order():
    radii = log_grid(10.0, 1e4, 5)[::-1]
    serial = wilson_count_sweep(model_g_iii(2, 1), 0, radii)
    threaded = wilson_count_sweep(model_g_iii(2, 1), 0, radii, threads=3)
    assert threaded == serial
    assert [row.r for row in threaded] == radii
