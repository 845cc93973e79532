"""Tests for the statistical reduction layer."""

import math

import numpy as np
import pytest

from coalsim.analysis import (
    COUNT_DECAY_EXPONENT,
    BoundCheck,
    binomial_bound_check,
    clopper_pearson,
    closed_form_gamma_integral,
    fit_power_law,
    gamma_integral_quadrature,
    hausdorff_distance,
    reduction_factor,
    survival_curve,
    tail_shape_check,
    validate_eta_window,
)
from coalsim.engine import Event, EventLog
from coalsim.errors import ContractError, ParameterError


def test_hausdorff_examples():
    assert hausdorff_distance([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert hausdorff_distance([0.0], [1.0]) == 1.0
    assert hausdorff_distance([0.0, 10.0], [0.0]) == 10.0
    assert hausdorff_distance([(0, 0), (1, 0)], [(0, 0)]) == 1.0
    with pytest.raises(ContractError):
        hausdorff_distance([], [1.0])


def test_hausdorff_custom_metric():
    metric = lambda a, b: abs(a - b) % 5
    assert hausdorff_distance([0], [4], metric=metric) == 4


def test_fit_power_law_exact():
    xs = [1.0, 2.0, 4.0, 8.0, 16.0]
    fit = fit_power_law([(x, x ** -2) for x in xs])
    assert abs(fit.slope + 2.0) < 1e-12
    assert fit.stderr < 1e-12
    assert fit.r_squared > 1.0 - 1e-12


def test_fit_power_law_noisy():
    rng = np.random.default_rng(3)
    a, c = -1.7, 4.0
    xs = np.geomspace(1, 100, 30)
    ys = c * xs ** a * np.exp(rng.normal(0, 0.01, size=len(xs)))
    fit = fit_power_law(list(zip(xs, ys)))
    assert abs(fit.slope - a) < 3 * fit.stderr


def test_fit_power_law_flat_and_errors():
    fit = fit_power_law([(x, 3.0) for x in (1, 2, 3, 4)])
    assert fit.slope == 0.0
    with pytest.raises(ContractError):
        fit_power_law([(1, 1), (2, 2), (3, 3)])
    with pytest.raises(ContractError):
        fit_power_law([(1, 1), (2, -2), (3, 3), (4, 4)])


def test_gamma_integral_examples():
    assert closed_form_gamma_integral(2.0, 1.0, 1.0) == pytest.approx(1.0, rel=1e-12)
    assert closed_form_gamma_integral(3.0, 2.0, 4.0) == pytest.approx(1.0 / 8.0, rel=1e-12)
    with pytest.raises(ParameterError):
        closed_form_gamma_integral(1.0, 1.0, 1.0)
    with pytest.raises(ParameterError):
        closed_form_gamma_integral(2.0, 0.0, 1.0)


def test_gamma_integral_against_quadrature():
    rng = np.random.default_rng(11)
    for _ in range(20):
        alpha = 1.1 + 2.9 * rng.random()
        beta = 0.3 + 2.0 * rng.random()
        a = 0.2 + 5.0 * rng.random()
        closed = closed_form_gamma_integral(alpha, beta, a)
        quad = gamma_integral_quadrature(alpha, beta, a)
        assert abs(closed - quad) <= 1e-8 * abs(closed)


def test_clopper_pearson_edges():
    lo, hi = clopper_pearson(0, 50)
    assert lo == 0.0 and 0 < hi < 0.1
    lo, hi = clopper_pearson(50, 50)
    assert hi == 1.0 and 0.9 < lo < 1.0
    with pytest.raises(ContractError):
        clopper_pearson(5, 0)


def test_binomial_bound_check_examples():
    assert binomial_bound_check(100, 100, 0.5).passed
    assert not binomial_bound_check(0, 100, 0.5).passed


def test_binomial_bound_check_calibration():
    # Bernoulli(0.3) with p_low = 0.3 at 10^4 trials: pass rate >= 99%
    rng = np.random.default_rng(8)
    passes = 0
    for _ in range(100):
        k = rng.binomial(10_000, 0.3)
        if binomial_bound_check(int(k), 10_000, 0.3).passed:
            passes += 1
    assert passes >= 99


def test_tail_shape_check_recovers_synthetic_slope():
    args = np.linspace(1.0, 6.0, 8)
    n = 200_000
    probs = np.exp(1.2 - 1.9 * args)
    ks = (probs * n).astype(int)
    report = tail_shape_check(args, ks, [n] * len(args))
    assert not report.insufficient
    assert report.slope < 0
    assert abs(report.slope + 1.9) < 0.02
    assert report.r_squared > 0.99


def test_tail_shape_check_flags_insufficient():
    report = tail_shape_check([1, 2, 3, 4], [10, 5, 2, 1], [100] * 4)
    assert report.insufficient
    assert math.isnan(report.slope)


def make_log(n, event_ticks, dt=1.0):
    log = EventLog(n, dt)
    for i, t in enumerate(event_ticks):
        log.events.append(Event(t, n - 1 - i, 0, 0))
    return log


def test_survival_curve():
    logs = [make_log(4, []), make_log(4, [1, 2]), make_log(4, [1, 1, 3])]
    curve = survival_curve(logs, ticks=[0, 1, 2, 3], m_values=[1, 3])
    assert curve.counts.shape == (3, 4)
    assert np.array_equal(curve.counts[0], [4, 4, 4, 4])
    assert np.array_equal(curve.counts[2], [4, 2, 2, 1])
    # exceedance of m=3 at t=0 is 1.0 across replicates
    assert curve.exceed_prob[1, 0] == 1.0
    assert (curve.exceed_ci_low <= curve.exceed_prob).all()
    assert (curve.exceed_prob <= curve.exceed_ci_high).all()
    # flat curve for the eventless replicate
    assert curve.mean[0] == 4.0


def test_reduction_factor_window():
    for p in (1e-6, 0.3, 1.0):
        g = reduction_factor(p)
        assert 1.0 < g <= 1.25
    assert reduction_factor(1.0) == 1.25
    with pytest.raises(ParameterError):
        reduction_factor(0.0)
    with pytest.raises(ParameterError):
        reduction_factor(1.5)


def test_eta_window():
    h = validate_eta_window(1.5, 0.4)
    assert h == pytest.approx(1.0 - 1.4 / 1.5)
    with pytest.raises(ParameterError):
        validate_eta_window(1.5, 0.25)   # at the boundary (alpha-1)/2
    with pytest.raises(ParameterError):
        validate_eta_window(1.5, 0.5)    # at the boundary alpha-1
    with pytest.raises(ParameterError):
        validate_eta_window(2.5, 0.4)


def test_count_decay_exponent_symbolically():
    # the per-stage time scale ~ n**(-log_3 5) inverts to counts ~ t**(-log_5 3)
    import sympy

    n, t = sympy.symbols("n t", positive=True)
    stage_time = n ** -(sympy.log(5) / sympy.log(3))
    inverted = sympy.solve(sympy.Eq(t, stage_time), n)[0]
    exponent = sympy.simplify(sympy.log(inverted) / sympy.log(t))
    assert sympy.simplify(exponent + sympy.log(3) / sympy.log(5)) == 0
    assert abs(COUNT_DECAY_EXPONENT - float(sympy.log(3) / sympy.log(5))) < 1e-15
    assert COUNT_DECAY_EXPONENT == pytest.approx(0.6826, abs=1e-4)
