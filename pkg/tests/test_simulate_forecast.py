import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_panel
from hdicast.boosted_trees import BoostedModel, Leaf, TrainParams, train
from hdicast.data_model import AnnualSeries, build_matrix
from hdicast.errors import ColumnMismatch, InsufficientData, TooShort
from hdicast.simulate_forecast import (ArModel, ForecastResult, ar_forecast, difference, fit_ar, forecast_hdi,
                                       forecast_predictor, interpolate_missing, select_order, undifference)
from oracles import ols_normal_equations


def ar_series(phi, n, seed, c=0.0, sd=1.0, burn=100):
    rng = np.random.default_rng(seed)
    x = [0.0] * len(phi)
    for e in rng.normal(0, sd, n + burn):
        x.append(c + sum(p * x[-i] for i, p in enumerate(phi, start=1)) + e)
    return np.array(x[-n:])


def test_difference_examples():
    assert difference([1, 4, 9], 1) == [3, 5]
    assert difference([1, 4, 9], 0) == [1, 4, 9]
    assert undifference([3, 5], 1) == [1, 4, 9]
    with pytest.raises(TooShort):
        difference([1.0], 1)


@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=30))
def test_difference_round_trip(s):
    back = undifference(difference(s, 1), s[0])
    np.testing.assert_allclose(back, s, rtol=0, atol=1e-9)


def test_fit_ar_constant_series():
    m = fit_ar([5.0] * 5, 1)
    assert (m.intercept, m.phi, m.sigma2) == (5.0, (0.0,), 0.0)
    m = fit_ar([3.0] * 12, 1)
    assert ar_forecast(m, [3.0] * 12, 4) == [3.0] * 4


def test_fit_ar_noiseless_recursion():
    s = [1.0]
    for _ in range(19):
        s.append(2 + 0.5 * s[-1])
    m = fit_ar(s, 1)
    assert m.intercept == pytest.approx(2.0, abs=1e-8)
    assert m.phi[0] == pytest.approx(0.5, abs=1e-8)
    assert m.sigma2 < 1e-16


def test_fit_ar_recovers_coefficient():
    m = fit_ar(ar_series([0.8], 200, seed=11), 1)
    assert abs(m.phi[0] - 0.8) <= 0.15


@given(st.integers(0, 10_000), st.integers(0, 2))
@settings(max_examples=40)
def test_fit_ar_matches_normal_equations(seed, p):
    s = ar_series([0.5, -0.2][:p], 30, seed, c=1.0)
    m = fit_ar(s, p)
    design = np.column_stack([np.ones(30 - p)] + [s[p - i: 30 - i] for i in range(1, p + 1)])
    coef = ols_normal_equations(design, s[p:])
    np.testing.assert_allclose([m.intercept, *m.phi], coef, rtol=1e-8, atol=1e-10)
    resid = s[p:] - design @ coef
    np.testing.assert_allclose(design.T @ resid, 0.0, atol=1e-8)
    assert m.sigma2 == pytest.approx(resid @ resid / (30 - p), rel=1e-8)
    assert m.aic == pytest.approx((30 - p) * math.log(m.sigma2) + 2 * (p + 1), rel=1e-10)


def test_select_order_degenerate_limits():
    s = ar_series([0.6], 20, seed=1, c=2.0)
    m = select_order(s, p_max=0, d_max=0)
    assert (m.p, m.d) == (0, 0)
    assert m.intercept == pytest.approx(np.mean(s))


def test_select_order_linear_trend_differences():
    m = select_order([1.0 + 0.5 * i for i in range(15)])
    assert m.d == 1
    assert ar_forecast(m, [1.0 + 0.5 * i for i in range(15)], 2) == pytest.approx([8.5, 9.0])


def test_select_order_finds_ar2():
    s = ar_series([0.5, 0.4], 200, seed=7, sd=0.1)
    assert select_order(s, p_max=2, d_max=0).p == 2
    assert select_order(s, p_max=3, d_max=1).p == 2


@given(st.integers(0, 10_000))
@settings(max_examples=30)
def test_selected_aic_not_worse_than_mean_model(seed):
    s = ar_series([0.3], 25, seed, c=1.0)
    best = select_order(s)
    mean_only = fit_ar(s, 0, start=3)
    assert best.aic <= mean_only.aic + 1e-12


def test_select_order_needs_data():
    with pytest.raises(InsufficientData):
        select_order([1.0, 2.0, 3.0, 4.0])


def test_interpolate_missing():
    assert interpolate_missing([None, 1.0, None, 3.0, None]) == [1.0, 1.0, 2.0, 3.0, 3.0]
    with pytest.raises(TooShort):
        interpolate_missing([None, None])


def test_forecast_predictor_examples():
    assert forecast_predictor([5.0] * 10, 3) == [5.0, 5.0, 5.0]
    assert forecast_predictor([float(i) for i in range(1, 11)], 3) == pytest.approx([11, 12, 13], abs=1e-6)
    assert forecast_predictor([1.0, 2.0, 3.0], 0) == []
    s = list(ar_series([0.7], 20, seed=3))
    assert forecast_predictor(s, 5) == forecast_predictor(s, 5)
    assert len(forecast_predictor(s, 5)) == 5


def _fitted(panel, features):
    X, y, _ = build_matrix(panel, "AAA", features)
    return train(X, y, TrainParams(n_rounds=30, eta=0.3, max_depth=2))


def test_forecast_hdi_years_and_bounds(small_panel):
    feats = ["GOOD", "NOISE1"]
    res = forecast_hdi(_fitted(small_panel, feats), small_panel, "AAA", feats, 5, 2020)
    assert res.years == (2020, 2021, 2022, 2023, 2024)
    assert all(0.0 <= v <= 1.0 and math.isfinite(v) for v in res.hdi)
    assert set(res.predictor_paths) == set(feats)
    assert all(len(p) == 5 for p in res.predictor_paths.values())


def test_forecast_hdi_constant_inputs():
    panel = make_panel(n_years=12, start=2011, countries=("AAA",))
    panel = panel.replace_cells({("AAA", "GOOD"): AnnualSeries(2011, (4.0,) * 12)})
    model = BoostedModel.from_trees(0.7, [Leaf(0.0)], TrainParams(n_rounds=1), 1)
    res = forecast_hdi(model, panel, "AAA", ["GOOD"], 5, 2023)
    assert res.hdi == (0.7,) * 5
    assert res.predictor_paths["GOOD"] == (4.0,) * 5


def test_forecast_hdi_clamps():
    panel = make_panel(n_years=12, start=2011, countries=("AAA",))
    high = BoostedModel.from_trees(1.4, [], TrainParams(n_rounds=0), 1)
    low = BoostedModel.from_trees(-0.2, [], TrainParams(n_rounds=0), 1)
    assert forecast_hdi(high, panel, "AAA", ["GOOD"], 3, 2023).hdi == (1.0,) * 3
    assert forecast_hdi(low, panel, "AAA", ["GOOD"], 3, 2023).hdi == (0.0,) * 3


def test_forecast_hdi_bridges_early_stop():
    panel = make_panel(n_years=15, start=2008, countries=("AAA",))
    vals = [float(i) for i in range(15)]
    short = AnnualSeries(2008, tuple(vals[:12] + [None] * 3))
    panel = panel.replace_cells({("AAA", "GOOD"): short})
    model = BoostedModel.from_trees(0.5, [], TrainParams(n_rounds=0), 1)
    res = forecast_hdi(model, panel, "AAA", ["GOOD"], 2, 2023)
    assert res.predictor_paths["GOOD"] == pytest.approx((15.0, 16.0), abs=1e-9)


def test_forecast_hdi_errors(small_panel):
    model = _fitted(small_panel, ["GOOD"])
    with pytest.raises(ColumnMismatch):
        forecast_hdi(model, small_panel, "AAA", ["GOOD", "NOISE1"], 5, 2023)
    with pytest.raises(ValueError):
        forecast_hdi(model, small_panel, "AAA", ["GOOD"], 5, 2010)


def test_result_invariants():
    with pytest.raises(ValueError):
        ForecastResult("AAA", (2023,), (1.2,), {})
    with pytest.raises(ValueError):
        ArModel(1, 0, 0.0, (), 0.0, 0.0)
