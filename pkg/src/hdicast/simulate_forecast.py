"""Autoregressive simulation of predictors and the HDI forecast path.

Predictors are extended with an ARI(p, d) model (no moving-average part)
fitted by conditional least squares and chosen by AIC. Forecasts are
deterministic point paths.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from hdicast.boosted_trees import BoostedModel, predict_many
from hdicast.data_model import AnnualSeries, Panel
from hdicast.errors import ColumnMismatch, InsufficientData, RankDeficient, TooShort

DEFAULT_P_MAX = 2
DEFAULT_D_MAX = 1
SIGMA2_FLOOR = 1e-12


@dataclass(frozen=True)
class ArModel:
    p: int
    d: int
    intercept: float
    phi: tuple[float, ...]
    sigma2: float
    aic: float
    n_obs: int = 0

    def __post_init__(self):
        if len(self.phi) != self.p:
            raise ValueError("phi must have p coefficients")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be >= 0")


@dataclass(frozen=True)
class ForecastResult:
    country: str
    years: tuple[int, ...]
    hdi: tuple[float, ...]
    predictor_paths: dict

    def __post_init__(self):
        if len(self.years) != len(self.hdi):
            raise ValueError("years and hdi differ in length")
        if any(not 0.0 <= v <= 1.0 for v in self.hdi):
            raise ValueError("hdi values must lie in [0, 1]")


def difference(s: Sequence[float], d: int) -> list[float]:
    if d not in (0, 1):
        raise ValueError("d must be 0 or 1")
    s = [float(v) for v in s]
    if len(s) <= d:
        raise TooShort(f"series of length {len(s)} cannot be differenced {d} time(s)")
    if d == 0:
        return s
    return [b - a for a, b in zip(s[:-1], s[1:])]


def undifference(diffs: Sequence[float], first: float) -> list[float]:
    out = [float(first)]
    for v in diffs:
        out.append(out[-1] + v)
    return out


def fit_ar(s: Sequence[float], p: int, start: Optional[int] = None) -> ArModel:
    """Least-squares AR(p) with intercept, on targets ``s[start:]``.

    ``start`` defaults to ``p``; a larger value lets candidates of different
    order share the same estimation rows.
    """
    s = np.asarray(s, dtype=float)
    start = p if start is None else start
    if p < 0 or start < p:
        raise ValueError("need p >= 0 and start >= p")
    n = len(s) - start
    if n < p + 2:
        raise TooShort(f"{len(s)} points are too few for AR({p}) from index {start}")
    target = s[start:]
    design = np.column_stack([np.ones(n)] + [s[start - i: len(s) - i] for i in range(1, p + 1)])
    if np.all(target == target[0]):
        # exact fit without lstsq round-off
        return ArModel(p, 0, float(target[0]), (0.0,) * p, 0.0,
                       n * math.log(SIGMA2_FLOOR) + 2 * (p + 1), n)
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise RankDeficient(f"AR({p}) design is collinear")
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    resid = target - design @ coef
    sigma2 = float(resid @ resid / n)
    aic = n * math.log(max(sigma2, SIGMA2_FLOOR)) + 2 * (p + 1)
    return ArModel(p, 0, float(coef[0]), tuple(float(c) for c in coef[1:]), sigma2, aic, n)


def select_order(s: Sequence[float], p_max: int = DEFAULT_P_MAX, d_max: int = DEFAULT_D_MAX) -> ArModel:
    """Minimal-AIC ARI(p, d) over a common estimation sample.

    Ties (and collinear candidates, which are skipped) resolve towards the
    smaller ``(d, p)``.
    """
    s = [float(v) for v in s]
    offset = p_max + d_max
    if len(s) - offset < p_max + 2:
        raise InsufficientData(f"{len(s)} points are too few for p_max={p_max}, d_max={d_max}")
    best = None
    for d in range(d_max + 1):
        z = difference(s, d)
        for p in range(p_max + 1):
            try:
                m = fit_ar(z, p, start=offset - d)
            except RankDeficient:
                continue
            m = ArModel(m.p, d, m.intercept, m.phi, m.sigma2, m.aic, m.n_obs)
            if best is None or m.aic < best.aic:
                best = m
    if best is None:
        raise InsufficientData("no candidate order could be fitted")
    return best


def ar_forecast(model: ArModel, s: Sequence[float], h: int) -> list[float]:
    """Iterate the fitted model ``h`` steps past the end of ``s``."""
    s = [float(v) for v in s]
    if h <= 0:
        return []
    z = difference(s, model.d)
    hist = list(z)
    for _ in range(h):
        nxt = model.intercept + sum(c * hist[-i] for i, c in enumerate(model.phi, start=1))
        hist.append(nxt)
    future = hist[len(z):]
    if model.d == 1:
        return undifference(future, s[-1])[1:]
    return future


def interpolate_missing(values: Sequence[Optional[float]]) -> list[float]:
    """Linear interpolation between observed neighbours; ends copy the nearest value."""
    arr = np.array([np.nan if v is None else float(v) for v in values])
    obs = np.flatnonzero(~np.isnan(arr))
    if obs.size == 0:
        raise TooShort("series has no observed values")
    return np.interp(np.arange(arr.size), obs, arr[obs]).tolist()


def forecast_predictor(s: Sequence[Optional[float]], h: int, p_max: int = DEFAULT_P_MAX,
                       d_max: int = DEFAULT_D_MAX) -> list[float]:
    if h <= 0:
        return []
    filled = interpolate_missing(s)
    model = select_order(filled, p_max, d_max)
    return ar_forecast(model, filled, h)


def _observed_span(s: AnnualSeries) -> AnnualSeries:
    obs = s.observed()
    lo, hi = min(obs), max(obs)
    return AnnualSeries(lo, tuple(s.get(y) for y in range(lo, hi + 1)))


def forecast_hdi(model: BoostedModel, panel: Panel, country: str, features: Sequence[str],
                 h: int, first_forecast_year: int, p_max: int = DEFAULT_P_MAX,
                 d_max: int = DEFAULT_D_MAX) -> ForecastResult:
    """Simulate each feature forward and push the rows through ``model``.

    Each feature is extended from its last observed year, so a feature that
    stops early is simulated over the gap as well.
    """
    features = list(features)
    if len(features) != model.n_features:
        raise ColumnMismatch(f"model has {model.n_features} features, got {len(features)}")
    years = list(range(first_forecast_year, first_forecast_year + h))
    paths = {}
    for code in features:
        series = panel.series(country, code)
        if not series.observed():
            raise TooShort(f"{code} has no observations for {country}")
        span = _observed_span(series)
        if first_forecast_year <= span.end_year:
            raise ValueError(f"forecast start {first_forecast_year} is not after {code}'s last observation")
        lead = first_forecast_year - span.end_year - 1
        path = forecast_predictor(span.values, lead + h, p_max, d_max)
        paths[code] = tuple(path[lead:])
    X = np.array([[paths[c][i] for c in features] for i in range(h)], dtype=float).reshape(h, len(features))
    raw = predict_many(model, X) if h > 0 else np.empty(0)
    if not np.all(np.isfinite(raw)):
        raise ValueError("non-finite HDI forecast")
    hdi = tuple(float(min(1.0, max(0.0, v))) for v in raw)
    return ForecastResult(country, tuple(years), hdi, paths)
