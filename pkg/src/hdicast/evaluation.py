"""Temporal splits, expanding-window CV, grid search and per-country reports."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from hdicast.boosted_trees import BoostedModel, TrainParams, predict_many, train
from hdicast.data_model import Panel, build_matrix
from hdicast.errors import DegenerateSplit, InsufficientYears, LengthMismatch, ZeroActual

DEFAULT_BOUNDARY_YEAR = 2018
DEFAULT_MIN_TRAIN = 10
DEFAULT_HORIZON = 1

DEFAULT_GRID_AXES = {
    "eta": (0.05, 0.1, 0.3),
    "max_depth": (1, 2, 3),
    "reg_lambda": (0.0, 1.0, 10.0),
    "gamma": (0.0, 0.1),
    "n_rounds": (50, 100, 200),
}


def expand_grid(axes: dict, base: TrainParams = TrainParams()) -> list[TrainParams]:
    """Cartesian product of the axes, in axis-insertion order (last axis fastest)."""
    names = list(axes)
    out = []
    for combo in itertools.product(*(axes[n] for n in names)):
        d = base.to_dict()
        d.update({("lambda" if n == "reg_lambda" else n): v for n, v in zip(names, combo)})
        out.append(TrainParams.from_dict(d))
    return out


def default_grid() -> list[TrainParams]:
    return expand_grid(DEFAULT_GRID_AXES)


def mape(actual: Sequence[float], forecast: Sequence[float]) -> float:
    """Mean absolute percentage error, in percent."""
    a = np.asarray(actual, dtype=float)
    f = np.asarray(forecast, dtype=float)
    if a.shape != f.shape or a.ndim != 1:
        raise LengthMismatch(f"actual has shape {a.shape}, forecast {f.shape}")
    if a.size == 0:
        raise LengthMismatch("mape needs at least one value")
    if np.any(a == 0):
        raise ZeroActual("an actual value is zero")
    return float(np.mean(np.abs((a - f) / a)) * 100.0)


@dataclass(frozen=True)
class Fold:
    train_years: tuple[int, ...]
    valid_years: tuple[int, ...]

    def __post_init__(self):
        if not self.train_years or not self.valid_years:
            raise ValueError("fold needs non-empty train and validation years")
        if max(self.train_years) >= min(self.valid_years):
            raise ValueError("validation years must come strictly after training years")


def temporal_split(years: Sequence[int], boundary_year: int) -> tuple[list[int], list[int]]:
    train_years = [y for y in years if y <= boundary_year]
    test_years = [y for y in years if y > boundary_year]
    if not train_years or not test_years:
        raise DegenerateSplit(f"boundary {boundary_year} leaves an empty side of {years[0]}-{years[-1]}"
                              if years else "no years to split")
    return train_years, test_years


def expanding_cv_folds(train_years: Sequence[int], min_train: int = DEFAULT_MIN_TRAIN,
                       horizon: int = DEFAULT_HORIZON) -> list[Fold]:
    """Rolling-origin folds: fold i fits the first ``min_train + i`` years."""
    if min_train < 2 or horizon < 1:
        raise ValueError("min_train must be >= 2 and horizon >= 1")
    years = list(train_years)
    n_folds = len(years) - min_train - horizon + 1
    if n_folds < 1:
        raise InsufficientYears(f"{len(years)} years cannot hold min_train={min_train} plus horizon={horizon}")
    return [Fold(tuple(years[: min_train + i]), tuple(years[min_train + i: min_train + i + horizon]))
            for i in range(n_folds)]


def grid_search(X, y, years: Sequence[int], grid: Sequence[TrainParams],
                min_train: int = DEFAULT_MIN_TRAIN, horizon: int = DEFAULT_HORIZON,
                fit: Callable[..., BoostedModel] = train):
    """Score every grid point by mean fold MAPE; ties go to the earlier point.

    ``years`` labels the rows of ``X``. Returns ``(best, table)`` where
    ``table`` lists ``(params, mean_cv_mape)`` in grid order.
    """
    if not grid:
        raise ValueError("grid is empty")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    row_of = {yr: i for i, yr in enumerate(years)}
    folds = expanding_cv_folds(list(years), min_train, horizon)
    index = [([row_of[t] for t in f.train_years], [row_of[v] for v in f.valid_years]) for f in folds]
    table = []
    best, best_score = None, math.inf
    for params in grid:
        scores = []
        for tr, va in index:
            model = fit(X[tr], y[tr], params)
            scores.append(mape(y[va], predict_many(model, X[va])))
        score = float(np.mean(scores))
        table.append((params, score))
        if score < best_score:
            best, best_score = params, score
    if best is None:
        best = grid[0]
    return best, table


@dataclass(frozen=True)
class EvalReport:
    country: str
    in_sample_mape: float
    out_of_sample_mape: float
    best_params: TrainParams
    per_year: tuple[tuple[int, float, float], ...]
    features: tuple[str, ...] = ()
    cv_table: tuple = ()


def evaluate_country(panel: Panel, country: str, features: Sequence[str],
                     boundary_year: int = DEFAULT_BOUNDARY_YEAR,
                     grid: Optional[Sequence[TrainParams]] = None,
                     min_train: int = DEFAULT_MIN_TRAIN, horizon: int = DEFAULT_HORIZON,
                     fit: Callable[..., BoostedModel] = train) -> EvalReport:
    """Tune on the training window, refit, and score both windows."""
    if not features:
        raise ValueError("features must be non-empty")
    grid = default_grid() if grid is None else list(grid)
    X, y, years = build_matrix(panel, country, list(features))
    train_years, test_years = temporal_split(years, boundary_year)
    n_tr = len(train_years)
    best, table = grid_search(X[:n_tr], y[:n_tr], train_years, grid, min_train, horizon, fit=fit)
    model = fit(X[:n_tr], y[:n_tr], best)
    pred = predict_many(model, X)
    return EvalReport(
        country=country,
        in_sample_mape=mape(y[:n_tr], pred[:n_tr]),
        out_of_sample_mape=mape(y[n_tr:], pred[n_tr:]),
        best_params=best,
        per_year=tuple((int(yr), float(a), float(p)) for yr, a, p in zip(years, y, pred)),
        features=tuple(features),
        cv_table=tuple(table),
    )
