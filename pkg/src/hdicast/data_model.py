"""Indicator panel: ingestion, HDI composition and design-matrix assembly.

The canonical input is a long-format CSV with header
``country,indicator,year,value``; an empty ``value`` means missing.
Missing values are kept as explicit markers (``None`` in a series,
``NaN`` in arrays) and are never imputed here.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from hdicast.errors import (
    DuplicateCell,
    EmptyDesign,
    MalformedRow,
    MissingTarget,
    NonPositiveInput,
    TooShort,
    UnknownIndicator,
)

CSV_HEADER = ("country", "indicator", "year", "value")


@dataclass(frozen=True)
class AnnualSeries:
    """Values for consecutive calendar years starting at ``start_year``.

    ``None`` marks a missing value; the year index itself has no gaps.
    """

    start_year: int
    values: tuple[Optional[float], ...]

    def __post_init__(self):
        if len(self.values) < 1:
            raise ValueError("AnnualSeries needs at least one year")
        object.__setattr__(self, "values", tuple(
            None if v is None else float(v) for v in self.values))

    @property
    def end_year(self) -> int:
        return self.start_year + len(self.values) - 1

    @property
    def years(self) -> list[int]:
        return list(range(self.start_year, self.end_year + 1))

    def __len__(self) -> int:
        return len(self.values)

    def get(self, year: int) -> Optional[float]:
        if self.start_year <= year <= self.end_year:
            return self.values[year - self.start_year]
        return None

    def to_array(self) -> np.ndarray:
        return np.array([np.nan if v is None else v for v in self.values], dtype=float)

    @classmethod
    def from_array(cls, start_year: int, arr: Iterable[float]) -> "AnnualSeries":
        return cls(start_year, tuple(None if (v is None or math.isnan(v)) else float(v) for v in arr))

    def observed(self) -> dict[int, float]:
        return {y: v for y, v in zip(self.years, self.values) if v is not None}


@dataclass(frozen=True)
class HdiGoalposts:
    """Normalisation bounds for the three HDI dimensions (UNDP defaults)."""

    life_min: float = 20.0
    life_max: float = 85.0
    eys_max: float = 18.0
    mys_max: float = 15.0
    gni_min: float = 100.0
    gni_max: float = 75000.0

    def __post_init__(self):
        for name in ("life_min", "life_max", "eys_max", "mys_max", "gni_min", "gni_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"goalpost {name} must be positive")
        if not self.life_max > self.life_min:
            raise ValueError("life_max must exceed life_min")
        if not self.gni_max > self.gni_min:
            raise ValueError("gni_max must exceed gni_min")


@dataclass(frozen=True)
class Panel:
    countries: tuple[str, ...]
    indicators: tuple[str, ...]
    cells: dict = field(hash=False)
    target_code: str
    start_year: int
    end_year: int

    def __post_init__(self):
        for (c, i), s in self.cells.items():
            if s.start_year < self.start_year or s.end_year > self.end_year:
                raise ValueError(f"series {c}/{i} lies outside {self.start_year}-{self.end_year}")
        missing = [c for c in self.countries if (c, self.target_code) not in self.cells]
        if missing:
            raise MissingTarget(f"target {self.target_code!r} absent for {', '.join(missing)}")

    @property
    def years(self) -> list[int]:
        return list(range(self.start_year, self.end_year + 1))

    def has(self, country: str, indicator: str) -> bool:
        return (country, indicator) in self.cells

    def series(self, country: str, indicator: str) -> AnnualSeries:
        try:
            return self.cells[(country, indicator)]
        except KeyError:
            raise UnknownIndicator(f"{indicator!r} not available for {country!r}") from None

    def target(self, country: str) -> AnnualSeries:
        return self.series(country, self.target_code)

    def indicators_for(self, country: str) -> list[str]:
        return [i for i in self.indicators if (country, i) in self.cells]

    def replace_cells(self, updates: dict) -> "Panel":
        cells = dict(self.cells)
        cells.update(updates)
        indicators = tuple(sorted({i for _, i in cells}))
        return Panel(self.countries, indicators, cells, self.target_code, self.start_year, self.end_year)


def _parse_value(text: str, line_no: int) -> Optional[float]:
    text = text.strip()
    if text == "":
        return None
    try:
        v = float(text)
    except ValueError:
        raise MalformedRow(line_no, f"value {text!r} is not a number") from None
    if not math.isfinite(v):
        raise MalformedRow(line_no, f"value {text!r} is not finite")
    return v


def load_panel(path, target_code: str) -> Panel:
    """Read a long-format CSV into a :class:`Panel`.

    Every cell series spans the full year range seen in the file, with
    missing markers wherever no value was given.
    """
    raw: dict[tuple[str, str], dict[int, Optional[float]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise MalformedRow(1, f"expected header {','.join(CSV_HEADER)}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise MalformedRow(line_no, f"expected 4 fields, got {len(row)}")
            country, indicator, year_text, value_text = (x.strip() for x in row)
            if not country or not indicator:
                raise MalformedRow(line_no, "empty country or indicator code")
            try:
                year = int(year_text)
            except ValueError:
                raise MalformedRow(line_no, f"year {year_text!r} is not an integer") from None
            value = _parse_value(value_text, line_no)
            cell = raw.setdefault((country, indicator), {})
            if year in cell:
                raise DuplicateCell(f"line {line_no}: duplicate row for {country}/{indicator}/{year}")
            cell[year] = value
    if not raw:
        raise MalformedRow(2, "no data rows")

    all_years = [y for cell in raw.values() for y in cell]
    start, end = min(all_years), max(all_years)
    cells = {
        key: AnnualSeries(start, tuple(cell.get(y) for y in range(start, end + 1)))
        for key, cell in raw.items()
    }
    countries = tuple(sorted({c for c, _ in raw}))
    indicators = tuple(sorted({i for _, i in raw}))
    return Panel(countries, indicators, cells, target_code, start, end)


def write_panel(panel: Panel, path) -> None:
    """Serialise a panel to the canonical CSV (exact float round-trip)."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for country, indicator in sorted(panel.cells):
            s = panel.cells[(country, indicator)]
            for year, v in zip(s.years, s.values):
                w.writerow([country, indicator, year, "" if v is None else repr(v)])


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def hdi_compose(life_expectancy: float, mean_schooling: float, expected_schooling: float,
                gni_per_capita: float, goalposts: HdiGoalposts = HdiGoalposts()) -> float:
    """Geometric mean of the clamped health, education and income indices."""
    inputs = dict(life_expectancy=life_expectancy, mean_schooling=mean_schooling,
                  expected_schooling=expected_schooling, gni_per_capita=gni_per_capita)
    for name, v in inputs.items():
        if not (math.isfinite(v) and v > 0):
            raise NonPositiveInput(f"{name} must be finite and positive, got {v!r}")
    gp = goalposts
    health = _clamp01((life_expectancy - gp.life_min) / (gp.life_max - gp.life_min))
    education = 0.5 * (_clamp01(mean_schooling / gp.mys_max) + _clamp01(expected_schooling / gp.eys_max))
    income = _clamp01((math.log(gni_per_capita) - math.log(gp.gni_min))
                      / (math.log(gp.gni_max) - math.log(gp.gni_min)))
    return (health * education * income) ** (1.0 / 3.0)


def recompute_target(panel: Panel, components: dict, goalposts: HdiGoalposts = HdiGoalposts()) -> Panel:
    """Replace the target series by ``hdi_compose`` of component indicators.

    ``components`` maps ``life``, ``mys``, ``eys`` and ``gni`` to indicator
    codes. A year with any component missing gets a missing target.
    """
    updates = {}
    for country in panel.countries:
        parts = [panel.series(country, components[k]) for k in ("life", "mys", "eys", "gni")]
        values = []
        for year in panel.years:
            vals = [p.get(year) for p in parts]
            values.append(None if any(v is None for v in vals) else hdi_compose(*vals, goalposts))
        updates[(country, panel.target_code)] = AnnualSeries(panel.start_year, tuple(values))
    return panel.replace_cells(updates)


def zscore_normalize(s: AnnualSeries) -> AnnualSeries:
    """Standardise present values to mean 0, sample sd 1; constants map to 0."""
    arr = s.to_array()
    present = ~np.isnan(arr)
    vals = arr[present]
    if vals.size < 2:
        raise TooShort(f"need at least 2 observed values, got {vals.size}")
    if np.all(vals == vals[0]):
        out = np.where(present, 0.0, np.nan)
    else:
        out = (arr - vals.mean()) / vals.std(ddof=1)
    return AnnualSeries.from_array(s.start_year, out)


class Design(NamedTuple):
    X: np.ndarray
    y: np.ndarray
    years: list


def build_matrix(panel: Panel, country: str, features: Sequence[str],
                 year_range: Optional[tuple[int, int]] = None) -> Design:
    """Rows for every year in range with an observed target, ascending."""
    if year_range is None:
        year_range = (panel.start_year, panel.end_year)
    lo, hi = year_range
    if lo > hi or lo < panel.start_year or hi > panel.end_year:
        raise ValueError(f"year range {lo}-{hi} outside panel range {panel.start_year}-{panel.end_year}")
    target = panel.target(country)
    cols = [panel.series(country, f) for f in features]
    years = [y for y in range(lo, hi + 1) if target.get(y) is not None]
    if not years:
        raise EmptyDesign(f"no observed target for {country} in {lo}-{hi}")
    X = np.full((len(years), len(cols)), np.nan)
    for j, s in enumerate(cols):
        for i, year in enumerate(years):
            v = s.get(year)
            if v is not None:
                X[i, j] = v
    y = np.array([target.get(year) for year in years], dtype=float)
    return Design(X, y, years)
