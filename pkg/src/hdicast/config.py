"""Pipeline configuration (JSON) and its validation."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import NamedTuple, Optional

from hdicast.boosted_trees import TrainParams
from hdicast.data_model import HdiGoalposts
from hdicast.errors import ConfigError
from hdicast.evaluation import (DEFAULT_BOUNDARY_YEAR, DEFAULT_GRID_AXES, DEFAULT_HORIZON,
                                DEFAULT_MIN_TRAIN, expand_grid)
from hdicast.similarity import DEFAULT_EPSILON, DEFAULT_K, DEFAULT_MIN_OVERLAP
from hdicast.simulate_forecast import DEFAULT_D_MAX, DEFAULT_P_MAX

HDI_COMPONENT_KEYS = ("life", "mys", "eys", "gni")


@dataclass(frozen=True)
class CvConfig:
    min_train: int = DEFAULT_MIN_TRAIN
    horizon: int = DEFAULT_HORIZON


@dataclass(frozen=True)
class ForecastConfig:
    first_year: int = 2023
    horizon: int = 5
    p_max: int = DEFAULT_P_MAX
    d_max: int = DEFAULT_D_MAX


@dataclass(frozen=True)
class PipelineConfig:
    data_path: str
    countries: tuple
    target_code: str = "HDI"
    boundary_year: int = DEFAULT_BOUNDARY_YEAR
    epsilon: float = DEFAULT_EPSILON
    k: int = DEFAULT_K
    min_overlap: int = DEFAULT_MIN_OVERLAP
    grid: Optional[object] = None
    cv: CvConfig = CvConfig()
    forecast: ForecastConfig = ForecastConfig()
    goalposts: Optional[dict] = None
    hdi_components: Optional[dict] = None
    seed: int = 0
    output_dir: str = "out"
    base_dir: str = field(default=".", compare=False)

    @classmethod
    def from_dict(cls, d: dict, base_dir=".") -> "PipelineConfig":
        d = dict(d)
        known = {f.name for f in fields(cls)} - {"base_dir"}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        for required in ("data_path", "countries"):
            if required not in d:
                raise ConfigError(f"missing required key {required!r}")
        try:
            if "cv" in d:
                d["cv"] = CvConfig(**d["cv"])
            if "forecast" in d:
                d["forecast"] = ForecastConfig(**d["forecast"])
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        d["countries"] = tuple(d["countries"]) if isinstance(d["countries"], (list, tuple)) else d["countries"]
        return cls(base_dir=str(base_dir), **d)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(raw, base_dir=path.parent)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "base_dir"}
        d["countries"] = list(self.countries)
        d["cv"] = {"min_train": self.cv.min_train, "horizon": self.cv.horizon}
        d["forecast"] = {f.name: getattr(self.forecast, f.name) for f in fields(self.forecast)}
        return d

    def digest(self) -> str:
        """Hash of every setting that affects results (the output location does not)."""
        d = self.to_dict()
        d.pop("output_dir")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def resolve(self, p: str) -> Path:
        p = Path(p)
        return p if p.is_absolute() else Path(self.base_dir) / p

    @property
    def data_file(self) -> Path:
        return self.resolve(self.data_path)

    @property
    def output_path(self) -> Path:
        return self.resolve(self.output_dir)

    def train_grid(self) -> list[TrainParams]:
        """Grid points: ``grid`` may be a dict of axes or an explicit list of points."""
        if self.grid is None:
            return expand_grid(DEFAULT_GRID_AXES)
        if isinstance(self.grid, dict):
            axes = {("reg_lambda" if k == "lambda" else k): v for k, v in self.grid.items()}
            return expand_grid(axes)
        return [TrainParams.from_dict(p) for p in self.grid]

    def hdi_goalposts(self) -> HdiGoalposts:
        return HdiGoalposts(**(self.goalposts or {}))


class Violation(NamedTuple):
    field: str
    message: str

    def __str__(self):
        return f"{self.field}: {self.message}"


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def validate(config: PipelineConfig) -> list[Violation]:
    """Every violated constraint; an empty list means the config is usable."""
    out = []

    def check(ok, name, message):
        if not ok:
            out.append(Violation(name, message))

    check(isinstance(config.data_path, str) and config.data_path != "", "data_path", "must be a non-empty path")
    if isinstance(config.data_path, str) and config.data_path:
        check(config.data_file.is_file(), "data_path", f"file not found: {config.data_path}")
    check(isinstance(config.target_code, str) and config.target_code != "", "target_code", "must be non-empty")
    countries = config.countries
    check(isinstance(countries, tuple) and len(countries) > 0, "countries", "must be a non-empty list")
    if isinstance(countries, tuple) and countries:
        check(all(isinstance(c, str) and c for c in countries), "countries", "codes must be non-empty strings")
        check(len(set(countries)) == len(countries), "countries", "codes must be unique")
    check(_is_int(config.boundary_year), "boundary_year", "must be an integer year")
    check(isinstance(config.epsilon, (int, float)) and math.isfinite(config.epsilon) and config.epsilon >= 0,
          "epsilon", "must be a finite number >= 0")
    check(_is_int(config.k) and config.k >= 1, "k", "must be an integer >= 1")
    check(_is_int(config.min_overlap) and config.min_overlap >= 2, "min_overlap", "must be an integer >= 2")
    check(_is_int(config.cv.min_train) and config.cv.min_train >= 2, "cv.min_train", "must be an integer >= 2")
    check(_is_int(config.cv.horizon) and config.cv.horizon >= 1, "cv.horizon", "must be an integer >= 1")
    fc = config.forecast
    check(_is_int(fc.first_year), "forecast.first_year", "must be an integer year")
    check(_is_int(fc.horizon) and fc.horizon >= 1, "forecast.horizon", "must be an integer >= 1")
    check(_is_int(fc.p_max) and fc.p_max >= 0, "forecast.p_max", "must be an integer >= 0")
    check(fc.d_max in (0, 1), "forecast.d_max", "must be 0 or 1")
    try:
        grid = config.train_grid()
        check(len(grid) > 0, "grid", "must contain at least one point")
    except (TypeError, ValueError, AttributeError) as exc:
        out.append(Violation("grid", str(exc)))
    try:
        config.hdi_goalposts()
    except (TypeError, ValueError) as exc:
        out.append(Violation("goalposts", str(exc)))
    if config.hdi_components is not None:
        ok = isinstance(config.hdi_components, dict) and set(config.hdi_components) == set(HDI_COMPONENT_KEYS)
        check(ok, "hdi_components", f"must map exactly {', '.join(HDI_COMPONENT_KEYS)} to indicator codes")
    check(_is_int(config.seed), "seed", "must be an integer")
    check(isinstance(config.output_dir, str) and config.output_dir != "", "output_dir", "must be a non-empty path")
    return out
