"""Per-country orchestration of rank -> evaluate -> forecast and file output."""
from __future__ import annotations

import csv
import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from hdicast.boosted_trees import BoostedModel, TrainParams, train
from hdicast.chart import line_chart
from hdicast.config import PipelineConfig
from hdicast.data_model import Panel, build_matrix, load_panel, recompute_target
from hdicast.errors import ConfigError, HdicastError
from hdicast.evaluation import EvalReport, evaluate_country
from hdicast.similarity import FeatureRanking, rank_features
from hdicast.simulate_forecast import ForecastResult, forecast_hdi

log = logging.getLogger(__name__)

STAGES = ("rank", "evaluate", "forecast")
SUMMARY_FILE = "eval_summary.csv"
CHART_FILE = "forecast.svg"
MANIFEST_FILE = "manifest.json"


def fmt(v: float) -> str:
    return format(float(v), ".6g")


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def params_json(params: TrainParams) -> str:
    return json.dumps(params.to_dict(), sort_keys=True, separators=(",", ":"))


def write_ranking(path: Path, ranking: FeatureRanking) -> None:
    chosen = set(ranking.selected)
    write_csv(path, ("rank", "indicator", "edr_distance", "selected"),
              [(i, code, d, int(code in chosen)) for i, (code, d) in enumerate(ranking.entries, start=1)])


def read_selected(path: Path) -> list[str]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = sorted(csv.DictReader(fh), key=lambda r: int(r["rank"]))
    return [r["indicator"] for r in rows if r["selected"] == "1"]


def write_eval(path: Path, report: EvalReport, boundary_year: int) -> None:
    write_csv(path, ("year", "actual", "predicted", "split"),
              [(yr, fmt(a), fmt(p), "train" if yr <= boundary_year else "test")
               for yr, a, p in report.per_year])


def write_model(path: Path, country: str, features, model: BoostedModel, report: EvalReport) -> None:
    write_json(path, {
        "country": country,
        "features": list(features),
        "best_params": report.best_params.to_dict(),
        "in_sample_mape": report.in_sample_mape,
        "out_of_sample_mape": report.out_of_sample_mape,
        "model": model.to_dict(),
    })


def read_model(path: Path) -> tuple[list[str], BoostedModel]:
    doc = json.loads(path.read_text(encoding="utf-8"))
    return list(doc["features"]), BoostedModel.from_dict(doc["model"])


def summary_row(report: EvalReport) -> tuple:
    return (report.country, fmt(report.in_sample_mape), fmt(report.out_of_sample_mape),
            params_json(report.best_params))


@dataclass
class CountryOutcome:
    country: str
    files: list = field(default_factory=list)
    report: Optional[EvalReport] = None
    forecast: Optional[ForecastResult] = None
    failure: Optional[dict] = None


def prepare_panel(config: PipelineConfig) -> Panel:
    """Load the panel and check run-time constraints; raises on config/data errors."""
    panel = load_panel(config.data_file, config.target_code)
    if config.hdi_components is not None:
        panel = recompute_target(panel, config.hdi_components, config.hdi_goalposts())
    if not panel.start_year < config.boundary_year < panel.end_year:
        raise ConfigError(f"boundary_year {config.boundary_year} is not inside "
                          f"{panel.start_year}-{panel.end_year}")
    return panel


def process_country(config: PipelineConfig, panel: Panel, country: str, stages, reuse: bool) -> CountryOutcome:
    out_dir = config.output_path
    res = CountryOutcome(country)
    stage = "load"
    try:
        if country not in panel.countries:
            raise HdicastError(f"country {country!r} not in panel")
        features = None
        rank_file = out_dir / f"ranking_{country}.csv"
        model_file = out_dir / f"model_{country}.json"
        model = None
        need_eval = "evaluate" in stages or ("forecast" in stages and not (reuse and model_file.exists()))
        need_rank = "rank" in stages or (need_eval and not (reuse and rank_file.exists()))

        stage = "rank"
        if need_rank:
            ranking = rank_features(panel, country, config.epsilon, config.k, config.min_overlap)
            write_ranking(rank_file, ranking)
            res.files.append(rank_file.name)
            features = list(ranking.selected)

        stage = "evaluate"
        if need_eval:
            if features is None:
                features = read_selected(rank_file)
            report = evaluate_country(panel, country, features, config.boundary_year, config.train_grid(),
                                      config.cv.min_train, config.cv.horizon)
            X, y, _ = build_matrix(panel, country, features)
            model = train(X, y, report.best_params)
            eval_file = out_dir / f"eval_{country}.csv"
            write_eval(eval_file, report, config.boundary_year)
            write_model(model_file, country, features, model, report)
            res.files += [eval_file.name, model_file.name]
            res.report = report
            log.info("%s: in-sample MAPE %.3f%%, out-of-sample %.3f%%", country,
                     report.in_sample_mape, report.out_of_sample_mape)

        if "forecast" in stages:
            stage = "forecast"
            if model is None:
                features, model = read_model(model_file)
            fc = config.forecast
            result = forecast_hdi(model, panel, country, features, fc.horizon, fc.first_year, fc.p_max, fc.d_max)
            f_file = out_dir / f"forecast_{country}.csv"
            p_file = out_dir / f"predictors_{country}.csv"
            write_csv(f_file, ("year", "hdi"), [(yr, fmt(v)) for yr, v in zip(result.years, result.hdi)])
            write_csv(p_file, ("year", "indicator", "value"),
                      [(yr, code, fmt(v)) for code in features
                       for yr, v in zip(result.years, result.predictor_paths[code])])
            res.files += [f_file.name, p_file.name]
            res.forecast = result
    except (HdicastError, ValueError, OSError, KeyError) as exc:
        res.failure = {"country": country, "stage": stage, "error": type(exc).__name__, "message": str(exc)}
    return res


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_pipeline(config: PipelineConfig, stages=STAGES, workers: int = 1, reuse: bool = False,
                 write_manifest: bool = True) -> tuple[int, list[CountryOutcome]]:
    """Run ``stages`` for every configured country.

    Returns ``(exit_status, outcomes)``: 0 when every country succeeded,
    2 when at least one failed. Config/data errors propagate as exceptions.
    """
    panel = prepare_panel(config)
    out_dir = config.output_path
    out_dir.mkdir(parents=True, exist_ok=True)
    args = [(config, panel, c, tuple(stages), reuse) for c in config.countries]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(process_country, *zip(*args)))
    else:
        outcomes = [process_country(*a) for a in args]

    shared = []
    reports = [o.report for o in outcomes if o.report is not None]
    if reports:
        write_csv(out_dir / SUMMARY_FILE, ("country", "in_sample_mape", "out_of_sample_mape", "best_params_json"),
                  [summary_row(r) for r in reports])
        shared.append(SUMMARY_FILE)
    forecasts = {o.country: (o.forecast.years, o.forecast.hdi) for o in outcomes if o.forecast is not None}
    if forecasts:
        (out_dir / CHART_FILE).write_text(line_chart(forecasts, "Forecast HDI"), encoding="utf-8")
        shared.append(CHART_FILE)

    failures = [o.failure for o in outcomes if o.failure is not None]
    if write_manifest:
        files = sorted([f for o in outcomes for f in o.files] + shared)
        write_json(out_dir / MANIFEST_FILE, {
            "config_sha256": config.digest(),
            "files": {f: _sha256(out_dir / f) for f in files},
            "failures": failures,
        })
    return (2 if failures else 0), outcomes
