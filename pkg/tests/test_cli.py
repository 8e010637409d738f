import csv
import json
import subprocess
import sys

import pytest

from conftest import BUNDLED_CONFIG, make_panel
from hdicast.cli import main
from hdicast.config import PipelineConfig, validate
from hdicast.data_model import AnnualSeries, write_panel

PER_COUNTRY = ("ranking", "eval", "model", "forecast", "predictors")


def edit_config(path, **changes):
    cfg = json.loads(path.read_text())
    cfg.update(changes)
    path.write_text(json.dumps(cfg))
    return path


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def out_dir(config_path):
    return config_path.parent / "out"


def test_validate_bundled_config(capsys):
    assert main(["validate", "--config", str(BUNDLED_CONFIG)]) == 0
    assert capsys.readouterr().out.strip() == "ok"
    assert validate(PipelineConfig.load(BUNDLED_CONFIG)) == []


def test_validate_reports_every_violation(small_config, capsys):
    edit_config(small_config, countries=[], forecast={"first_year": 2023, "horizon": 0}, epsilon=-1.0)
    assert main(["validate", "--config", str(small_config)]) == 1
    fields = {v.field for v in validate(PipelineConfig.load(small_config))}
    assert {"countries", "forecast.horizon", "epsilon"} <= fields
    out = capsys.readouterr().out
    assert "forecast.horizon" in out and "countries" in out


def test_unknown_config_key_is_config_error(small_config, capsys):
    edit_config(small_config, bogus=1)
    assert main(["run-all", "--config", str(small_config)]) == 1
    err = json.loads(capsys.readouterr().err.strip().splitlines()[0])
    assert err["stage"] == "config"


def test_boundary_outside_data_is_exit_1(small_config, capsys):
    edit_config(small_config, boundary_year=2030)
    assert main(["run-all", "--config", str(small_config)]) == 1


def test_run_all_writes_everything(small_config):
    assert main(["run-all", "--config", str(small_config)]) == 0
    out = out_dir(small_config)
    for c in ("AAA", "BBB"):
        for stem in PER_COUNTRY:
            assert (out / f"{stem}_{c}.{'json' if stem == 'model' else 'csv'}").exists()
        fc = read_rows(out / f"forecast_{c}.csv")
        assert [int(r["year"]) for r in fc] == list(range(2023, 2028))
        assert all(0 <= float(r["hdi"]) <= 1 for r in fc)
        ranking = read_rows(out / f"ranking_{c}.csv")
        assert sum(r["selected"] == "1" for r in ranking) == 2
    summary = read_rows(out / "eval_summary.csv")
    assert [r["country"] for r in summary] == ["AAA", "BBB"]
    json.loads(summary[0]["best_params_json"])
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["failures"] == []
    assert set(manifest["files"]) == {p.name for p in out.iterdir()} - {"manifest.json"}
    svg = (out / "forecast.svg").read_text()
    assert svg.startswith("<svg") and svg.count("<polyline") == 2


def test_csv_floats_have_six_significant_digits(small_config):
    main(["run-all", "--config", str(small_config)])
    for r in read_rows(out_dir(small_config) / "eval_AAA.csv"):
        for key in ("actual", "predicted"):
            assert r[key] == format(float(r[key]), ".6g")


def test_single_country_k1(small_config):
    edit_config(small_config, countries=["BBB"], k=1)
    assert main(["run-all", "--config", str(small_config)]) == 0
    doc = json.loads((out_dir(small_config) / "model_BBB.json").read_text())
    assert len(doc["features"]) == 1 and doc["model"]["n_features"] == 1


def test_failure_is_isolated(small_config, capsys):
    edit_config(small_config, countries=["AAA", "ZZZ"])
    assert main(["run-all", "--config", str(small_config)]) == 2
    out = out_dir(small_config)
    assert (out / "forecast_AAA.csv").exists()
    assert not (out / "forecast_ZZZ.csv").exists()
    err = [json.loads(line) for line in capsys.readouterr().err.strip().splitlines()]
    assert err == [{"country": "ZZZ", "stage": "load", "error": "HdicastError",
                    "message": "country 'ZZZ' not in panel"}]
    assert json.loads((out / "manifest.json").read_text())["failures"] == err


def test_failure_names_the_stage(tmp_path, capsys):
    panel = make_panel(n_years=20, start=2003)
    # BBB keeps only a handful of target years, too few for the CV folds
    thin = tuple(v if i > 14 else None for i, v in enumerate(panel.target("BBB").values))
    write_panel(panel.replace_cells({("BBB", "HDI"): AnnualSeries(2003, thin)}), tmp_path / "panel.csv")
    cfg = {"data_path": "panel.csv", "countries": ["AAA", "BBB"], "k": 2, "min_overlap": 3,
           "grid": {"n_rounds": [10]}, "cv": {"min_train": 8, "horizon": 1}}
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    assert main(["run-all", "--config", str(tmp_path / "c.json")]) == 2
    err = [json.loads(line) for line in capsys.readouterr().err.strip().splitlines()]
    assert [(e["country"], e["stage"]) for e in err] == [("BBB", "evaluate")]
    assert (tmp_path / "out" / "forecast_AAA.csv").exists()


def test_stages_reuse_previous_outputs(small_config):
    out = out_dir(small_config)
    assert main(["rank", "--config", str(small_config)]) == 0
    assert {p.name for p in out.iterdir()} == {"ranking_AAA.csv", "ranking_BBB.csv"}
    assert main(["evaluate", "--config", str(small_config)]) == 0
    assert (out / "model_AAA.json").exists() and not (out / "forecast_AAA.csv").exists()
    model_bytes = (out / "model_AAA.json").read_bytes()
    assert main(["forecast", "--config", str(small_config)]) == 0
    assert (out / "model_AAA.json").read_bytes() == model_bytes
    staged = {p.name: p.read_bytes() for p in out.iterdir()}
    assert main(["run-all", "--config", str(small_config), "--output-dir", str(small_config.parent / "fresh")]) == 0
    fresh = small_config.parent / "fresh"
    for name, data in staged.items():
        assert (fresh / name).read_bytes() == data, name


def test_forecast_alone_runs_missing_stages(small_config):
    assert main(["forecast", "--config", str(small_config)]) == 0
    assert (out_dir(small_config) / "forecast_BBB.csv").exists()


def test_manifest_is_deterministic_and_worker_independent(small_config):
    assert main(["run-all", "--config", str(small_config)]) == 0
    first = (out_dir(small_config) / "manifest.json").read_bytes()
    assert main(["run-all", "--config", str(small_config)]) == 0
    assert (out_dir(small_config) / "manifest.json").read_bytes() == first
    par = small_config.parent / "par"
    assert main(["run-all", "--config", str(small_config), "--workers", "2", "--output-dir", str(par)]) == 0
    assert (par / "manifest.json").read_bytes() == first


def test_config_hash_ignores_output_dir(small_config):
    a = PipelineConfig.load(small_config)
    b = PipelineConfig.load(edit_config(small_config, output_dir="elsewhere"))
    assert a.digest() == b.digest()
    c = PipelineConfig.load(edit_config(small_config, k=1))
    assert c.digest() != a.digest()


def test_console_entry_point(small_config):
    proc = subprocess.run([sys.executable, "-m", "hdicast.cli", "validate", "--config", str(small_config)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "ok"


def test_bad_workers(small_config):
    assert main(["run-all", "--config", str(small_config), "--workers", "0"]) == 1
