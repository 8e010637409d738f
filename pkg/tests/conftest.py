import json
import shutil
from pathlib import Path

import hypothesis
import numpy as np
import pytest

from hdicast.data_model import AnnualSeries, Panel, write_panel

hypothesis.settings.register_profile("default", deadline=None, max_examples=100)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=10)
hypothesis.settings.load_profile("default")

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "hdicast" / "data"
BUNDLED_CONFIG = DATA_DIR / "gcc_config.json"
BUNDLED_PANEL = DATA_DIR / "gcc_panel.csv"

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, text): exit criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    number, text = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        ok = _ACCEPTANCE.get(number, (True, text))[0] and rep.outcome == "passed"
        _ACCEPTANCE[number] = (ok, text)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, text = _ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {text}")


def make_panel(n_years=20, start=2000, countries=("AAA", "BBB"), seed=0):
    """Small panel: target trends upward, one informative and two noise indicators."""
    rng = np.random.default_rng(seed)
    cells = {}
    for c in countries:
        t = np.arange(n_years)
        hdi = 0.6 + 0.01 * t + rng.normal(0, 0.002, n_years)
        cells[(c, "HDI")] = AnnualSeries(start, tuple(hdi))
        cells[(c, "GOOD")] = AnnualSeries(start, tuple(50 + 3 * t + rng.normal(0, 0.3, n_years)))
        cells[(c, "NOISE1")] = AnnualSeries(start, tuple(rng.normal(0, 1, n_years)))
        noise2 = list(rng.normal(5, 2, n_years))
        if n_years > 3:
            noise2[3] = None
        cells[(c, "NOISE2")] = AnnualSeries(start, tuple(noise2))
    return Panel(tuple(sorted(countries)), ("GOOD", "HDI", "NOISE1", "NOISE2"), cells, "HDI",
                 start, start + n_years - 1)


@pytest.fixture
def small_panel():
    return make_panel()


@pytest.fixture
def small_config(tmp_path):
    """A fast two-country config with a tiny grid, written to a temp dir."""
    panel = make_panel(n_years=20, start=2003)
    write_panel(panel, tmp_path / "panel.csv")
    cfg = {
        "data_path": "panel.csv",
        "countries": ["AAA", "BBB"],
        "boundary_year": 2018,
        "k": 2,
        "grid": {"eta": [0.3], "max_depth": [1, 2], "n_rounds": [20]},
        "cv": {"min_train": 8, "horizon": 1},
        "forecast": {"first_year": 2023, "horizon": 5},
        "output_dir": "out",
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


@pytest.fixture
def bundled_config(tmp_path):
    shutil.copy(BUNDLED_CONFIG, tmp_path / "gcc_config.json")
    shutil.copy(BUNDLED_PANEL, tmp_path / "gcc_panel.csv")
    return tmp_path / "gcc_config.json"
