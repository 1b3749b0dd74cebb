import csv
import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from relimp.dataset import Dataset, save_csv
from relimp.gbm import GBMConfig
from relimp.pipeline import (NoSignificantFeatures, PermutationConfig, PipelineConfig,
                             RunManifest, emit_report, run_pipeline, strip_wall_clock)

QUICK = GBMConfig(n_trees=300, learn_rate=0.05, subsample_fraction=0.9, max_leaves=4,
                  min_obs_leaf=2, seed=1, mse_trace_stride=50)


@pytest.fixture(scope="module")
def screened_csv(tmp_path_factory):
    """x1 and x2 drive y; x3 is built to be irrelevant (large p-value)."""
    rng = np.random.default_rng(10)
    n = 40
    X = rng.normal(size=(n, 3))
    y = 3 * X[:, 0] - 2 * X[:, 1] + 0.5 * rng.normal(size=n)
    B = np.column_stack([np.ones(n), X[:, :2], y])
    w = rng.normal(size=n)
    X[:, 2] = w - B @ np.linalg.lstsq(B, w, rcond=None)[0] + 0.01 * rng.normal(size=n)
    path = tmp_path_factory.mktemp("data") / "s.csv"
    save_csv(Dataset.from_arrays(X, y, ["x1", "x2", "x3"], response_name="y"), path)
    return path


def cfg(path, out, **kw):
    return PipelineConfig(input_path=str(path), response_name=kw.pop("response", "y"),
                          output_dir=str(out), gbm=kw.pop("gbm", QUICK),
                          permutation=PermutationConfig("mse", 3, 2), pdp_grid_size=15, **kw)


def test_filter_drops_insignificant(screened_csv, tmp_path):
    m = run_pipeline(cfg(screened_csv, tmp_path))
    reg = json.loads((tmp_path / "regression.json").read_text())
    p = {r["feature"]: r["p_value"] for r in reg["features"]}
    assert p["x3"] > 0.5 and p["x1"] < 0.05 and p["x2"] < 0.05
    survivors = next(s for s in m.steps if s["name"] == "step1_screen")["survivors"]
    assert survivors == ["x1", "x2"]
    model = json.loads((tmp_path / "model.json").read_text())
    assert model["feature_names"] == ["x1", "x2"]
    imp = json.loads((tmp_path / "importance.json").read_text())
    assert all({s["feature"] for s in d["scores"]} == {"x1", "x2"} for d in imp)
    assert not (tmp_path / "pdp_x3.csv").exists()


def test_nothing_significant(tmp_path):
    rng = np.random.default_rng(0)
    d = Dataset.from_arrays(rng.normal(size=(20, 2)), rng.normal(size=20))
    save_csv(d, tmp_path / "n.csv")
    with pytest.raises(NoSignificantFeatures):
        run_pipeline(cfg(tmp_path / "n.csv", tmp_path / "o", alpha=1e-6))


def _tree(out: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(out.iterdir())}


def test_skip_equals_permissive_alpha(screened_csv, tmp_path):
    run_pipeline(cfg(screened_csv, tmp_path / "a", skip_step1=True))
    run_pipeline(cfg(screened_csv, tmp_path / "b", alpha=0.9999))
    a, b = _tree(tmp_path / "a"), _tree(tmp_path / "b")
    assert set(a) == set(b)
    for name in a:
        if name not in ("manifest.json", "report.txt"):
            assert a[name] == b[name], name


def test_determinism_and_manifest(screened_csv, tmp_path):
    ma = run_pipeline(cfg(screened_csv, tmp_path / "a", skip_step1=True, pdp_svg=True))
    run_pipeline(cfg(screened_csv, tmp_path / "b", skip_step1=True, pdp_svg=True))
    a, b = _tree(tmp_path / "a"), _tree(tmp_path / "b")
    assert set(a) == set(b)
    for name in a:
        if name == "manifest.json":
            ja, jb = (strip_wall_clock(json.loads(x[name])) for x in (a, b))
            assert ja == jb
        else:
            assert a[name] == b[name], name
    # every declared file exists and parses
    assert set(ma.files) == set(a)
    for name in ma.files:
        p = tmp_path / "a" / name
        if name.endswith(".json"):
            json.loads(p.read_text())
        elif name.endswith(".csv"):
            rows = list(csv.reader(open(p)))
            assert len(rows) >= 2 and all(len(r) == len(rows[0]) for r in rows)
        elif name.endswith(".svg"):
            assert p.read_bytes().startswith(b"<?xml")
    loaded = RunManifest.load(tmp_path / "a")
    assert loaded.dataset_sha256 == ma.dataset_sha256
    assert all("wall_clock_seconds" in s for s in loaded.steps)


def test_report_contents(screened_csv, tmp_path):
    m = run_pipeline(cfg(screened_csv, tmp_path, skip_step1=True))
    text = emit_report(m)
    assert "skipped (variables supplied a priori)" in text
    assert "training R^2" in text and "flatline iteration" in text
    for method in ("frequency", "split", "permutation"):
        assert method in text
    assert text == (tmp_path / "report.txt").read_text()
    assert emit_report(RunManifest.load(tmp_path)) == text


def test_report_no_splits(tmp_path):
    # constant predictors admit no split at all
    rng = np.random.default_rng(1)
    save_csv(Dataset.from_arrays(np.ones((12, 2)), rng.normal(size=12)), tmp_path / "c.csv")
    g = GBMConfig(n_trees=10, max_leaves=4, min_obs_leaf=2)
    m = run_pipeline(cfg(tmp_path / "c.csv", tmp_path / "o", skip_step1=True, gbm=g))
    text = emit_report(m)
    assert "no splits:" in text
    assert "OLS not available" in text


def test_fixture_run_names_msp_first(fixture_path, tmp_path):
    g = GBMConfig(n_trees=5000, learn_rate=0.001, subsample_fraction=0.95, max_leaves=6,
                  min_obs_leaf=3, seed=0)
    m = run_pipeline(PipelineConfig(str(fixture_path), output_dir=str(tmp_path), skip_step1=True,
                                    gbm=g))
    imp = json.loads((tmp_path / "importance.json").read_text())
    split = next(d for d in imp if d["method"] == "split")
    assert split["scores"][0]["feature"] == "MSP" and split["scores"][0]["rank"] == 1
    assert "MSP" in emit_report(m).split("Step 3")[1].splitlines()[3]
