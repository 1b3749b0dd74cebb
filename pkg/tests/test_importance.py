import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relimp import _rng
from relimp.dataset import Dataset
from relimp.gbm import GBMConfig, GBMModel, fit_gbm
from relimp.importance import (ImportanceReport, NoSplitsInModel, permutation_importance, rescale,
                               selection_frequency, split_importance, write_csv, write_json)

from conftest import signal_dataset

NAMES = ["a", "b", "c"]


def _stump(f, imp=1.0, lo=-1.0, hi=1.0, thr=0.0):
    return {"feature": f, "threshold": thr, "missing_goes_left": True, "improvement": imp,
            "left": {"value": lo, "count": 1}, "right": {"value": hi, "count": 1}, "count": 2}


def _model(trees):
    cfg = GBMConfig(n_trees=len(trees), max_leaves=2, min_obs_leaf=1)
    return GBMModel.from_dict({"config": cfg.__dict__, "baseline": 0.0, "feature_names": NAMES,
                               "trees": trees, "mse_trace": [[0, 1.0], [len(trees), 1.0]]})


def test_single_feature_model():
    m = _model([_stump(0), _stump(0, 3.0)])
    r = selection_frequency(m)
    assert r.raw == {"a": 2.0, "b": 0.0, "c": 0.0}
    assert r.scaled == {"a": 100.0, "b": 0.0, "c": 0.0}


def test_equal_counts_both_100():
    r = selection_frequency(_model([_stump(0), _stump(1)]))
    assert r.scaled == {"a": 100.0, "b": 100.0, "c": 0.0}
    assert [row["rank"] for row in r.ranked()] == [1, 1, 3]


def test_split_importance_stump():
    m = _model([_stump(2, 1.0), {"value": 0.0, "count": 2}, {"value": 0.0, "count": 2}])
    r = split_importance(m)
    assert r.raw["c"] == pytest.approx(1.0 / 3)
    assert r.scaled == {"a": 0.0, "b": 0.0, "c": 100.0}


def test_no_splits():
    m = _model([{"value": 0.0, "count": 2}])
    with pytest.raises(NoSplitsInModel):
        selection_frequency(m)
    with pytest.raises(NoSplitsInModel):
        split_importance(m)


def test_unused_feature_zero_permutation():
    m = _model([_stump(0)])
    rng = np.random.default_rng(0)
    d = Dataset.from_arrays(rng.normal(size=(20, 3)), rng.normal(size=20), NAMES)
    r = permutation_importance(m, d, n_shuffles=5, seed=1)
    assert r.raw["b"] == 0.0 and r.raw["c"] == 0.0
    assert r.extra["shuffled_scores"]["b"] == [r.extra["base_score"]] * 5


def test_permutation_formula_by_hand():
    rng = np.random.default_rng(1)
    d = signal_dataset(1, n=30)
    m = fit_gbm(d, GBMConfig(n_trees=50, learn_rate=0.2, subsample_fraction=1.0, max_leaves=4,
                             min_obs_leaf=2))
    r = permutation_importance(m, d, metric="rmse", n_shuffles=3, seed=9)
    X, y = d.X, d.y
    base = np.sqrt(np.mean((y - m.predict(X)) ** 2))
    for j, f in enumerate(d.predictor_names):
        scores = []
        for s in range(3):
            Xp = X.copy()
            Xp[:, j] = X[_rng.permutation(9, j, s, len(y)), j]
            scores.append(np.sqrt(np.mean((y - m.predict(Xp)) ** 2)))
        assert r.raw[f] == pytest.approx(max(0.0, np.mean(scores) - base), rel=1e-12, abs=1e-15)


def test_permutation_deterministic():
    d = signal_dataset(2)
    m = fit_gbm(d, GBMConfig(n_trees=30, learn_rate=0.2, max_leaves=3, min_obs_leaf=2))
    a = permutation_importance(m, d, n_shuffles=4, seed=5)
    b = permutation_importance(m, d, n_shuffles=4, seed=5)
    assert a.raw == b.raw


def test_permutation_is_a_permutation():
    p = _rng.permutation(3, 1, 2, 50)
    assert sorted(p.tolist()) == list(range(50))


@given(st.dictionaries(st.sampled_from(list("abcdefg")), st.floats(0, 1e6), min_size=1),
       st.floats(1e-6, 1e6))
def test_rescale_scale_invariant(raw, c):
    a = rescale(raw)
    b = rescale({k: c * v for k, v in raw.items()})
    assert all(a[k] == pytest.approx(b[k], rel=1e-9, abs=1e-9) for k in raw)
    assert all(0.0 <= v <= 100.0 for v in a.values())
    if max(raw.values()) > 0:
        assert max(a.values()) == 100.0


def test_split_totals_equal_fit_gain():
    d = signal_dataset(3)
    m = fit_gbm(d, GBMConfig(n_trees=1, learn_rate=1.0, subsample_fraction=1.0, max_leaves=6,
                             min_obs_leaf=2))
    y = d.y
    sst = float(((y - y.mean()) ** 2).sum())
    sse = float(((y - m.predict(d.X)) ** 2).sum())
    assert sum(split_importance(m).raw.values()) == pytest.approx(sst - sse, rel=1e-9)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_report_invariants(seed):
    d = signal_dataset(seed, n=25)
    m = fit_gbm(d, GBMConfig(n_trees=40, learn_rate=0.1, max_leaves=4, min_obs_leaf=2, seed=seed))
    for r in (selection_frequency(m), split_importance(m), permutation_importance(m, d, n_shuffles=2)):
        assert max(r.scaled.values()) == 100.0
        assert all(0.0 <= v <= 100.0 for v in r.scaled.values())
        assert all(v >= 0 for v in r.raw.values())
        top = max(r.raw.values())
        assert all(r.scaled[f] == pytest.approx(100 * r.raw[f] / top) for f in r.raw)


def test_writers(tmp_path):
    reports = [selection_frequency(_model([_stump(0), _stump(1), _stump(1)])),
               ImportanceReport("permutation", {"a": 1.0, "b": 0.0, "c": 1.0},
                                {"a": 100.0, "b": 0.0, "c": 100.0}, "mse", 10, 0)]
    write_json(reports, tmp_path / "i.json")
    write_csv(reports, tmp_path / "i.csv")
    doc = json.loads((tmp_path / "i.json").read_text())
    assert [d["method"] for d in doc] == ["frequency", "permutation"]
    assert [s["feature"] for s in doc[0]["scores"]] == ["b", "a", "c"]
    assert [s["rank"] for s in doc[1]["scores"]] == [1, 1, 3]
    rows = list(csv.DictReader(open(tmp_path / "i.csv")))
    assert len(rows) == 6 and rows[0]["feature"] == "b" and rows[0]["rank"] == "1"
    write_json(reports[0], tmp_path / "one.json")
    assert json.loads((tmp_path / "one.json").read_text())["method"] == "frequency"
