import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relimp.dataset import Dataset
from relimp.gbm import GBMConfig, fit_gbm
from relimp.pdp import (AllMissingFeature, UnknownFeature, ice_curves, make_grid,
                        partial_dependence, write_curve_csv, write_panel_svg)

from conftest import signal_dataset


def linear_model(seed=0, n=200):
    rng = np.random.default_rng(seed)
    x1 = np.tile(np.arange(10.0), n // 10)
    X = np.column_stack([x1, rng.normal(size=n)])
    d = Dataset.from_arrays(X, 3.0 * x1, ["x1", "x2"])
    m = fit_gbm(d, GBMConfig(n_trees=300, learn_rate=0.1, subsample_fraction=1.0,
                             max_leaves=10, min_obs_leaf=1))
    return d, m


def test_grid_rules():
    assert list(make_grid([3.0, 1.0, np.nan, 1.0], 10)) == [1.0, 3.0]
    g = make_grid(np.arange(50.0), 5)
    assert list(g) == [0.0, 12.25, 24.5, 36.75, 49.0]
    with pytest.raises(AllMissingFeature):
        make_grid([np.nan, np.nan])


def test_linear_target():
    d, m = linear_model()
    c = partial_dependence(m, d, "x1")
    assert list(c.grid) == list(np.arange(10.0))
    assert np.corrcoef(c.grid, c.values)[0, 1] >= 0.99
    assert np.all(np.diff(c.values) > 0)
    assert abs(c.values.mean()) < 1e-9
    assert c.n_records_averaged == 200


def test_unused_feature_flat():
    d, m = linear_model()
    used = set(m.forest["feature"][m.forest["feature"] >= 0].tolist())
    assert used == {0}
    assert np.all(partial_dependence(m, d, "x2", 20).values == 0.0)


def test_constant_model_flat():
    rng = np.random.default_rng(0)
    d = Dataset.from_arrays(rng.normal(size=(10, 2)), np.full(10, 2.0))
    m = fit_gbm(d, GBMConfig(n_trees=5, min_obs_leaf=1))
    assert np.all(partial_dependence(m, d, "x1").values == 0.0)


def test_errors():
    d, m = linear_model(n=20)
    with pytest.raises(UnknownFeature):
        partial_dependence(m, d, "nope")


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_curve_properties(seed):
    d = signal_dataset(seed, n=30)
    X = d.X.copy()
    X[::7, 2] = np.nan
    d = Dataset.from_arrays(X, d.y, d.predictor_names)
    m = fit_gbm(d, GBMConfig(n_trees=60, learn_rate=0.2, max_leaves=4, min_obs_leaf=2))
    for f in d.predictor_names:
        c = partial_dependence(m, d, f, 12)
        ice = ice_curves(m, d, f, c.grid)
        # average-then-centre equals centre-then-average
        alt = (ice - ice.mean(axis=0, keepdims=True)).mean(axis=1)
        assert np.allclose(c.values, alt, atol=1e-9)
        # uncentered average lies within the spread of the individual curves
        avg = ice.mean(axis=1)
        assert np.all(avg >= ice.min(axis=1) - 1e-12) and np.all(avg <= ice.max(axis=1) + 1e-12)
        assert np.all(np.diff(c.grid) > 0) and abs(c.values.mean()) < 1e-9


def test_single_feature_model_reproduces_response():
    rng = np.random.default_rng(3)
    x = rng.normal(size=40)
    X = np.column_stack([x, rng.normal(size=40)])
    y = np.sin(x)
    d = Dataset.from_arrays(X, y, ["x", "z"])
    # z is constant inside the model by construction: fit on x alone, then embed
    m1 = fit_gbm(Dataset.from_arrays(X[:, :1], y, ["x"]),
                 GBMConfig(n_trees=50, learn_rate=0.3, subsample_fraction=1.0, max_leaves=5,
                           min_obs_leaf=1))
    c = partial_dependence(m1, d.select(["x"]), "x")
    direct = m1.predict(c.grid[:, None])
    assert np.allclose(c.values, direct - direct.mean(), atol=1e-12)


def test_writers(tmp_path):
    d, m = linear_model(n=20)
    curves = [partial_dependence(m, d, f, 10) for f in ("x1", "x2")]
    write_curve_csv(curves[0], tmp_path / "pdp_x1.csv")
    rows = list(csv.reader(open(tmp_path / "pdp_x1.csv")))
    assert rows[0] == ["grid_value", "centered_dependence"] and len(rows) == 11
    write_panel_svg(curves, tmp_path / "p.svg")
    first = (tmp_path / "p.svg").read_bytes()
    write_panel_svg(curves, tmp_path / "p.svg")
    assert first.startswith(b"<?xml") and first == (tmp_path / "p.svg").read_bytes()
