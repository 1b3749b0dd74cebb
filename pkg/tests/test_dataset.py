import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relimp.dataset import (Dataset, DegenerateDataset, DivisionByZero, DuplicateColumnName,
                            MissingInResponse, MissingResponseColumn, TooShort, UnparseableCell,
                            ZeroVariance, load_csv, save_csv, standardize, yoy_transform)

from conftest import write_text


def test_load_marks_na_as_missing(tmp_path):
    d = load_csv(write_text(tmp_path, "a.csv", "y,x1\n1,2\n2,4\n3,NA\n"), "y")
    assert d.n_rows == 3
    assert d.predictor_names == ["x1"]
    assert np.isnan(d.values).sum() == 1
    assert np.isnan(d.column("x1")[2])
    assert d.stats("x1").missing_count == 1


def test_empty_cell_is_missing(tmp_path):
    d = load_csv(write_text(tmp_path, "a.csv", "y,x1\n1,\n2,4\n"), "y")
    assert np.isnan(d.column("x1")[0])


def test_missing_in_response(tmp_path):
    with pytest.raises(MissingInResponse):
        load_csv(write_text(tmp_path, "a.csv", "y,x1\n1,2\nNA,4\n"), "y")


def test_missing_response_column(tmp_path):
    with pytest.raises(MissingResponseColumn):
        load_csv(write_text(tmp_path, "a.csv", "y,x1\n1,2\n2,4\n"), "z")


def test_duplicate_column(tmp_path):
    with pytest.raises(DuplicateColumnName):
        load_csv(write_text(tmp_path, "a.csv", "y,x1,x1\n1,2,3\n2,4,5\n"), "y")


@pytest.mark.parametrize("cell", ["abc", "na", "1,5", "nan"])
def test_unparseable_cell(tmp_path, cell):
    with pytest.raises(UnparseableCell) as e:
        load_csv(write_text(tmp_path, "a.csv", f'y,x1\n1,2\n2,"{cell}"\n'), "y")
    assert e.value.row == 2 and e.value.col == "x1"  # 1-based data row


def test_single_row_rejected(tmp_path):
    with pytest.raises(DegenerateDataset):
        load_csv(write_text(tmp_path, "a.csv", "y,x1\n1,2\n"), "y")


def test_period_column_becomes_labels(tmp_path):
    d = load_csv(write_text(tmp_path, "a.csv", "period,y,x\nFY92,1,2\nFY93,2,3\n"), "y")
    assert list(d.row_labels) == ["FY92", "FY93"]
    assert list(d.column_names) == ["y", "x"]


def test_fixture_shape(fixture_data):
    d = fixture_data
    assert d.n_rows == 25
    assert d.response_name == "FCPI"
    assert d.predictor_names == ["MonsDev", "MSP", "FAO", "FD", "FWI", "AgrilInput", "ProteinExp"]
    miss = np.argwhere(np.isnan(d.values))
    assert len(miss) == 3
    assert set(d.column_names[c] for c in miss[:, 1]) == {"ProteinExp"}
    assert [d.row_labels[r] for r in miss[:, 0]] == ["FY14", "FY15", "FY16"]


def test_values_read_only(fixture_data):
    with pytest.raises(ValueError):
        fixture_data.values[0, 0] = 1.0


def test_yoy_examples():
    assert yoy_transform([100, 110]) == pytest.approx([10.0])
    assert yoy_transform([50, 50, 50]) == [0.0, 0.0]
    with pytest.raises(DivisionByZero) as e:
        yoy_transform([100, 0, 5])
    assert e.value.position == 1
    with pytest.raises(TooShort):
        yoy_transform([1.0])


@given(st.floats(0.1, 10.0), st.floats(0.5, 2.0), st.integers(2, 12))
def test_yoy_geometric(a, r, n):
    out = yoy_transform([a * r ** t for t in range(n)])
    assert np.allclose(out, 100.0 * (r - 1.0), atol=1e-9)


def _ds(cols, y=None):
    X = np.column_stack(cols).astype(float)
    y = np.arange(X.shape[0], dtype=float) if y is None else y
    return Dataset.from_arrays(X, y, [f"x{j}" for j in range(X.shape[1])])


def test_standardize_examples():
    s = standardize(_ds([[1.0, 2.0, 3.0]]))
    assert np.allclose(s.column("x0"), [-1.0, 0.0, 1.0])
    s = standardize(_ds([[1.0, np.nan, 3.0]]))
    c = s.column("x0")
    # stats over {1, 3}: mean 2, sample sd sqrt(2)
    assert np.isnan(c[1])
    assert c[0] == pytest.approx(-1 / math.sqrt(2)) and c[2] == pytest.approx(1 / math.sqrt(2))


def test_standardize_leaves_response():
    d = _ds([[1.0, 2.0, 4.0]], y=np.array([5.0, 6.0, 9.0]))
    assert np.array_equal(standardize(d).y, d.y)
    assert standardize(d, include_response=True).y.std(ddof=1) == pytest.approx(1.0)


def test_standardize_zero_variance():
    with pytest.raises(ZeroVariance) as e:
        standardize(_ds([[1.0, 2.0, 3.0], [4.0, 4.0, 4.0]]))
    assert e.value.column == "x1"


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 30), st.integers(1, 5))
def test_standardize_idempotent(seed, n, p):
    rng = np.random.default_rng(seed)
    X = rng.normal(5.0, 3.0, size=(n, p))
    X[rng.random((n, p)) < 0.1] = np.nan
    X[:2] = rng.normal(size=(2, p))  # at least two observed values per column
    once = standardize(_ds(list(X.T)))
    twice = standardize(once)
    assert np.allclose(once.values, twice.values, atol=1e-12, equal_nan=True)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_csv_round_trip(tmp_path_factory, seed):
    rng = np.random.default_rng(seed)
    n, p = int(rng.integers(2, 20)), int(rng.integers(1, 5))
    X = rng.normal(size=(n, p)) * 10.0 ** rng.integers(-8, 8, size=p)
    X[rng.random((n, p)) < 0.2] = np.nan
    d = Dataset.from_arrays(X, rng.normal(size=n), [f"c{j}" for j in range(p)],
                            row_labels=[f"r{i}" for i in range(n)])
    path = tmp_path_factory.mktemp("rt") / "d.csv"
    save_csv(d, path)
    back = load_csv(path, "y")
    assert list(back.column_names) == list(d.column_names)
    assert back.row_labels == d.row_labels
    assert np.array_equal(back.values, d.values, equal_nan=True)


def test_select_keeps_response(fixture_data):
    s = fixture_data.select(["FAO", "MSP"])
    assert s.predictor_names == ["FAO", "MSP"]
    assert np.array_equal(s.y, fixture_data.y)
