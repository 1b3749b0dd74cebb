import sys

import numpy as np
import pytest

from relimp.dataset import Dataset, load_csv
from relimp.pipeline import default_fixture

FIXTURE = default_fixture()


@pytest.fixture(scope="session")
def fixture_path():
    if FIXTURE is None:
        pytest.skip("fixture CSV not present")
    return FIXTURE


@pytest.fixture(scope="session")
def fixture_data(fixture_path):
    return load_csv(fixture_path, "FCPI")


def signal_dataset(seed, n=40, p=3, noise=0.3):
    """y depends on the first two columns; the rest is noise."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    y = 2.0 * X[:, 0] + np.where(X[:, 1] > 0, 1.0, -1.0) + noise * rng.normal(size=n)
    return Dataset.from_arrays(X, y, [f"x{j + 1}" for j in range(p)])


def write_text(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
