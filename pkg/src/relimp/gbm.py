"""Stochastic gradient boosting of regression trees under squared-error loss.

Each stage fits a best-first tree to the current residuals on a subsample
drawn without replacement, and folds the learning rate into the leaf
values. With mean-valued leaves the per-leaf line search is exact, so the
step length is always 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ._backend import get_kernels
from .dataset import Dataset
from .tree import NODE_FIELDS, RegressionTree, empty_node_arrays


class InvalidConfig(ValueError):
    pass


class SubsampleTooSmall(ValueError):
    pass


class ArityMismatch(ValueError):
    pass


class ZeroVarianceResponse(ValueError):
    pass


@dataclass(frozen=True)
class GBMConfig:
    """Boosting hyperparameters. Defaults are the food-inflation case-study settings."""

    n_trees: int = 50_000
    learn_rate: float = 0.0001
    subsample_fraction: float = 0.95
    max_leaves: int = 6
    min_obs_leaf: int = 3
    seed: int = 0
    mse_trace_stride: int = 100

    def __post_init__(self):
        if self.n_trees < 1:
            raise InvalidConfig("n_trees must be >= 1")
        if not 0 < self.learn_rate <= 1:
            raise InvalidConfig("learn_rate must be in (0, 1]")
        if not 0 < self.subsample_fraction <= 1:
            raise InvalidConfig("subsample_fraction must be in (0, 1]")
        if self.max_leaves < 1 or self.min_obs_leaf < 1:
            raise InvalidConfig("max_leaves and min_obs_leaf must be >= 1")
        if self.mse_trace_stride < 1:
            raise InvalidConfig("mse_trace_stride must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise InvalidConfig("seed must fit in an unsigned 64-bit integer")

    def subsample_size(self, n_rows: int) -> int:
        # round half up; Python's round() is banker's rounding
        return int(math.floor(self.subsample_fraction * n_rows + 0.5))


def trace_iterations(n_trees: int, stride: int) -> np.ndarray:
    its = list(range(0, n_trees + 1, stride))
    if its[-1] != n_trees:
        its.append(n_trees)
    return np.asarray(its, dtype=np.int64)


@dataclass
class GBMModel:
    baseline: float
    forest: dict
    config: GBMConfig
    mse_trace: list
    feature_names: list
    extra: dict = field(default_factory=dict)

    @property
    def n_trees(self) -> int:
        return int(self.forest["feature"].shape[0])

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def tree(self, m: int) -> RegressionTree:
        n_nodes = int((self.forest["count"][m] > 0).sum())
        return RegressionTree.from_arrays({k: self.forest[k][m] for k in NODE_FIELDS}, n_nodes)

    @property
    def trees(self) -> list:
        return [self.tree(m) for m in range(self.n_trees)]

    def predict(self, X) -> np.ndarray:
        """Predictions for a matrix of rows (or a single row)."""
        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 1
        if single:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise ArityMismatch(f"expected {self.n_features} predictors, got {X.shape[1]}")
        f = self.forest
        out = get_kernels().predict_forest(
            float(self.baseline), f["feature"], f["threshold"], f["missing_left"],
            f["left"], f["right"], f["value"], np.ascontiguousarray(X))
        return out[0] if single else out

    # persistence

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "baseline": float(self.baseline),
            "feature_names": list(self.feature_names),
            "trees": [t.to_dict() for t in self.trees],
            "mse_trace": [[int(i), float(v)] for i, v in self.mse_trace],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GBMModel":
        config = GBMConfig(**d["config"])
        forest = empty_node_arrays(config.max_leaves, len(d["trees"]))
        for m, td in enumerate(d["trees"]):
            t = RegressionTree.from_dict(td)
            for k in NODE_FIELDS:
                forest[k][m, :t.n_nodes] = getattr(t, k)
        return cls(float(d["baseline"]), forest, config,
                   [(int(i), float(v)) for i, v in d["mse_trace"]], list(d["feature_names"]))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), separators=(",", ":")))

    @classmethod
    def load(cls, path) -> "GBMModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def fit_gbm(dataset: Dataset, config: Optional[GBMConfig] = None) -> GBMModel:
    """Fit the boosted ensemble to every predictor of ``dataset``.

    Stage ``m`` (1-based) draws ``round(f * n)`` rows without replacement
    from the stream keyed by ``(seed, m)``, fits a tree to the residuals
    ``y - F_{m-1}`` on those rows, and adds the learning-rate-scaled leaf
    means to every row's fit. Full-sample training MSE is recorded at
    iteration 0, every ``mse_trace_stride`` stages, and at the end.
    """
    config = config or GBMConfig()
    X = np.ascontiguousarray(dataset.X, dtype=np.float64)
    y = np.ascontiguousarray(dataset.y, dtype=np.float64)
    n = y.shape[0]
    k = config.subsample_size(n)
    if k < max(1, 2 * config.min_obs_leaf) and config.max_leaves > 1:
        raise SubsampleTooSmall(
            f"subsample of {k} rows cannot hold two leaves of {config.min_obs_leaf}")
    if k < 1:
        raise SubsampleTooSmall("subsample is empty")

    forest = empty_node_arrays(config.max_leaves, config.n_trees)
    iters = trace_iterations(config.n_trees, config.mse_trace_stride)
    mse = np.zeros(iters.shape[0])
    baseline = get_kernels().boost(
        X, y, int(config.n_trees), float(config.learn_rate), int(k),
        int(config.max_leaves), int(config.min_obs_leaf), np.uint64(config.seed), iters,
        *(forest[f] for f in NODE_FIELDS), mse)
    trace = [(int(i), float(v)) for i, v in zip(iters, mse)]
    return GBMModel(float(baseline), forest, config, trace, list(dataset.predictor_names))


def predict(model: GBMModel, row) -> float:
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1:
        raise ArityMismatch("predict takes a single row; use GBMModel.predict for matrices")
    return float(model.predict(row))


def _check_columns(model: GBMModel, dataset: Dataset) -> None:
    if list(dataset.predictor_names) != list(model.feature_names):
        raise ArityMismatch(
            f"dataset predictors {dataset.predictor_names} do not match model {model.feature_names}")


def mse(model: GBMModel, dataset: Dataset) -> float:
    _check_columns(model, dataset)
    return float(np.mean((dataset.y - model.predict(dataset.X)) ** 2))


def r_squared(model: GBMModel, dataset: Dataset) -> float:
    """``1 - SSE / SST`` of the model's fit to ``dataset``."""
    _check_columns(model, dataset)
    y = dataset.y
    sst = float(np.sum((y - y.mean()) ** 2))
    if sst == 0.0:
        raise ZeroVarianceResponse("response has zero variance")
    sse = float(np.sum((y - model.predict(dataset.X)) ** 2))
    return 1.0 - sse / sst


def flatline_iteration(trace, rel_tol: float = 0.05) -> Optional[int]:
    """First traced iteration after which MSE never drops by more than ``rel_tol`` of its value."""
    its = [i for i, _ in trace]
    vals = np.array([v for _, v in trace])
    final = vals[-1]
    for j, v in enumerate(vals):
        if v <= final * (1 + rel_tol):
            return its[j]
    return None
