"""Feature importance for fitted boosted ensembles.

Three measures, each reported raw and rescaled so the top feature scores 100:

* selection frequency: how often a feature is chosen for a split;
* split importance: summed squared-error improvement of those splits,
  averaged over trees;
* permutation importance: mean increase in an error metric after shuffling
  one column, ``-(P_b - P_s)`` clipped at zero.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import _rng
from .dataset import Dataset
from .gbm import ArityMismatch, GBMModel

METHODS = ("frequency", "split", "permutation")
METRICS = ("mse", "rmse")


class NoSplitsInModel(ValueError):
    pass


@dataclass(frozen=True)
class ImportanceReport:
    method: str
    raw: dict
    scaled: dict
    metric: Optional[str] = None
    n_shuffles: Optional[int] = None
    seed: Optional[int] = None
    extra: dict = field(default_factory=dict, compare=False)

    def ranked(self) -> list:
        """Rows sorted by scaled score; tied scores share the lower rank number."""
        order = sorted(self.raw, key=lambda f: -self.scaled[f])
        rows = []
        prev, prev_rank = None, 0
        for pos, f in enumerate(order, start=1):
            rank = prev_rank if self.scaled[f] == prev else pos
            rows.append({"feature": f, "raw": self.raw[f], "scaled": self.scaled[f], "rank": rank})
            prev, prev_rank = self.scaled[f], rank
        return rows

    def rank_of(self, feature: str) -> int:
        return next(r["rank"] for r in self.ranked() if r["feature"] == feature)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "metric": self.metric,
            "n_shuffles": self.n_shuffles,
            "seed": self.seed,
            "scores": self.ranked(),
        }


def rescale(raw: dict) -> dict:
    """``100 * raw / max(raw)``; all zeros when nothing is positive."""
    top = max(raw.values()) if raw else 0.0
    if not top > 0:
        return {f: 0.0 for f in raw}
    # divide first so the top score is exactly 100
    return {f: 100.0 * (v / top) for f, v in raw.items()}


def _split_arrays(model: GBMModel):
    feat = model.forest["feature"]
    used = feat >= 0
    return feat[used], model.forest["improvement"][used]


def selection_frequency(model: GBMModel) -> ImportanceReport:
    feats, _ = _split_arrays(model)
    if feats.shape[0] == 0:
        raise NoSplitsInModel("every tree in the model is a single leaf")
    counts = np.bincount(feats, minlength=model.n_features)
    raw = {name: float(counts[j]) for j, name in enumerate(model.feature_names)}
    return ImportanceReport("frequency", raw, rescale(raw))


def split_importance(model: GBMModel) -> ImportanceReport:
    """Summed split improvements per feature divided by the number of trees."""
    feats, imps = _split_arrays(model)
    if feats.shape[0] == 0:
        raise NoSplitsInModel("every tree in the model is a single leaf")
    assert (imps > 0).all(), "zero-improvement split in a fitted model"
    totals = np.bincount(feats, weights=imps, minlength=model.n_features)
    raw = {name: float(totals[j] / model.n_trees) for j, name in enumerate(model.feature_names)}
    return ImportanceReport("split", raw, rescale(raw))


def _metric(pred, y, metric):
    m = float(np.mean((y - pred) ** 2))
    return float(np.sqrt(m)) if metric == "rmse" else m


def permutation_importance(model: GBMModel, dataset: Dataset, metric: str = "mse",
                           n_shuffles: int = 10, seed: int = 0) -> ImportanceReport:
    """Mean degradation of ``metric`` when each predictor column is shuffled.

    Shuffle ``s`` of feature ``j`` uses the permutation stream
    ``(seed, j, s)``, so results do not depend on evaluation order.
    Missing cells move with their column.
    """
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")
    if n_shuffles < 1:
        raise ValueError("n_shuffles must be >= 1")
    if list(dataset.predictor_names) != list(model.feature_names):
        raise ArityMismatch(
            f"dataset predictors {dataset.predictor_names} do not match model {model.feature_names}")
    X = np.ascontiguousarray(dataset.X)
    y = dataset.y
    n = X.shape[0]
    base = _metric(model.predict(X), y, metric)
    raw, shuffled = {}, {}
    for j, name in enumerate(model.feature_names):
        stack = np.tile(X, (n_shuffles, 1))
        for s in range(n_shuffles):
            perm = _rng.permutation(seed, j, s, n)
            stack[s * n:(s + 1) * n, j] = X[perm, j]
        pred = model.predict(stack).reshape(n_shuffles, n)
        scores = [_metric(pred[s], y, metric) for s in range(n_shuffles)]
        shuffled[name] = scores
        raw[name] = max(0.0, -(base - float(np.mean(scores))))
    return ImportanceReport("permutation", raw, rescale(raw), metric, n_shuffles, seed,
                            extra={"base_score": base, "shuffled_scores": shuffled})


def write_json(reports, path) -> None:
    """One report as an object, several as a list, in the order given."""
    if isinstance(reports, ImportanceReport):
        doc = reports.to_dict()
    else:
        doc = [r.to_dict() for r in reports]
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def write_csv(reports, path) -> None:
    if isinstance(reports, ImportanceReport):
        reports = [reports]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "metric", "n_shuffles", "seed", "feature", "raw", "scaled", "rank"])
        for r in reports:
            for row in r.ranked():
                w.writerow([r.method, r.metric or "", "" if r.n_shuffles is None else r.n_shuffles,
                            "" if r.seed is None else r.seed,
                            row["feature"], repr(row["raw"]), repr(row["scaled"]), row["rank"]])
