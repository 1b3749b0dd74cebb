"""Least-squares regression trees grown best-first with learned missing-value routing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from ._backend import get_kernels


class EmptyRowSet(ValueError):
    pass


class Split(NamedTuple):
    threshold: float
    improvement: float
    missing_goes_left: bool


class SplitRecord(NamedTuple):
    feature_index: int
    threshold: float
    improvement: float
    missing_goes_left: bool


def empty_node_arrays(max_leaves: int, m: Optional[int] = None) -> dict:
    """Allocate node arrays for one tree (``m is None``) or a stack of ``m`` trees."""
    shape = (2 * max_leaves - 1,) if m is None else (m, 2 * max_leaves - 1)
    return {
        "feature": np.full(shape, -1, dtype=np.int64),
        "threshold": np.full(shape, np.nan),
        "missing_left": np.ones(shape, dtype=np.bool_),
        "improvement": np.zeros(shape),
        "left": np.full(shape, -1, dtype=np.int64),
        "right": np.full(shape, -1, dtype=np.int64),
        "value": np.zeros(shape),
        "count": np.zeros(shape, dtype=np.int64),
    }


NODE_FIELDS = ("feature", "threshold", "missing_left", "improvement", "left", "right", "value", "count")
_ROUTE_FIELDS = ("feature", "threshold", "missing_left", "left", "right")


@dataclass(frozen=True)
class RegressionTree:
    """Binary tree stored as parallel node arrays; node 0 is the root.

    Internal nodes have ``feature >= 0``; leaves carry ``value`` and
    ``count`` (training rows that reached them).
    """

    feature: np.ndarray
    threshold: np.ndarray
    missing_left: np.ndarray
    improvement: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    count: np.ndarray

    @classmethod
    def from_arrays(cls, arrays: dict, n_nodes: Optional[int] = None) -> "RegressionTree":
        sl = slice(None) if n_nodes is None else slice(0, n_nodes)
        return cls(**{k: np.asarray(arrays[k])[sl] for k in NODE_FIELDS})

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    @property
    def is_leaf(self) -> np.ndarray:
        return self.feature < 0

    @property
    def n_leaves(self) -> int:
        return int(self.is_leaf.sum())

    def splits(self) -> list:
        """Executed splits in node order."""
        return [
            SplitRecord(int(self.feature[j]), float(self.threshold[j]),
                        float(self.improvement[j]), bool(self.missing_left[j]))
            for j in range(self.n_nodes) if self.feature[j] >= 0
        ]

    def leaves(self) -> list:
        return [(float(self.value[j]), int(self.count[j])) for j in range(self.n_nodes) if self.feature[j] < 0]

    def predict(self, X) -> np.ndarray:
        X = _as_matrix(X)
        k = get_kernels()
        return k.predict_tree(*(getattr(self, f) for f in _ROUTE_FIELDS), self.value, X)

    def apply(self, X) -> np.ndarray:
        """Leaf node index reached by every row of ``X``."""
        X = _as_matrix(X)
        k = get_kernels()
        args = [getattr(self, f) for f in _ROUTE_FIELDS]
        return np.array([k.route(*args, X, i) for i in range(X.shape[0])], dtype=np.int64)

    def to_dict(self, node: int = 0) -> dict:
        if self.feature[node] < 0:
            return {"value": float(self.value[node]), "count": int(self.count[node])}
        return {
            "feature": int(self.feature[node]),
            "threshold": float(self.threshold[node]),
            "missing_goes_left": bool(self.missing_left[node]),
            "improvement": float(self.improvement[node]),
            "left": self.to_dict(int(self.left[node])),
            "right": self.to_dict(int(self.right[node])),
            # internal-node count kept so a reloaded tree is complete
            "count": int(self.count[node]),
            "node_value": float(self.value[node]),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RegressionTree":
        """Rebuild from :meth:`to_dict` output; nodes are renumbered breadth-first."""
        flat = []
        queue = [d]
        while queue:
            node = queue.pop(0)
            flat.append(node)
            if "feature" in node:
                queue.extend([node["left"], node["right"]])
        a = empty_node_arrays((len(flat) + 1) // 2)
        ids = {id(node): j for j, node in enumerate(flat)}
        for j, node in enumerate(flat):
            if "feature" in node:
                a["feature"][j] = node["feature"]
                a["threshold"][j] = node["threshold"]
                a["missing_left"][j] = node["missing_goes_left"]
                a["improvement"][j] = node["improvement"]
                a["left"][j] = ids[id(node["left"])]
                a["right"][j] = ids[id(node["right"])]
                a["value"][j] = node.get("node_value", 0.0)
            else:
                a["value"][j] = node["value"]
            a["count"][j] = node.get("count", 0)
        return cls.from_arrays(a)


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    return np.ascontiguousarray(X)


def best_split(x, targets, min_obs_leaf: int = 1) -> Optional[Split]:
    """Best least-squares cut of a single feature vector.

    ``x`` may contain NaN; those rows go to whichever side improves more.
    Returns ``None`` when no legal cut has positive improvement.
    """
    x = np.asarray(x, dtype=np.float64)
    rec = best_split_all(x[:, None], targets, min_obs_leaf)
    if rec is None:
        return None
    return Split(rec.threshold, rec.improvement, rec.missing_goes_left)


def best_split_all(X, targets, min_obs_leaf: int = 1, rows=None) -> Optional[SplitRecord]:
    """Best cut over every column of ``X`` restricted to ``rows`` (default: all).

    Ties go to the lowest feature index, then the lowest threshold, then
    missing-left.
    """
    X = _as_matrix(X) if np.ndim(X) == 2 else _as_matrix(np.asarray(X)[:, None])
    r = np.ascontiguousarray(targets, dtype=np.float64)
    seg = np.arange(X.shape[0], dtype=np.int64) if rows is None else np.asarray(rows, dtype=np.int64)
    f, thr, ml, imp = get_kernels().node_best_split(X, r, seg, int(min_obs_leaf))
    if f < 0:
        return None
    return SplitRecord(int(f), float(thr), float(imp), bool(ml))


def grow_tree(X, targets, rows=None, max_leaves: int = 6, min_obs_leaf: int = 1,
              scale: float = 1.0) -> RegressionTree:
    """Grow a tree on ``rows`` of ``(X, targets)`` by repeatedly splitting the best leaf.

    Parameters
    ----------
    X : array, shape (n, p)
        Predictors; NaN marks missing.
    targets : array, shape (n,)
    rows : array of int, optional
        Training subset; defaults to every row.
    max_leaves : int
        Cap on terminal nodes.
    min_obs_leaf : int
        Minimum training rows per leaf.
    scale : float
        Multiplier applied to every leaf mean (the boosting shrinkage).
    """
    X = _as_matrix(X)
    r = np.ascontiguousarray(targets, dtype=np.float64)
    seg = np.arange(X.shape[0], dtype=np.int64) if rows is None else np.asarray(rows, dtype=np.int64)
    if seg.shape[0] == 0 or seg.shape[0] < min_obs_leaf:
        raise EmptyRowSet(f"need at least max(1, min_obs_leaf={min_obs_leaf}) rows, got {seg.shape[0]}")
    if max_leaves < 1 or min_obs_leaf < 1:
        raise ValueError("max_leaves and min_obs_leaf must be >= 1")
    a = empty_node_arrays(max_leaves)
    n_nodes = get_kernels().grow_tree(X, r, seg, int(max_leaves), int(min_obs_leaf), float(scale),
                                      *(a[f] for f in NODE_FIELDS))
    return RegressionTree.from_arrays(a, int(n_nodes))


def predict_tree(tree: RegressionTree, row) -> float:
    """Value of the leaf reached by a single predictor vector."""
    return float(tree.predict(np.asarray(row, dtype=np.float64)[None, :])[0])
