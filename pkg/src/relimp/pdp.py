"""Centered univariate partial dependence for fitted ensembles."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import Dataset
from .gbm import GBMModel


class UnknownFeature(KeyError):
    pass


class AllMissingFeature(ValueError):
    pass


@dataclass(frozen=True)
class PDPCurve:
    feature: str
    grid: np.ndarray
    values: np.ndarray
    n_records_averaged: int


def make_grid(column, grid_size: int = 100) -> np.ndarray:
    """Distinct observed values if there are at most ``grid_size``, else an even grid over the range."""
    col = np.asarray(column, dtype=np.float64)
    obs = np.unique(col[~np.isnan(col)])
    if obs.shape[0] == 0:
        raise AllMissingFeature("feature has no observed values")
    if obs.shape[0] <= grid_size:
        return obs
    return np.linspace(obs[0], obs[-1], grid_size)


def ice_curves(model: GBMModel, dataset: Dataset, feature: str, grid) -> np.ndarray:
    """Predictions with ``feature`` set to each grid value; shape ``(len(grid), n_rows)``."""
    if feature not in model.feature_names:
        raise UnknownFeature(feature)
    j = model.feature_names.index(feature)
    X = np.ascontiguousarray(dataset.X)
    g = np.asarray(grid, dtype=np.float64)
    stack = np.tile(X, (g.shape[0], 1))
    stack[:, j] = np.repeat(g, X.shape[0])
    return model.predict(stack).reshape(g.shape[0], X.shape[0])


def partial_dependence(model: GBMModel, dataset: Dataset, feature: str,
                       grid_size: int = 100) -> PDPCurve:
    """Average the per-record curves over all rows of ``dataset``, then subtract the curve mean.

    Rows with other cells missing still take part; missing values of
    ``feature`` itself only drop out of the grid.
    """
    if feature not in model.feature_names:
        raise UnknownFeature(feature)
    grid = make_grid(dataset.column(feature), grid_size)
    ice = ice_curves(model, dataset, feature, grid)
    avg = ice.mean(axis=1)
    return PDPCurve(feature, grid, avg - avg.mean(), int(ice.shape[1]))


def write_curve_csv(curve: PDPCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["grid_value", "centered_dependence"])
        for g, v in zip(curve.grid, curve.values):
            w.writerow([repr(float(g)), repr(float(v))])


def write_panel_svg(curves: Sequence[PDPCurve], path, ncols: int = 4) -> None:
    """All curves in one SVG, one subplot per feature, on a shared vertical scale."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "relimp-pdp"
    n = len(curves)
    ncols = min(ncols, n)
    nrows = -(-n // ncols)
    fig, axes = plt.subplots(nrows, ncols, figsize=(3.2 * ncols, 2.6 * nrows),
                             sharey=True, squeeze=False)
    for ax, c in zip(axes.ravel(), curves):
        ax.plot(c.grid, c.values, drawstyle="steps-post", lw=1.4)
        ax.axhline(0.0, color="0.7", lw=0.6)
        ax.set_title(c.feature, fontsize=10)
    for ax in axes.ravel()[n:]:
        ax.set_visible(False)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
