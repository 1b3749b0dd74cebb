"""Hybrid econometric / boosted-tree relative importance analysis."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .dataset import Dataset, load_csv, save_csv, standardize, yoy_transform
from .econometrics import (dominance_analysis, ols_fit, relative_weights,
                           significant_features, usefulness)
from .gbm import GBMConfig, GBMModel, fit_gbm, predict, r_squared
from .importance import (ImportanceReport, permutation_importance, selection_frequency,
                         split_importance)
from .pdp import PDPCurve, partial_dependence
from .tree import RegressionTree, best_split, grow_tree, predict_tree

__all__ = [
    "BACKEND", "Dataset", "load_csv", "save_csv", "standardize", "yoy_transform",
    "dominance_analysis", "ols_fit", "relative_weights", "significant_features", "usefulness",
    "GBMConfig", "GBMModel", "fit_gbm", "predict", "r_squared",
    "ImportanceReport", "permutation_importance", "selection_frequency", "split_importance",
    "PDPCurve", "partial_dependence",
    "RegressionTree", "best_split", "grow_tree", "predict_tree",
]
