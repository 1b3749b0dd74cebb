"""Classical regression-based relative importance.

OLS with t-test p-values, beta weights and zero-order correlations;
usefulness; general dominance over all submodels; and relative weights
via the symmetric (least-squares) orthogonalization of the predictors.
Rows with any missing cell are dropped before estimation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dataset import Dataset

MAX_DOMINANCE_PREDICTORS = 20


class RankDeficient(ValueError):
    def __init__(self, msg: str, subset: Optional[tuple] = None):
        super().__init__(msg)
        self.subset = subset


class InsufficientRows(ValueError):
    pass


class TooManyPredictors(ValueError):
    pass


# Student t tail

def _betacf(a: float, b: float, x: float, max_iter: int = 500, eps: float = 1e-16) -> float:
    # modified Lentz evaluation of the incomplete-beta continued fraction
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta ``I_x(a, b)``."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    lbt = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
           + a * math.log(x) + b * math.log1p(-x))
    bt = math.exp(lbt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def t_sf(t: float, df: float) -> float:
    """Upper tail ``P(T > t)`` of Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("df must be positive")
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    tail = 0.5 * betainc_reg(0.5 * df, 0.5, df / (df + t * t))
    return tail if t >= 0 else 1.0 - tail


def t_cdf(t: float, df: float) -> float:
    return 1.0 - t_sf(t, df) if t >= 0 else t_sf(-t, df)


def two_sided_p(t: float, df: float) -> float:
    return min(1.0, 2.0 * t_sf(abs(t), df))


# OLS

@dataclass(frozen=True)
class RegressionSummary:
    features: list
    coefficients: dict
    intercept: float
    std_errors: dict
    t_stats: dict
    p_values: dict
    beta_weights: dict
    zero_order_r: dict
    r_squared: float
    n_used: int
    dropped_rows: list
    df_resid: int = 0
    extra: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {
            "response": self.extra.get("response"),
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "n_used": self.n_used,
            "df_resid": self.df_resid,
            "dropped_rows": list(self.dropped_rows),
            "features": [
                {
                    "feature": f,
                    "coefficient": self.coefficients[f],
                    "std_error": self.std_errors[f],
                    "t_stat": self.t_stats[f],
                    "p_value": self.p_values[f],
                    "beta_weight": self.beta_weights[f],
                    "zero_order_r": self.zero_order_r[f],
                }
                for f in self.features
            ],
        }


def complete_cases(dataset: Dataset, predictors: Optional[Sequence[str]] = None):
    """``(X, y, dropped_row_indices)`` after listwise deletion over ``predictors`` and the response."""
    names = list(dataset.predictor_names if predictors is None else predictors)
    cols = [dataset.column_names.index(p) for p in names]
    X = dataset.values[:, cols]
    y = dataset.y
    bad = np.isnan(X).any(axis=1)
    return X[~bad], y[~bad], [int(i) for i in np.nonzero(bad)[0]]


def _design(X):
    return np.column_stack([np.ones(X.shape[0]), X])


def _check_rank(A, subset=None):
    if np.linalg.matrix_rank(A) < A.shape[1]:
        where = f" (subset {subset})" if subset is not None else ""
        raise RankDeficient(f"design matrix is rank deficient{where}", subset)


def _r2(X, y, subset=None) -> float:
    """R^2 of OLS with intercept on the columns of ``X`` (zero for no columns)."""
    if X.shape[1] == 0:
        return 0.0
    A = _design(X)
    _check_rank(A, subset)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    yc = y - y.mean()
    return 1.0 - float(resid @ resid) / float(yc @ yc)


def ols_fit(dataset: Dataset, predictors: Optional[Sequence[str]] = None) -> RegressionSummary:
    """Least squares with intercept, classical standard errors and two-sided t-test p-values."""
    names = list(dataset.predictor_names if predictors is None else predictors)
    X, y, dropped = complete_cases(dataset, names)
    n, p = X.shape
    if n <= p + 1:
        raise InsufficientRows(f"{n} complete rows for {p} predictors plus intercept")
    A = _design(X)
    _check_rank(A)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    df = n - p - 1
    sse = float(resid @ resid)
    yc = y - y.mean()
    sst = float(yc @ yc)
    if sst == 0.0:
        raise ValueError("response has zero variance over the complete rows")
    sigma2 = sse / df
    cov = sigma2 * np.linalg.inv(A.T @ A)
    se = np.sqrt(np.diag(cov))[1:]
    b = coef[1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, b / se, np.sign(b) * np.inf)
    sx = X.std(axis=0, ddof=1)
    sy = y.std(ddof=1)
    r = np.array([np.corrcoef(X[:, j], y)[0, 1] for j in range(p)])

    def m(vals):
        return {f: float(v) for f, v in zip(names, vals)}

    return RegressionSummary(
        features=names,
        coefficients=m(b),
        intercept=float(coef[0]),
        std_errors=m(se),
        t_stats=m(t),
        p_values=m([two_sided_p(float(tj), df) if not math.isnan(tj) else 1.0 for tj in t]),
        beta_weights=m(b * sx / sy),
        zero_order_r=m(r),
        r_squared=1.0 - sse / sst,
        n_used=n,
        dropped_rows=dropped,
        df_resid=df,
        extra={"response": dataset.response_name},
    )


def significant_features(summary: RegressionSummary, alpha: float = 0.05) -> list:
    """Features with ``p < alpha``, in original column order."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie strictly between 0 and 1")
    return [f for f in summary.features if summary.p_values[f] < alpha]


def usefulness(dataset: Dataset, feature: str) -> float:
    """R^2 lost when ``feature`` is dropped from the full model (same complete rows)."""
    names = dataset.predictor_names
    if feature not in names:
        raise KeyError(feature)
    X, y, _ = complete_cases(dataset)
    if X.shape[0] <= X.shape[1] + 1:
        raise InsufficientRows(f"{X.shape[0]} complete rows for {X.shape[1]} predictors plus intercept")
    j = names.index(feature)
    keep = [k for k in range(X.shape[1]) if k != j]
    return _r2(X, y) - _r2(X[:, keep], y)


@dataclass(frozen=True)
class DominanceResult:
    general_dominance: dict
    n_submodels: int
    full_r_squared: float

    def to_dict(self) -> dict:
        return {"full_r_squared": self.full_r_squared, "n_submodels": self.n_submodels,
                "general_dominance": dict(self.general_dominance)}


def dominance_analysis(dataset: Dataset) -> DominanceResult:
    """General dominance: mean R^2 gain from adding each predictor, averaged within and then across subset sizes."""
    names = dataset.predictor_names
    p = len(names)
    if p > MAX_DOMINANCE_PREDICTORS:
        raise TooManyPredictors(f"{p} predictors need {2 ** p - 1} submodels")
    X, y, _ = complete_cases(dataset)
    if X.shape[0] <= p + 1:
        raise InsufficientRows(f"{X.shape[0]} complete rows for {p} predictors plus intercept")
    r2 = {(): 0.0}
    for k in range(1, p + 1):
        for s in itertools.combinations(range(p), k):
            r2[s] = _r2(X[:, list(s)], y, tuple(names[i] for i in s))

    gd = {}
    for j in range(p):
        others = [i for i in range(p) if i != j]
        by_size = []
        for k in range(p):
            gains = [r2[tuple(sorted(s + (j,)))] - r2[s] for s in itertools.combinations(others, k)]
            by_size.append(sum(gains) / len(gains))
        gd[names[j]] = float(sum(by_size) / p)
    return DominanceResult(gd, 2 ** p - 1, r2[tuple(range(p))])


@dataclass(frozen=True)
class RelativeWeightsResult:
    epsilons: dict
    full_r_squared: float

    def to_dict(self) -> dict:
        return {"full_r_squared": self.full_r_squared, "epsilons": dict(self.epsilons)}


def relative_weights(dataset: Dataset) -> RelativeWeightsResult:
    """Relative weights from the closest orthonormal basis to the standardized predictors.

    With ``X = U S V'`` (columns standardized and scaled by ``1/sqrt(n-1)``),
    ``Z = U V'`` is orthonormal and ``X = Z L`` with ``L = V S V'``. The
    response is regressed on ``Z`` and each weight is
    ``eps_j = sum_k L[j, k]**2 * beta_k**2``.
    """
    names = dataset.predictor_names
    X, y, _ = complete_cases(dataset)
    n = X.shape[0]
    if n <= X.shape[1] + 1:
        raise InsufficientRows(f"{n} complete rows for {X.shape[1]} predictors plus intercept")
    sx = X.std(axis=0, ddof=1)
    if (sx == 0).any():
        raise RankDeficient("constant predictor column")
    Xs = (X - X.mean(axis=0)) / sx / math.sqrt(n - 1)
    ys = (y - y.mean()) / y.std(ddof=1) / math.sqrt(n - 1)
    U, S, Vt = np.linalg.svd(Xs, full_matrices=False)
    if S[-1] <= S[0] * X.shape[1] * np.finfo(float).eps:
        raise RankDeficient("standardized predictors are rank deficient")
    Z = U @ Vt
    L = Vt.T @ np.diag(S) @ Vt
    beta = Z.T @ ys
    eps = (L ** 2) @ (beta ** 2)
    return RelativeWeightsResult({f: float(e) for f, e in zip(names, eps)}, float(beta @ beta))
