"""Time the numba kernels against the pure-numpy fallback.

Both kernel modules are imported directly, so ``RELIMP_BACKEND`` does not
matter here. numba compile time is reported separately from the warm runs.

    python3 benchmarks/bench_backends.py --trees 5000 --repeat 3
"""

import argparse
import time

import numpy as np

from relimp import _kernels_numpy
from relimp.dataset import load_csv
from relimp.gbm import GBMConfig, empty_node_arrays, trace_iterations
from relimp.pipeline import default_fixture
from relimp.tree import NODE_FIELDS

try:
    from relimp import _kernels_numba
    import numba  # noqa: F401
except ImportError:
    _kernels_numba = None

ROUTE = ("feature", "threshold", "missing_left", "left", "right", "value")


def fit(kernels, X, y, cfg):
    forest = empty_node_arrays(cfg.max_leaves, cfg.n_trees)
    its = trace_iterations(cfg.n_trees, cfg.mse_trace_stride)
    trace = np.zeros(its.shape[0])
    base = kernels.boost(X, y, cfg.n_trees, cfg.learn_rate, cfg.subsample_size(len(y)),
                         cfg.max_leaves, cfg.min_obs_leaf, np.uint64(cfg.seed), its,
                         *(forest[f] for f in NODE_FIELDS), trace)
    return base, forest


def timed(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--input", default=None, help="CSV (default: bundled fixture)")
    ap.add_argument("--response", default="FCPI")
    ap.add_argument("--trees", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--predict-rows", type=int, default=2500,
                    help="rows in the prediction benchmark (PDP/permutation sized)")
    a = ap.parse_args(argv)

    d = load_csv(a.input or default_fixture(), a.response)
    X = np.ascontiguousarray(d.X)
    y = np.ascontiguousarray(d.y)
    cfg = GBMConfig(n_trees=a.trees)
    rng = np.random.default_rng(0)
    Xp = np.ascontiguousarray(X[rng.integers(0, len(y), a.predict_rows)])

    rows = []
    results = {}
    for name, k in (("numba", _kernels_numba), ("numpy", _kernels_numpy)):
        if k is None:
            print("numba not installed; skipping its rows")
            continue
        compile_s = None
        if name == "numba":
            t0 = time.perf_counter()
            fit(k, X, y, GBMConfig(n_trees=2))
            base, forest = fit(k, X, y, GBMConfig(n_trees=2))
            k.predict_forest(base, *(forest[f] for f in ROUTE), Xp)
            compile_s = time.perf_counter() - t0
        t_fit, (base, forest) = timed(lambda: fit(k, X, y, cfg), a.repeat)
        t_pred, pred = timed(lambda: k.predict_forest(base, *(forest[f] for f in ROUTE), Xp),
                             a.repeat)
        results[name] = (forest, pred)
        rows.append((name, compile_s, t_fit, t_pred))

    print(f"{len(y)} rows x {X.shape[1]} predictors, {a.trees} trees, "
          f"predict on {a.predict_rows} rows; best of {a.repeat}")
    print(f"{'backend':<8}{'compile s':>11}{'fit s':>10}{'trees/s':>11}{'predict s':>11}")
    for name, c, tf, tp in rows:
        cs = f"{c:.2f}" if c is not None else "-"
        print(f"{name:<8}{cs:>11}{tf:>10.3f}{a.trees / tf:>11.0f}{tp:>11.3f}")
    if len(rows) == 2:
        print(f"speedup: fit x{rows[1][2] / rows[0][2]:.1f}, predict x{rows[1][3] / rows[0][3]:.1f}")
        fa, pa = results["numba"]
        fb, pb = results["numpy"]
        same = all(np.array_equal(fa[f], fb[f], equal_nan=True) for f in NODE_FIELDS)
        print(f"forests identical: {same}; predictions identical: {np.array_equal(pa, pb)}")


if __name__ == "__main__":
    main()
