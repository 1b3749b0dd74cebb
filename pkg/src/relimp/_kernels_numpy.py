"""Pure-numpy kernels mirroring ``_kernels_numba`` signature for signature.

Split search is vectorized over candidate cuts; sums use ``np.cumsum``
(sequential) rather than ``np.sum`` (pairwise) to track the numba path.
"""

import numpy as np

from . import _rng

IMPROVEMENT_RTOL = 1e-12
TIE_RTOL = 1e-12


def _seqsum(a):
    return float(np.cumsum(a)[-1]) if a.shape[0] else 0.0


def subsample(seed, stage, n, k, idx):
    idx[:k] = _rng.subsample_indices(seed, stage, n, k)


def split_feature(X, r, seg, f, min_leaf, total, base, floor):
    n = seg.shape[0]
    x = X[seg, f]
    rr = r[seg]
    miss = np.isnan(x)
    cm = int(miss.sum())
    sm = _seqsum(rr[miss])
    xv = x[~miss]
    rv = rr[~miss]
    nn = xv.shape[0]
    if nn < 2:
        return -np.inf, np.nan, True
    order = np.argsort(xv, kind="stable")
    xs = xv[order]
    prefix = np.cumsum(rv[order])[:-1]
    cut = np.nonzero(xs[:-1] < xs[1:])[0]
    if cut.shape[0] == 0:
        return -np.inf, np.nan, True
    a = xs[cut]
    b = xs[cut + 1]
    thr = 0.5 * (a + b)
    thr = np.where(thr >= b, a, thr)
    nl = cut + 1
    acc = prefix[cut]

    # column 0: missing left, column 1: missing right
    n_left = np.stack([nl + cm, nl], axis=1)
    n_right = n - n_left
    sl = np.stack([acc + sm, acc], axis=1)
    sr = total - sl
    ok = (n_left >= min_leaf) & (n_right >= min_leaf)
    with np.errstate(divide="ignore", invalid="ignore"):
        imp = sl * sl / n_left + sr * sr / n_right - base
    imp = np.where(ok, imp, -np.inf).ravel()
    hit = np.nonzero(imp >= floor)[0]
    j = int(hit[0]) if hit.shape[0] else int(np.argmax(imp))
    if imp[j] == -np.inf:
        return -np.inf, np.nan, True
    return float(imp[j]), float(thr[j // 2]), j % 2 == 0


def node_best_split(X, r, seg, min_leaf):
    n = seg.shape[0]
    if n < 2 * min_leaf:
        return -1, np.nan, True, 0.0
    rr = r[seg]
    total = _seqsum(rr)
    sq = _seqsum(rr * rr)
    base = total * total / n
    best = max(split_feature(X, r, seg, f, min_leaf, total, base, np.inf)[0]
               for f in range(X.shape[1]))
    if not (best > IMPROVEMENT_RTOL * sq) or best <= 0.0:
        return -1, np.nan, True, 0.0
    floor = best - TIE_RTOL * sq
    for f in range(X.shape[1]):
        imp, thr, ml = split_feature(X, r, seg, f, min_leaf, total, base, floor)
        if imp >= floor:
            return f, thr, ml, imp
    return -1, np.nan, True, 0.0


def grow_tree(X, r, rows, max_leaves, min_leaf, scale,
              feature, threshold, missing_left, improvement, left, right, value, count):
    feature[:] = -1
    threshold[:] = np.nan
    missing_left[:] = True
    improvement[:] = 0.0
    left[:] = -1
    right[:] = -1
    value[:] = 0.0
    count[:] = 0

    segs = [np.asarray(rows, dtype=np.int64)]
    cand = [node_best_split(X, r, segs[0], min_leaf)]
    leaves = [0]
    while len(leaves) < max_leaves:
        pick, best = -1, 0.0
        for j in sorted(leaves):
            if cand[j][0] >= 0 and cand[j][3] > best:
                pick, best = j, cand[j][3]
        if pick < 0:
            break
        f, thr, ml, imp = cand[pick]
        seg = segs[pick]
        x = X[seg, f]
        go_left = np.where(np.isnan(x), ml, x <= thr)
        lc, rc = len(segs), len(segs) + 1
        feature[pick] = f
        threshold[pick] = thr
        missing_left[pick] = ml
        improvement[pick] = imp
        left[pick] = lc
        right[pick] = rc
        for child in (seg[go_left], seg[~go_left]):
            segs.append(child)
            cand.append(node_best_split(X, r, child, min_leaf))
        leaves.remove(pick)
        leaves.extend([lc, rc])

    # internal nodes hold their rows as left-then-right, as the numba partition does
    for j in range(len(segs) - 1, -1, -1):
        if feature[j] >= 0:
            segs[j] = np.concatenate([segs[left[j]], segs[right[j]]])
    for j, seg in enumerate(segs):
        cnt = seg.shape[0]
        count[j] = cnt
        value[j] = scale * (_seqsum(r[seg]) / cnt) if cnt else 0.0
    return len(segs)


def _route_many(feature, threshold, missing_left, left, right, X):
    """Leaf index per (tree, row); node arrays are ``(m, nodes)``."""
    m = feature.shape[0]
    n = X.shape[0]
    node = np.zeros((m, n), dtype=np.int64)
    tix = np.arange(m)[:, None]
    rix = np.arange(n)[None, :]
    while True:
        f = feature[tix, node]
        active = f >= 0
        if not active.any():
            return node
        x = X[rix, np.where(active, f, 0)]
        nan = np.isnan(x)
        go_left = np.where(nan, missing_left[tix, node], x <= threshold[tix, node])
        nxt = np.where(go_left, left[tix, node], right[tix, node])
        node = np.where(active, nxt, node)


def route(feature, threshold, missing_left, left, right, X, i):
    leaf = _route_many(feature[None], threshold[None], missing_left[None],
                       left[None], right[None], X[i:i + 1])
    return int(leaf[0, 0])


def predict_tree(feature, threshold, missing_left, left, right, value, X):
    leaf = _route_many(feature[None], threshold[None], missing_left[None],
                       left[None], right[None], X)[0]
    return value[leaf]


def predict_forest(baseline, feature, threshold, missing_left, left, right, value, X,
                   chunk=2048):
    out = np.full(X.shape[0], float(baseline))
    m = feature.shape[0]
    for s in range(0, m, chunk):
        sl = slice(s, min(s + chunk, m))
        leaf = _route_many(feature[sl], threshold[sl], missing_left[sl],
                           left[sl], right[sl], X)
        vals = np.take_along_axis(value[sl], leaf, axis=1)
        for v in vals:
            out += v
    return out


def boost(X, y, n_trees, learn_rate, k, max_leaves, min_leaf, seed, trace_iters,
          feature, threshold, missing_left, improvement, left, right, value, count,
          trace_mse):
    n = y.shape[0]
    baseline = _seqsum(y) / n
    F = np.full(n, baseline)
    idx = np.arange(n, dtype=np.int64)
    pos = 0
    if trace_iters.shape[0] and trace_iters[0] == 0:
        trace_mse[0] = _seqsum((y - F) ** 2) / n
        pos = 1
    for m in range(n_trees):
        if k < n:
            subsample(seed, m + 1, n, k, idx)
        r = y - F
        grow_tree(X, r, idx[:k], max_leaves, min_leaf, learn_rate,
                  feature[m], threshold[m], missing_left[m], improvement[m],
                  left[m], right[m], value[m], count[m])
        F += predict_tree(feature[m], threshold[m], missing_left[m], left[m], right[m],
                          value[m], X)
        if pos < trace_iters.shape[0] and trace_iters[pos] == m + 1:
            trace_mse[pos] = _seqsum((y - F) ** 2) / n
            pos += 1
    return baseline
