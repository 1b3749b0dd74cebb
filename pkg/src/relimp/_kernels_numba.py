"""numba kernels for tree growth, routing and the boosting loop.

Array conventions shared with ``_kernels_numpy``:

* ``X`` is ``(n, p)`` float64 with NaN for missing cells.
* A tree is eight parallel node arrays (feature, threshold, missing_left,
  improvement, left, right, value, count); ``feature == -1`` marks a leaf
  and node 0 is the root.
* All reductions run sequentially in row order so the two backends agree
  to the last bit wherever possible.
"""

import numpy as np

from ._backend import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)

# relative floor below which an SSE reduction is treated as rounding noise
IMPROVEMENT_RTOL = 1e-12
# improvements this close (relative to the node's sum of squares) are ties
TIE_RTOL = 1e-12


@njit
def mix64(x):
    z = x + _GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit
def subsample(seed, stage, n, k, idx):
    """Partial Fisher-Yates into ``idx``; first ``k`` entries sorted on return."""
    key = mix64(mix64(np.uint64(seed)) + np.uint64(stage))
    for i in range(n):
        idx[i] = i
    for i in range(k):
        d = mix64(key + np.uint64(i))
        j = i + np.int64(d % np.uint64(n - i))
        t = idx[i]
        idx[i] = idx[j]
        idx[j] = t
    idx[:k].sort()


@njit
def split_feature(X, r, seg, f, min_leaf, total, base, floor):
    """Best split of one feature over the rows in ``seg``.

    Returns ``(improvement, threshold, missing_left)``; improvement is
    ``-inf`` when no legal cut exists. The first candidate (ascending
    threshold, missing-left first) reaching ``floor`` is returned at once;
    pass ``floor = inf`` to get the maximum.
    """
    n = seg.shape[0]
    xv = np.empty(n)
    rv = np.empty(n)
    nn = 0
    cm = 0
    sm = 0.0
    for t in range(n):
        i = seg[t]
        x = X[i, f]
        if np.isnan(x):
            cm += 1
            sm += r[i]
        else:
            xv[nn] = x
            rv[nn] = r[i]
            nn += 1
    best = -np.inf
    best_thr = np.nan
    best_ml = True
    if nn < 2:
        return best, best_thr, best_ml
    order = np.argsort(xv[:nn], kind="mergesort")
    acc = 0.0
    for t in range(nn - 1):
        a = xv[order[t]]
        b = xv[order[t + 1]]
        acc += rv[order[t]]
        if a < b:
            thr = 0.5 * (a + b)
            if thr >= b:
                thr = a
            nl = t + 1
            # missing rows sent left
            n_left = nl + cm
            n_right = n - n_left
            if n_left >= min_leaf and n_right >= min_leaf:
                sl = acc + sm
                sr = total - sl
                imp = sl * sl / n_left + sr * sr / n_right - base
                if imp >= floor:
                    return imp, thr, True
                if imp > best:
                    best = imp
                    best_thr = thr
                    best_ml = True
            # missing rows sent right
            n_left = nl
            n_right = n - nl
            if n_left >= min_leaf and n_right >= min_leaf:
                sl = acc
                sr = total - sl
                imp = sl * sl / n_left + sr * sr / n_right - base
                if imp >= floor:
                    return imp, thr, False
                if imp > best:
                    best = imp
                    best_thr = thr
                    best_ml = False
    return best, best_thr, best_ml


@njit
def node_best_split(X, r, seg, min_leaf):
    """Best split of a node over all features, or feature -1 if none is worth taking.

    Candidates within ``TIE_RTOL * sum(r**2)`` of the best count as tied and
    go to the lowest feature, then the lowest threshold, then missing-left;
    cuts that induce the same partition through different features would
    otherwise be separated by rounding alone.
    """
    n = seg.shape[0]
    if n < 2 * min_leaf:
        return -1, np.nan, True, 0.0
    total = 0.0
    sq = 0.0
    for t in range(n):
        v = r[seg[t]]
        total += v
        sq += v * v
    base = total * total / n
    best = -np.inf
    for f in range(X.shape[1]):
        imp, thr, ml = split_feature(X, r, seg, f, min_leaf, total, base, np.inf)
        if imp > best:
            best = imp
    if not (best > IMPROVEMENT_RTOL * sq) or best <= 0.0:
        return -1, np.nan, True, 0.0
    floor = best - TIE_RTOL * sq
    for f in range(X.shape[1]):
        imp, thr, ml = split_feature(X, r, seg, f, min_leaf, total, base, floor)
        if imp >= floor:
            return f, thr, ml, imp
    return -1, np.nan, True, 0.0


@njit
def grow_tree(X, r, rows, max_leaves, min_leaf, scale,
              feature, threshold, missing_left, improvement, left, right, value, count):
    """Best-first growth on ``rows``; writes node arrays in place, returns node count.

    Leaf values are ``scale`` times the mean target of the leaf.
    """
    max_nodes = 2 * max_leaves - 1
    buf = rows.copy()
    tmp = np.empty_like(buf)
    start = np.zeros(max_nodes, np.int64)
    end = np.zeros(max_nodes, np.int64)
    cf = np.full(max_nodes, -1, np.int64)
    cthr = np.full(max_nodes, np.nan)
    cml = np.ones(max_nodes, np.bool_)
    cimp = np.zeros(max_nodes)
    is_leaf = np.zeros(max_nodes, np.bool_)

    for j in range(max_nodes):
        feature[j] = -1
        threshold[j] = np.nan
        missing_left[j] = True
        improvement[j] = 0.0
        left[j] = -1
        right[j] = -1
        value[j] = 0.0
        count[j] = 0

    start[0] = 0
    end[0] = buf.shape[0]
    is_leaf[0] = True
    f0, t0, m0, i0 = node_best_split(X, r, buf[0:end[0]], min_leaf)
    cf[0] = f0
    cthr[0] = t0
    cml[0] = m0
    cimp[0] = i0
    n_nodes = 1
    n_leaves = 1

    while n_leaves < max_leaves:
        pick = -1
        best = 0.0
        for j in range(n_nodes):
            if is_leaf[j] and cf[j] >= 0 and cimp[j] > best:
                best = cimp[j]
                pick = j
        if pick < 0:
            break
        f = cf[pick]
        thr = cthr[pick]
        ml = cml[pick]
        s = start[pick]
        e = end[pick]
        nl = 0
        nr = 0
        for t in range(s, e):
            i = buf[t]
            x = X[i, f]
            go_left = ml if np.isnan(x) else x <= thr
            if go_left:
                buf[s + nl] = i
                nl += 1
            else:
                tmp[nr] = i
                nr += 1
        for t in range(nr):
            buf[s + nl + t] = tmp[t]

        lc = n_nodes
        rc = n_nodes + 1
        n_nodes += 2
        n_leaves += 1
        feature[pick] = f
        threshold[pick] = thr
        missing_left[pick] = ml
        improvement[pick] = cimp[pick]
        left[pick] = lc
        right[pick] = rc
        is_leaf[pick] = False
        start[lc] = s
        end[lc] = s + nl
        start[rc] = s + nl
        end[rc] = e
        for c in (lc, rc):
            is_leaf[c] = True
            fc, tc, mc, ic = node_best_split(X, r, buf[start[c]:end[c]], min_leaf)
            cf[c] = fc
            cthr[c] = tc
            cml[c] = mc
            cimp[c] = ic

    for j in range(n_nodes):
        acc = 0.0
        for t in range(start[j], end[j]):
            acc += r[buf[t]]
        cnt = end[j] - start[j]
        count[j] = cnt
        value[j] = scale * (acc / cnt) if cnt > 0 else 0.0
    return n_nodes


@njit
def route(feature, threshold, missing_left, left, right, X, i):
    node = 0
    while feature[node] >= 0:
        x = X[i, feature[node]]
        if np.isnan(x):
            node = left[node] if missing_left[node] else right[node]
        elif x <= threshold[node]:
            node = left[node]
        else:
            node = right[node]
    return node


@njit
def predict_tree(feature, threshold, missing_left, left, right, value, X):
    n = X.shape[0]
    out = np.empty(n)
    for i in range(n):
        out[i] = value[route(feature, threshold, missing_left, left, right, X, i)]
    return out


@njit
def predict_forest(baseline, feature, threshold, missing_left, left, right, value, X):
    """``baseline + sum_m tree_m(x)``; each row accumulates trees in order."""
    n = X.shape[0]
    m = feature.shape[0]
    out = np.full(n, baseline)
    for t in range(m):
        for i in range(n):
            node = 0
            while feature[t, node] >= 0:
                x = X[i, feature[t, node]]
                if np.isnan(x):
                    node = left[t, node] if missing_left[t, node] else right[t, node]
                elif x <= threshold[t, node]:
                    node = left[t, node]
                else:
                    node = right[t, node]
            out[i] += value[t, node]
    return out


@njit
def boost(X, y, n_trees, learn_rate, k, max_leaves, min_leaf, seed, trace_iters,
          feature, threshold, missing_left, improvement, left, right, value, count,
          trace_mse):
    """Stochastic L2 boosting; fills the forest arrays and the MSE trace.

    Returns the baseline (mean of ``y``).
    """
    n = y.shape[0]
    acc = 0.0
    for i in range(n):
        acc += y[i]
    baseline = acc / n
    F = np.full(n, baseline)
    r = np.empty(n)
    idx = np.empty(n, np.int64)
    pos = 0

    if trace_iters.shape[0] > 0 and trace_iters[0] == 0:
        s = 0.0
        for i in range(n):
            d = y[i] - F[i]
            s += d * d
        trace_mse[0] = s / n
        pos = 1

    for m in range(n_trees):
        if k < n:
            subsample(seed, m + 1, n, k, idx)
        else:
            for i in range(n):
                idx[i] = i
        for i in range(n):
            r[i] = y[i] - F[i]
        grow_tree(X, r, idx[:k], max_leaves, min_leaf, learn_rate,
                  feature[m], threshold[m], missing_left[m], improvement[m],
                  left[m], right[m], value[m], count[m])
        for i in range(n):
            node = route(feature[m], threshold[m], missing_left[m], left[m], right[m], X, i)
            F[i] += value[m, node]
        if pos < trace_iters.shape[0] and trace_iters[pos] == m + 1:
            s = 0.0
            for i in range(n):
                d = y[i] - F[i]
                s += d * d
            trace_mse[pos] = s / n
            pos += 1
    return baseline
