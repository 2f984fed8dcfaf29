"""CART tree grown on numpy arrays.

Split search is exact: candidate features are argsorted per node and every
boundary between distinct adjacent values is scored by impurity decrease
(gini or entropy), vectorized over positions and features at once. Ties go
to the earliest split position, then the lowest candidate feature, so the
grown tree is a pure function of (data, parameters, rng stream).

Sample weights are supported (boosting needs them); class counts then
become class weight sums throughout.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import UnsupportedKind

CRITERIA = ("gini", "entropy")
# A split must beat this decrease to be accepted; blocks zero-gain churn
# on duplicate points with conflicting labels.
MIN_DECREASE = 1e-12


@dataclass(eq=False)
class Tree:
    """Flat node arrays; feature == -1 marks a leaf."""

    feature: np.ndarray      # (nodes,) int32
    threshold: np.ndarray    # (nodes,) float64
    left: np.ndarray         # (nodes,) int32
    right: np.ndarray        # (nodes,) int32
    counts: np.ndarray       # (nodes, k) class weight sums
    importances: np.ndarray  # (d,) raw impurity-decrease sums

    @property
    def n_nodes(self) -> int:
        return len(self.feature)


def _impurity(counts: np.ndarray, totals: np.ndarray, criterion: str) -> np.ndarray:
    """Impurity of count vectors along the last axis; totals must be > 0."""
    p = counts / totals[..., None]
    if criterion == "gini":
        return 1.0 - np.square(p).sum(axis=-1)
    if criterion == "entropy":
        logs = np.zeros_like(p)
        np.log2(p, where=p > 0, out=logs)
        return -(p * logs).sum(axis=-1)
    raise UnsupportedKind(f"unknown criterion {criterion!r}")


def _best_split(X, y, w, idx, feats, k, criterion, parent_imp):
    """Best (feature, threshold, decrease) over the candidate features, or None."""
    n = len(idx)
    Xc = X[np.ix_(idx, feats)]
    order = np.argsort(Xc, axis=0, kind="stable")
    sv = np.take_along_axis(Xc, order, axis=0)
    valid = sv[1:] > sv[:-1]
    if not valid.any():
        return None
    sy = y[idx][order]
    onehot = sy[:, :, None] == np.arange(k)[None, None, :]
    if w is None:
        woh = onehot.astype(float)
    else:
        woh = onehot * w[idx][order][:, :, None]
    cum = np.cumsum(woh, axis=0)
    total = cum[-1]                          # (m, k); identical across columns
    left = cum[:-1]                          # (n-1, m, k)
    right = total[None, :, :] - left
    wl = left.sum(axis=2)
    wr = right.sum(axis=2)
    node_w = wl + wr
    child = (wl * _impurity(left, wl, criterion) + wr * _impurity(right, wr, criterion)) / node_w
    decrease = parent_imp - child
    decrease[~valid] = -np.inf
    flat = int(np.argmax(decrease))          # row-major: earliest position, then feature
    pos, j = divmod(flat, len(feats))
    best = float(decrease[pos, j])
    if not np.isfinite(best) or best <= MIN_DECREASE:
        return None
    lo, hi = float(sv[pos, j]), float(sv[pos + 1, j])
    thr = lo + 0.5 * (hi - lo)
    if not lo <= thr < hi:
        thr = lo
    return int(feats[j]), thr, best


def build_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    criterion: str = "gini",
    max_depth: Optional[int] = None,
    max_features: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    sample_weight: Optional[np.ndarray] = None,
) -> Tree:
    if criterion not in CRITERIA:
        raise UnsupportedKind(f"criterion must be one of {CRITERIA}, got {criterion!r}")
    n, d = X.shape
    w = None if sample_weight is None else np.asarray(sample_weight, dtype=float)
    root_weight = float(n) if w is None else float(w.sum())
    feature: list = []
    threshold: list = []
    left: list = []
    right: list = []
    counts: list = []
    importances = np.zeros(d)

    all_feats = np.arange(d)
    # stack holds (row indices, depth, parent slot, is_right_child); pushing
    # the right child first keeps node ids in pre-order.
    stack = [(np.arange(n), 0, -1, False)]
    while stack:
        idx, depth, parent, is_right = stack.pop()
        if w is None:
            node_counts = np.bincount(y[idx], minlength=n_classes).astype(float)
        else:
            node_counts = np.bincount(y[idx], weights=w[idx], minlength=n_classes)
        node_id = len(feature)
        if parent >= 0:
            (right if is_right else left)[parent] = node_id
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(node_counts)

        node_w = float(node_counts.sum())
        pure = int(np.count_nonzero(node_counts)) <= 1
        depth_capped = max_depth is not None and depth >= max_depth
        if pure or depth_capped or len(idx) < 2 or node_w <= 0:
            continue
        parent_imp = float(_impurity(node_counts[None], np.array([node_w]), criterion)[0])

        if max_features is not None and max_features < d:
            feats = np.sort(rng.choice(d, size=max_features, replace=False))
        else:
            feats = all_feats
        split = _best_split(X, y, w, idx, feats, n_classes, criterion, parent_imp)
        if split is None and len(feats) < d:
            # locally constant candidates; retry on the full set before leafing
            split = _best_split(X, y, w, idx, all_feats, n_classes, criterion, parent_imp)
        if split is None:
            continue
        f, thr, decrease = split
        feature[node_id] = f
        threshold[node_id] = thr
        importances[f] += (node_w / root_weight) * decrease
        go_left = X[idx, f] <= thr
        stack.append((idx[~go_left], depth + 1, node_id, True))
        stack.append((idx[go_left], depth + 1, node_id, False))

    return Tree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=float),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        counts=np.asarray(counts, dtype=float),
        importances=importances,
    )


def tree_apply(tree: Tree, X: np.ndarray) -> np.ndarray:
    """Leaf node id for every row."""
    n = len(X)
    node = np.zeros(n, dtype=np.int64)
    while True:
        f = tree.feature[node]
        active = f >= 0
        if not active.any():
            return node
        rows = np.flatnonzero(active)
        fa = f[rows]
        goes_left = X[rows, fa] <= tree.threshold[node[rows]]
        node[rows] = np.where(goes_left, tree.left[node[rows]], tree.right[node[rows]])


def tree_predict_counts(tree: Tree, X: np.ndarray) -> np.ndarray:
    """Class weight sums of each row's leaf, shape (n, k)."""
    return tree.counts[tree_apply(tree, X)]


def tree_predict(tree: Tree, X: np.ndarray) -> np.ndarray:
    """Majority class of each row's leaf (lowest id wins ties)."""
    return np.argmax(tree_predict_counts(tree, X), axis=1)


def tree_to_jsonable(tree: Tree) -> dict:
    return {
        "feature": tree.feature.tolist(),
        "threshold": tree.threshold.tolist(),
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "counts": tree.counts.tolist(),
        "importances": tree.importances.tolist(),
    }


def tree_from_jsonable(data: dict) -> Tree:
    return Tree(
        feature=np.asarray(data["feature"], dtype=np.int32),
        threshold=np.asarray(data["threshold"], dtype=float),
        left=np.asarray(data["left"], dtype=np.int32),
        right=np.asarray(data["right"], dtype=np.int32),
        counts=np.asarray(data["counts"], dtype=float),
        importances=np.asarray(data["importances"], dtype=float),
    )
