"""Multiclass boosting (SAMME) over depth-1 CART stumps, learning rate 1.

Round m fits a weighted stump, scores its weighted error e_m, assigns it
weight alpha_m = ln((1-e_m)/e_m) + ln(K-1), and upweights misclassified
samples by exp(alpha_m). Boosting stops early on a perfect stump (capped
alpha) or when a stump is no better than chance (alpha <= 0).
"""
from __future__ import annotations

import numpy as np

from .tree import Tree, build_tree, tree_from_jsonable, tree_predict, tree_to_jsonable

LEARNING_RATE = 1.0
# alpha for a zero-error stump: ln((1-eps)/eps) with eps = 1e-15
ALPHA_PERFECT = 34.5


def fit(Xs: np.ndarray, y: np.ndarray, k: int, hp: dict, seed: int):
    n = len(Xs)
    n_estimators = int(hp["n_estimators"])
    w = np.full(n, 1.0 / n)
    stumps: list = []
    alphas: list = []
    for _ in range(n_estimators):
        stump = build_tree(Xs, y, n_classes=k, criterion="gini", max_depth=1, sample_weight=w)
        pred = tree_predict(stump, Xs)
        miss = pred != y
        err = float(w[miss].sum())
        if err <= 0.0:
            stumps.append(stump)
            alphas.append(ALPHA_PERFECT + np.log(max(k - 1, 1)))
            break
        alpha = LEARNING_RATE * (np.log((1.0 - err) / err) + np.log(max(k - 1, 1)))
        if alpha <= 0.0:
            if not stumps:
                # keep one stump so the model is usable; weight zero means
                # prediction falls back to its raw votes
                stumps.append(stump)
                alphas.append(0.0)
            break
        stumps.append(stump)
        alphas.append(float(alpha))
        w = w * np.exp(alpha * miss)
        w = w / w.sum()
    return {"stumps": stumps, "alphas": np.asarray(alphas, dtype=float)}, True


def predict(params: dict, Xs: np.ndarray, k: int, hp: dict):
    alphas = params["alphas"]
    scores = np.zeros((len(Xs), k))
    if alphas.sum() <= 0.0:
        labels = tree_predict(params["stumps"][0], Xs)
        scores[np.arange(len(Xs)), labels] = 1.0
        return labels, scores
    for stump, alpha in zip(params["stumps"], alphas):
        labels = tree_predict(stump, Xs)
        scores[np.arange(len(Xs)), labels] += alpha
    scores = scores / scores.sum(axis=1, keepdims=True)
    return np.argmax(scores, axis=1), scores


def raw_importances(params: dict) -> np.ndarray:
    """Stump importances averaged with alpha weights (unnormalized)."""
    alphas = params["alphas"]
    total = float(alphas.sum())
    stacked = np.stack([s.importances for s in params["stumps"]])
    if total <= 0:
        return stacked.mean(axis=0)
    return (alphas[:, None] * stacked).sum(axis=0) / total


def state_to_jsonable(params: dict) -> dict:
    return {
        "stumps": [tree_to_jsonable(s) for s in params["stumps"]],
        "alphas": params["alphas"].tolist(),
    }


def state_from_jsonable(state: dict) -> dict:
    return {
        "stumps": [tree_from_jsonable(s) for s in state["stumps"]],
        "alphas": np.asarray(state["alphas"], dtype=float),
    }
