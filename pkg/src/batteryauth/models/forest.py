"""Random forest: bootstrapped CART trees voting by majority.

Each tree draws its bootstrap sample and its per-split feature subsets
(sqrt of the feature count) from an RNG stream derived from (seed, tree
index), so training order and thread count cannot change the result.
The `bootstrap` flag exists as a test hook; with it off and a single tree
the forest degenerates to a plain decision tree.
"""
from __future__ import annotations

import numpy as np

from ..seeding import rng_from
from .tree import Tree, build_tree, tree_from_jsonable, tree_predict, tree_to_jsonable


def fit(Xs: np.ndarray, y: np.ndarray, k: int, hp: dict, seed: int):
    n, d = Xs.shape
    n_estimators = int(hp["n_estimators"])
    criterion = hp["criterion"]
    bootstrap = bool(hp.get("bootstrap", True))
    max_features = max(1, int(round(np.sqrt(d))))
    trees = []
    for t in range(n_estimators):
        rng = rng_from(seed, "tree", t)
        idx = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        tree = build_tree(
            Xs[idx],
            y[idx],
            n_classes=k,
            criterion=criterion,
            max_features=max_features,
            rng=rng,
        )
        trees.append(tree)
    return {"trees": trees}, True


def predict(params: dict, Xs: np.ndarray, k: int, hp: dict):
    votes = np.zeros((len(Xs), k))
    for tree in params["trees"]:
        labels = tree_predict(tree, Xs)
        votes[np.arange(len(Xs)), labels] += 1.0
    scores = votes / votes.sum(axis=1, keepdims=True)
    return np.argmax(votes, axis=1), scores


def raw_importances(params: dict) -> np.ndarray:
    """Per-feature impurity-decrease sums averaged over trees (unnormalized)."""
    stacked = np.stack([tree.importances for tree in params["trees"]])
    return stacked.mean(axis=0)


def state_to_jsonable(params: dict) -> dict:
    return {"trees": [tree_to_jsonable(t) for t in params["trees"]]}


def state_from_jsonable(state: dict) -> dict:
    return {"trees": [tree_from_jsonable(t) for t in state["trees"]]}
