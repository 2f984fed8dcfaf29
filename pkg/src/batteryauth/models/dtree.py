"""Single CART decision tree (all features considered at every split)."""
from __future__ import annotations

import numpy as np

from .tree import build_tree, tree_from_jsonable, tree_predict_counts, tree_to_jsonable


def fit(Xs: np.ndarray, y: np.ndarray, k: int, hp: dict, seed: int):
    max_depth = hp.get("max_depth")
    tree = build_tree(
        Xs,
        y,
        n_classes=k,
        criterion=hp["criterion"],
        max_depth=None if max_depth is None else int(max_depth),
    )
    return {"tree": tree}, True


def predict(params: dict, Xs: np.ndarray, k: int, hp: dict):
    counts = tree_predict_counts(params["tree"], Xs)
    totals = counts.sum(axis=1, keepdims=True)
    scores = counts / np.where(totals > 0, totals, 1.0)
    return np.argmax(counts, axis=1), scores


def raw_importances(params: dict) -> np.ndarray:
    return params["tree"].importances.copy()


def state_to_jsonable(params: dict) -> dict:
    return {"tree": tree_to_jsonable(params["tree"])}


def state_from_jsonable(state: dict) -> dict:
    return {"tree": tree_from_jsonable(state["tree"])}
