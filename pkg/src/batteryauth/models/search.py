"""Stratified k-fold cross-validation and exhaustive grid search.

Every candidate is scored by mean macro-F1 over the k validation folds;
the maximum wins, ties broken by enumeration position; the winner is
refit on the full training data. Candidate model seeds derive from
(spec.seed, candidate index), so concurrent evaluation cannot change
results. A candidate whose training raises scores -inf; if all do, the
search fails with GridExhausted.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..errors import BatteryAuthError, ClassTooSmall, GridExhausted
from ..parallel import ordered_map
from ..seeding import child_seed, rng_from
from .base import ModelSpec, TrainedModel, enumerate_grid, predict, train

DEFAULT_FOLDS = 5


def macro_f1(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    """Unweighted mean of per-class one-vs-rest F1 (0/0 counts as 0)."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    classes = np.unique(y_true)
    f1s = []
    for c in classes:
        tp = np.count_nonzero((y_pred == c) & (y_true == c))
        fp = np.count_nonzero((y_pred == c) & (y_true != c))
        fn = np.count_nonzero((y_pred != c) & (y_true == c))
        denom = 2 * tp + fp + fn
        f1s.append(2 * tp / denom if denom > 0 else 0.0)
    return float(np.mean(f1s))


def stratified_kfold(
    y: np.ndarray, k: int = DEFAULT_FOLDS, seed: int = 0
) -> List[Tuple[np.ndarray, np.ndarray]]:
    """k (train_idx, val_idx) pairs; per-class fold counts differ by <= 1."""
    y = np.asarray(y)
    rng = rng_from(seed, "kfold")
    fold_of = np.empty(len(y), dtype=int)
    for c in np.unique(y):
        members = np.flatnonzero(y == c)
        if len(members) < k:
            raise ClassTooSmall(
                f"class {c!r} has {len(members)} samples; {k}-fold needs at least {k}"
            )
        members = members[rng.permutation(len(members))]
        fold_of[members] = np.arange(len(members)) % k
    folds = []
    for f in range(k):
        val = np.flatnonzero(fold_of == f)
        trn = np.flatnonzero(fold_of != f)
        folds.append((trn, val))
    return folds


@dataclass(frozen=True)
class CandidateResult:
    index: int
    hyperparams: dict
    mean_score: float
    fold_scores: Tuple[float, ...]
    error: Optional[str] = None


def grid_search(
    spec: ModelSpec,
    X: np.ndarray,
    y: np.ndarray,
    k: int = DEFAULT_FOLDS,
    threads: int = 1,
    mask: Optional[np.ndarray] = None,
    catalog_version: str = "",
    class_names: Tuple[str, ...] = (),
    task: str = "identification",
) -> Tuple[TrainedModel, List[CandidateResult]]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    candidates = enumerate_grid(spec)
    folds = stratified_kfold(y, k=k, seed=spec.seed)

    def evaluate(item) -> CandidateResult:
        ci, hp = item
        cand_seed = child_seed(spec.seed, "candidate", ci)
        scores = []
        try:
            for trn, val in folds:
                model = train(spec, hp, X[trn], y[trn], seed=cand_seed)
                scores.append(macro_f1(y[val], predict(model, X[val])))
        except BatteryAuthError as exc:
            return CandidateResult(
                index=ci,
                hyperparams=hp,
                mean_score=float("-inf"),
                fold_scores=tuple(scores),
                error=f"{type(exc).__name__}: {exc}",
            )
        return CandidateResult(
            index=ci,
            hyperparams=hp,
            mean_score=float(np.mean(scores)),
            fold_scores=tuple(scores),
        )

    results = ordered_map(evaluate, list(enumerate(candidates)), threads=threads)
    best = max(range(len(results)), key=lambda i: (results[i].mean_score, -i))
    if not np.isfinite(results[best].mean_score):
        details = "; ".join(r.error or "?" for r in results)
        raise GridExhausted(f"every candidate failed: {details}")
    winner = train(
        spec,
        candidates[best],
        X,
        y,
        mask=mask,
        catalog_version=catalog_version,
        class_names=class_names,
        seed=child_seed(spec.seed, "candidate", best),
        task=task,
    )
    return winner, results
