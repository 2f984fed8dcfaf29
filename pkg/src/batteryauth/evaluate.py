"""Experimental protocol: splits, balancing, metrics, and the two tasks.

Identification is multiclass (battery model or architecture as the
label); authentication is binary one-vs-rest (one label legitimate, the
rest pooled as counterfeit) swept over four balance levels. Both tasks
share the same chain: balance the data, optionally select features,
split 80/20 stratified, grid-search each model spec, score on the held
out part. All randomness is derived from the config seed, and reports
serialize with sorted keys, so reruns are byte-identical.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    ClassTooSmall,
    EmptyCounts,
    InfeasibleBalance,
    LabelAbsent,
    SingleClass,
)
from .features import FeatureMatrix, labels_for, matrix_take
from .models import ModelSpec, grid_search, predict
from .models.search import CandidateResult
from .seeding import child_seed, rng_from
from .selection import select_features

BALANCE_LEVELS = (50, 40, 30, 20)
SCHEMA_VERSION = "1"


def balance_name(legit_percent: int) -> str:
    """Both printed forms of a balance level, e.g. "50/50 (legit 50%)"."""
    return f"{legit_percent}/{100 - legit_percent} (legit {legit_percent}%)"


# === confusion counts and metrics ===

@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    precision: float
    recall: float
    f1: float
    far: Optional[float] = None
    frr: Optional[float] = None
    degenerate: Tuple[str, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "far": self.far,
            "frr": self.frr,
            "degenerate": list(self.degenerate),
        }


def confusion_binary(y_true: np.ndarray, y_pred: np.ndarray) -> ConfusionCounts:
    """Binary counts with label 1 as the positive (legitimate) class."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    return ConfusionCounts(
        tp=int(np.count_nonzero((y_true == 1) & (y_pred == 1))),
        tn=int(np.count_nonzero((y_true == 0) & (y_pred == 0))),
        fp=int(np.count_nonzero((y_true == 0) & (y_pred == 1))),
        fn=int(np.count_nonzero((y_true == 1) & (y_pred == 0))),
    )


def confusion_matrix(y_true: np.ndarray, y_pred: np.ndarray, k: int) -> np.ndarray:
    """k x k counts, rows = true class, columns = predicted class."""
    cm = np.zeros((k, k), dtype=int)
    for t, p in zip(np.asarray(y_true), np.asarray(y_pred)):
        cm[int(t), int(p)] += 1
    return cm


def _ratio(num: float, den: float, name: str, flags: List[str]) -> float:
    if den == 0:
        flags.append(name)
        return 0.0
    return num / den


def metrics(counts: ConfusionCounts) -> MetricSet:
    """All six binary metrics; any 0/0 reports as 0 with a degenerate flag."""
    if counts.total == 0:
        raise EmptyCounts("confusion counts sum to zero")
    flags: List[str] = []
    accuracy = (counts.tp + counts.tn) / counts.total
    precision = _ratio(counts.tp, counts.tp + counts.fp, "precision", flags)
    recall = _ratio(counts.tp, counts.tp + counts.fn, "recall", flags)
    f1 = _ratio(2 * precision * recall, precision + recall, "f1", flags)
    far = _ratio(counts.fp, counts.fp + counts.tn, "far", flags)
    frr = _ratio(counts.fn, counts.fn + counts.tp, "frr", flags)
    return MetricSet(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        far=far,
        frr=frr,
        degenerate=tuple(flags),
    )


def metrics_from_matrix(cm: np.ndarray) -> MetricSet:
    """Multiclass: per-class one-vs-rest, macro averaged; FAR/FRR omitted."""
    total = int(cm.sum())
    if total == 0:
        raise EmptyCounts("confusion matrix is empty")
    flags: List[str] = []
    precisions, recalls, f1s = [], [], []
    for c in range(len(cm)):
        tp = float(cm[c, c])
        fp = float(cm[:, c].sum() - tp)
        fn = float(cm[c, :].sum() - tp)
        p = _ratio(tp, tp + fp, f"precision:{c}", flags)
        r = _ratio(tp, tp + fn, f"recall:{c}", flags)
        f1s.append(_ratio(2 * p * r, p + r, f"f1:{c}", flags))
        precisions.append(p)
        recalls.append(r)
    return MetricSet(
        accuracy=float(np.trace(cm)) / total,
        precision=float(np.mean(precisions)),
        recall=float(np.mean(recalls)),
        f1=float(np.mean(f1s)),
        degenerate=tuple(flags),
    )


# === sampling operations ===

def split_train_test(
    y: np.ndarray, ratio: float = 0.8, seed: int = 0, stratified: bool = True
) -> Tuple[np.ndarray, np.ndarray]:
    """Disjoint, exhaustive (train, test) indices; per-class 80/20 when stratified."""
    y = np.asarray(y)
    rng = rng_from(seed, "split")
    if not stratified:
        perm = rng.permutation(len(y))
        n_train = int(round(ratio * len(y)))
        return np.sort(perm[:n_train]), np.sort(perm[n_train:])
    test_parts = []
    for c in np.unique(y):
        members = np.flatnonzero(y == c)
        if len(members) < 2:
            raise ClassTooSmall(f"class {c!r} has {len(members)} sample(s); stratified split needs 2")
        members = members[rng.permutation(len(members))]
        n_test = int(round((1.0 - ratio) * len(members)))
        test_parts.append(members[:n_test])
    test_idx = np.sort(np.concatenate(test_parts)) if test_parts else np.array([], dtype=int)
    train_mask = np.ones(len(y), dtype=bool)
    train_mask[test_idx] = False
    return np.flatnonzero(train_mask), test_idx


def undersample(matrix: FeatureMatrix, seed: int = 0, target: str = "model") -> FeatureMatrix:
    """Reduce every class to the minority count by uniform sampling."""
    y, _ = labels_for(matrix, target)
    classes, counts = np.unique(y, return_counts=True)
    if len(classes) < 2:
        raise SingleClass("undersampling needs at least 2 classes")
    floor = int(counts.min())
    rng = rng_from(seed, "undersample")
    picked = []
    for c in classes:
        members = np.flatnonzero(y == c)
        picked.append(rng.choice(members, size=floor, replace=False))
    rows = np.concatenate(picked)
    rows = rows[rng.permutation(len(rows))]
    return matrix_take(matrix, rows)


def make_auth_scenario(
    matrix: FeatureMatrix,
    legit_label: Union[int, str],
    balance: int,
    seed: int = 0,
    target: str = "model",
) -> Tuple[FeatureMatrix, np.ndarray]:
    """Binary scenario: legit label -> 1, a stratified counterfeit pool -> 0.

    The draw maximizes total size subject to availability while keeping
    the legit share within one sample of ``balance`` percent; counterfeit
    rows spread as evenly as possible across the other classes.
    """
    if balance not in BALANCE_LEVELS:
        raise InfeasibleBalance(f"balance must be one of {BALANCE_LEVELS}, got {balance}")
    y, names = labels_for(matrix, target)
    if isinstance(legit_label, str):
        if legit_label not in names:
            raise LabelAbsent(f"label {legit_label!r} not in {list(names)}")
        legit_id = names.index(legit_label)
    else:
        legit_id = int(legit_label)
        if legit_id not in np.unique(y):
            raise LabelAbsent(f"label id {legit_id} absent from the matrix")
    legit_pool = np.flatnonzero(y == legit_id)
    other_classes = [c for c in np.unique(y) if c != legit_id]
    if len(legit_pool) == 0:
        raise InfeasibleBalance(f"legit pool for label {legit_id} is empty")
    if not other_classes:
        raise SingleClass("authentication needs at least one counterfeit class")

    p = balance / 100.0
    n_legit_avail = len(legit_pool)
    n_counter_avail = int(np.count_nonzero(y != legit_id))
    t_cap = min(int(np.floor(n_legit_avail / p)), int(np.floor(n_counter_avail / (1.0 - p))))
    n_legit = n_counter = 0
    for t_total in range(t_cap, 1, -1):
        cand_legit = int(round(t_total * p))
        cand_counter = t_total - cand_legit
        if 1 <= cand_legit <= n_legit_avail and 1 <= cand_counter <= n_counter_avail:
            n_legit, n_counter = cand_legit, cand_counter
            break
    if n_legit == 0:
        raise InfeasibleBalance(
            f"cannot reach {balance}% legit with pools {n_legit_avail}/{n_counter_avail}"
        )

    rng = rng_from(seed, "scenario")
    legit_rows = rng.choice(legit_pool, size=n_legit, replace=False)

    # even quotas in class-id order, spillover redistributed deterministically
    avail = {c: np.flatnonzero(y == c) for c in other_classes}
    quotas = {c: n_counter // len(other_classes) for c in other_classes}
    for i in range(n_counter % len(other_classes)):
        quotas[other_classes[i]] += 1
    deficit = 0
    for c in other_classes:
        if quotas[c] > len(avail[c]):
            deficit += quotas[c] - len(avail[c])
            quotas[c] = len(avail[c])
    while deficit > 0:
        progressed = False
        for c in other_classes:
            if deficit == 0:
                break
            if quotas[c] < len(avail[c]):
                quotas[c] += 1
                deficit -= 1
                progressed = True
        if not progressed:
            raise InfeasibleBalance("counterfeit classes cannot supply the requested draw")
    counter_rows = np.concatenate(
        [rng.choice(avail[c], size=quotas[c], replace=False) for c in other_classes]
    )

    rows = np.concatenate([legit_rows, counter_rows])
    y_bin = np.concatenate([np.ones(n_legit, dtype=int), np.zeros(n_counter, dtype=int)])
    order = rng.permutation(len(rows))
    return matrix_take(matrix, rows[order]), y_bin[order]


# === report structures ===

def _cv_summary(cv: Sequence[CandidateResult]) -> list:
    return [
        {
            "index": r.index,
            "hyperparams": r.hyperparams,
            "mean_macro_f1": r.mean_score if np.isfinite(r.mean_score) else None,
            "error": r.error,
        }
        for r in cv
    ]


@dataclass(frozen=True)
class IdentResult:
    task: str                      # arch_identification | model_identification
    target: str                    # architecture | model
    kind: str
    hyperparams: dict
    metric_set: MetricSet
    confusion: tuple               # k x k nested tuples
    class_names: Tuple[str, ...]
    converged: bool
    cv: tuple                      # per-candidate summaries

    def to_json_dict(self) -> dict:
        return {
            "task": self.task,
            "target": self.target,
            "kind": self.kind,
            "hyperparams": self.hyperparams,
            "metrics": self.metric_set.to_json_dict(),
            "confusion": [list(row) for row in self.confusion],
            "class_names": list(self.class_names),
            "converged": self.converged,
            "cv": list(self.cv),
        }


@dataclass(frozen=True)
class AuthResult:
    task: str                      # arch_authentication | model_authentication
    target: str
    kind: str
    legit_label: str
    balance: int
    hyperparams: dict
    metric_set: MetricSet
    counts: ConfusionCounts
    converged: bool

    def to_json_dict(self) -> dict:
        return {
            "task": self.task,
            "target": self.target,
            "kind": self.kind,
            "legit_label": self.legit_label,
            "balance": self.balance,
            "balance_name": balance_name(self.balance),
            "hyperparams": self.hyperparams,
            "metrics": self.metric_set.to_json_dict(),
            "counts": {
                "tp": self.counts.tp,
                "tn": self.counts.tn,
                "fp": self.counts.fp,
                "fn": self.counts.fn,
            },
            "converged": self.converged,
        }


@dataclass(frozen=True)
class EvalReport:
    schema_version: str
    tasks: Tuple[str, ...]
    ident_results: Tuple[IdentResult, ...]
    auth_results: Tuple[AuthResult, ...]
    seed: int
    catalog_version: str
    selection_kept: Dict[str, int]      # per task-target key, -1 when off
    config_snapshot: dict

    def to_json_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "tasks": list(self.tasks),
            "identification": [r.to_json_dict() for r in self.ident_results],
            "authentication": [r.to_json_dict() for r in self.auth_results],
            "authentication_averages": auth_averages(self.auth_results),
            "seed": self.seed,
            "catalog_version": self.catalog_version,
            "selection_kept": dict(self.selection_kept),
            "config": self.config_snapshot,
        }


def _mean_metrics(cells: Sequence[AuthResult]) -> dict:
    def mean_of(getter):
        vals = [getter(c.metric_set) for c in cells]
        return float(np.mean(vals))

    return {
        "accuracy": mean_of(lambda m: m.accuracy),
        "precision": mean_of(lambda m: m.precision),
        "recall": mean_of(lambda m: m.recall),
        "f1": mean_of(lambda m: m.f1),
        "far": mean_of(lambda m: m.far),
        "frr": mean_of(lambda m: m.frr),
        "cells": len(cells),
    }


def auth_averages(results: Sequence[AuthResult]) -> dict:
    """Arithmetic means over legit labels, over balances, and overall.

    Every mean is recomputable from the stored per-cell results; this
    helper is the single place the aggregation happens.
    """
    out: dict = {"by_balance": {}, "by_label": {}, "overall": {}}
    combos = sorted({(r.task, r.kind) for r in results})
    for task, kind in combos:
        cells = [r for r in results if r.task == task and r.kind == kind]
        key = f"{task}:{kind}"
        out["overall"][key] = _mean_metrics(cells)
        for balance in sorted({r.balance for r in cells}, reverse=True):
            sub = [r for r in cells if r.balance == balance]
            out["by_balance"][f"{key}:{balance}"] = _mean_metrics(sub)
        for label in sorted({r.legit_label for r in cells}):
            sub = [r for r in cells if r.legit_label == label]
            out["by_label"][f"{key}:{label}"] = _mean_metrics(sub)
    return out


# === task runners ===

@dataclass(frozen=True)
class EvalConfig:
    seed: int = 0
    train_ratio: float = 0.8
    folds: int = 5
    targets: Tuple[str, ...] = ("architecture", "model")
    balances: Tuple[int, ...] = BALANCE_LEVELS
    selection_enabled: bool = False
    selection_fdr: float = 0.05
    undersample_before_split: bool = True
    threads: int = 1
    snapshot: dict = field(default_factory=dict)


def _task_name(target: str, mode: str) -> str:
    prefix = "arch" if target == "architecture" else "model"
    return f"{prefix}_{mode}"


def run_identification(
    matrix: FeatureMatrix,
    specs: Sequence[ModelSpec],
    config: EvalConfig,
    model_sink: Optional[dict] = None,
) -> EvalReport:
    """Multiclass task for each configured target; see module docstring.

    When ``model_sink`` is a dict, each grid-search winner is stored
    under "ident:<task>:<kind>" so callers can persist them without a
    second training pass.
    """
    ident_results: List[IdentResult] = []
    selection_kept: Dict[str, int] = {}
    for target in config.targets:
        task = _task_name(target, "identification")
        work = (
            undersample(matrix, seed=child_seed(config.seed, "undersample", target), target=target)
            if config.undersample_before_split
            else matrix
        )
        y, names = labels_for(work, target)
        mask = None
        if config.selection_enabled:
            sel = select_features(work, target, fdr=config.selection_fdr)
            mask = sel.keep
        selection_kept[task] = int(mask.sum()) if mask is not None else -1
        X = work.values[:, mask] if mask is not None else work.values
        train_idx, test_idx = split_train_test(
            y, ratio=config.train_ratio, seed=child_seed(config.seed, "split", target)
        )
        for spec in specs:
            model, cv = grid_search(
                spec,
                X[train_idx],
                y[train_idx],
                k=config.folds,
                threads=config.threads,
                mask=mask,
                catalog_version=work.catalog_version,
                class_names=names,
                task="identification",
            )
            if model_sink is not None:
                model_sink[f"ident:{task}:{spec.kind}"] = model
            y_hat = predict(model, X[test_idx])
            cm = confusion_matrix(y[test_idx], y_hat, k=len(names))
            ident_results.append(
                IdentResult(
                    task=task,
                    target=target,
                    kind=spec.kind,
                    hyperparams=model.hyperparams,
                    metric_set=metrics_from_matrix(cm),
                    confusion=tuple(tuple(int(v) for v in row) for row in cm),
                    class_names=names,
                    converged=model.converged,
                    cv=tuple(_cv_summary(cv)),
                )
            )
    return EvalReport(
        schema_version=SCHEMA_VERSION,
        tasks=tuple(_task_name(t, "identification") for t in config.targets),
        ident_results=tuple(ident_results),
        auth_results=(),
        seed=config.seed,
        catalog_version=matrix.catalog_version,
        selection_kept=selection_kept,
        config_snapshot=dict(config.snapshot),
    )


def run_authentication(
    matrix: FeatureMatrix,
    specs: Sequence[ModelSpec],
    config: EvalConfig,
    model_sink: Optional[dict] = None,
) -> EvalReport:
    """One-vs-rest binary task per (target, legit label, balance level).

    Winners land in ``model_sink`` (when given) under
    "auth:<task>:<label>:<balance>:<kind>".
    """
    auth_results: List[AuthResult] = []
    selection_kept: Dict[str, int] = {}
    for target in config.targets:
        task = _task_name(target, "authentication")
        y_all, names = labels_for(matrix, target)
        present = np.unique(y_all)
        if len(present) < 2:
            raise SingleClass(f"authentication needs >= 2 {target} labels")
        for legit_id in present:
            legit_name = names[int(legit_id)]
            for balance in config.balances:
                scen_seed = child_seed(config.seed, "scenario", target, int(legit_id), balance)
                sub, y_bin = make_auth_scenario(
                    matrix, int(legit_id), balance, seed=scen_seed, target=target
                )
                mask = None
                if config.selection_enabled:
                    sel = select_features(sub.values, y_bin, fdr=config.selection_fdr)
                    mask = sel.keep
                key = f"{task}:{legit_name}:{balance}"
                selection_kept[key] = int(mask.sum()) if mask is not None else -1
                X = sub.values[:, mask] if mask is not None else sub.values
                train_idx, test_idx = split_train_test(
                    y_bin,
                    ratio=config.train_ratio,
                    seed=child_seed(config.seed, "authsplit", target, int(legit_id), balance),
                )
                for spec in specs:
                    model, _cv = grid_search(
                        spec,
                        X[train_idx],
                        y_bin[train_idx],
                        k=config.folds,
                        threads=config.threads,
                        mask=mask,
                        catalog_version=matrix.catalog_version,
                        class_names=("counterfeit", legit_name),
                        task="authentication",
                    )
                    if model_sink is not None:
                        model_sink[f"auth:{task}:{legit_name}:{balance}:{spec.kind}"] = model
                    y_hat = predict(model, X[test_idx])
                    counts = confusion_binary(y_bin[test_idx], y_hat)
                    auth_results.append(
                        AuthResult(
                            task=task,
                            target=target,
                            kind=spec.kind,
                            legit_label=legit_name,
                            balance=int(balance),
                            hyperparams=model.hyperparams,
                            metric_set=metrics(counts),
                            counts=counts,
                            converged=model.converged,
                        )
                    )
    return EvalReport(
        schema_version=SCHEMA_VERSION,
        tasks=tuple(_task_name(t, "authentication") for t in config.targets),
        ident_results=(),
        auth_results=tuple(auth_results),
        seed=config.seed,
        catalog_version=matrix.catalog_version,
        selection_kept=selection_kept,
        config_snapshot=dict(config.snapshot),
    )


def merge_reports(a: EvalReport, b: EvalReport) -> EvalReport:
    """Combine an identification and an authentication report into one."""
    return EvalReport(
        schema_version=SCHEMA_VERSION,
        tasks=a.tasks + b.tasks,
        ident_results=a.ident_results + b.ident_results,
        auth_results=a.auth_results + b.auth_results,
        seed=a.seed,
        catalog_version=a.catalog_version,
        selection_kept={**a.selection_kept, **b.selection_kept},
        config_snapshot=a.config_snapshot or b.config_snapshot,
    )


# === serialization ===

def report_to_json(report: EvalReport) -> str:
    return json.dumps(report.to_json_dict(), sort_keys=True, indent=2) + "\n"


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def report_to_csv(report: EvalReport) -> str:
    """Flat table: kind x metrics for identification, plus kind x balance
    rows (per label and averaged) for authentication."""
    lines = ["task,target,kind,legit_label,balance,accuracy,precision,recall,f1,far,frr"]
    for r in report.ident_results:
        m = r.metric_set
        lines.append(
            ",".join(
                [r.task, r.target, r.kind, "", ""]
                + [_csv_cell(v) for v in (m.accuracy, m.precision, m.recall, m.f1, m.far, m.frr)]
            )
        )
    for r in report.auth_results:
        m = r.metric_set
        lines.append(
            ",".join(
                [r.task, r.target, r.kind, r.legit_label, str(r.balance)]
                + [_csv_cell(v) for v in (m.accuracy, m.precision, m.recall, m.f1, m.far, m.frr)]
            )
        )
    averages = auth_averages(report.auth_results)
    for key in sorted(averages["by_balance"]):
        task, kind, balance = key.rsplit(":", 2)
        entry = averages["by_balance"][key]
        target = "architecture" if task.startswith("arch") else "model"
        lines.append(
            ",".join(
                [task, target, kind, "mean", balance]
                + [
                    _csv_cell(entry[f])
                    for f in ("accuracy", "precision", "recall", "f1", "far", "frr")
                ]
            )
        )
    return "\n".join(lines) + "\n"
