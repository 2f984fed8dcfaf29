"""Model zoo front door: specs, grids, standardization, train/predict.

Eight classifier kinds share one interface. ``train`` fits the
standardizer on the training matrix, transforms, and dispatches to the
kind's fitter; ``predict`` reverses the path. Hyperparameter value grids
below are fixed defaults and fully overridable per spec; enumeration
order (itertools.product over the documented dimension order) is part of
the contract because grid-search ties break by position.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..errors import ConfigError, DimensionMismatch, NonFiniteValue, UnsupportedKind
from . import boost, dtree, forest, naive_bayes, neighbors, neural, qda, svm

KINDS = (
    "AdaBoost",
    "DecisionTree",
    "GaussianNB",
    "KNN",
    "NeuralNet",
    "QDA",
    "RandomForest",
    "SVM",
)

GRID_DIMENSIONS: Dict[str, Tuple[str, ...]] = {
    "AdaBoost": ("n_estimators",),
    "DecisionTree": ("criterion", "max_depth"),
    "GaussianNB": ("var_smoothing",),
    "KNN": ("k", "weights"),
    "NeuralNet": ("hidden", "activation", "solver"),
    "QDA": ("reg",),
    "RandomForest": ("criterion", "n_estimators"),
    "SVM": ("kernel", "C", "gamma"),
}

DEFAULT_GRIDS: Dict[str, Dict[str, list]] = {
    "AdaBoost": {"n_estimators": [50, 100, 200]},
    "DecisionTree": {"criterion": ["gini", "entropy"], "max_depth": [4, 8, 16, None]},
    "GaussianNB": {"var_smoothing": [1e-9, 1e-7, 1e-5]},
    "KNN": {"k": [1, 3, 5, 9], "weights": ["uniform", "distance"]},
    "NeuralNet": {
        "hidden": [50, 100, 200],
        "activation": ["relu", "tanh"],
        "solver": ["sgd", "adam"],
    },
    "QDA": {"reg": [0.0, 0.1, 0.5]},
    "RandomForest": {"criterion": ["gini", "entropy"], "n_estimators": [100, 200]},
    "SVM": {"kernel": ["linear", "rbf"], "C": [0.1, 1.0, 10.0], "gamma": ["scale", 0.01, 0.1]},
}

_MODULES = {
    "AdaBoost": boost,
    "DecisionTree": dtree,
    "GaussianNB": naive_bayes,
    "KNN": neighbors,
    "NeuralNet": neural,
    "QDA": qda,
    "RandomForest": forest,
    "SVM": svm,
}

# kinds whose per-class scores sum to 1
PROBABILISTIC_KINDS = (
    "AdaBoost",
    "DecisionTree",
    "GaussianNB",
    "KNN",
    "NeuralNet",
    "QDA",
    "RandomForest",
)


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    grid: Optional[Dict[str, list]] = None
    seed: int = 0

    def resolved_grid(self) -> Dict[str, list]:
        base = DEFAULT_GRIDS[self.kind]
        if self.grid is None:
            return base
        merged = dict(base)
        for key, values in self.grid.items():
            if key not in GRID_DIMENSIONS[self.kind]:
                raise ConfigError(f"{self.kind} grid has no dimension {key!r}")
            if not isinstance(values, (list, tuple)) or len(values) == 0:
                raise ConfigError(f"{self.kind} grid dimension {key!r} must be a non-empty list")
            merged[key] = list(values)
        return merged


def make_spec(kind: str, grid: Optional[dict] = None, seed: int = 0) -> ModelSpec:
    if kind not in KINDS:
        raise UnsupportedKind(f"unknown model kind {kind!r}; expected one of {KINDS}")
    spec = ModelSpec(kind=kind, grid=grid, seed=seed)
    spec.resolved_grid()  # validate eagerly
    return spec


def enumerate_grid(spec: ModelSpec) -> List[dict]:
    """All hyperparameter combinations in the documented order."""
    dims = GRID_DIMENSIONS[spec.kind]
    grid = spec.resolved_grid()
    combos = []
    for values in itertools.product(*(grid[d] for d in dims)):
        combos.append(normalize_hyperparams(spec.kind, dict(zip(dims, values))))
    return combos


def normalize_hyperparams(kind: str, hp: dict) -> dict:
    """Coerce JSON-sourced values to their native types and bounds-check."""
    out = dict(hp)
    ints = {
        "AdaBoost": ("n_estimators",),
        "DecisionTree": (),
        "KNN": ("k",),
        "NeuralNet": ("hidden",),
        "RandomForest": ("n_estimators",),
    }.get(kind, ())
    for key in ints:
        out[key] = int(out[key])
        if out[key] < 1:
            raise ConfigError(f"{kind}.{key} must be >= 1, got {out[key]}")
    if kind == "DecisionTree" and out.get("max_depth") is not None:
        out["max_depth"] = int(out["max_depth"])
        if out["max_depth"] < 1:
            raise ConfigError(f"DecisionTree.max_depth must be >= 1 or null")
    if kind == "GaussianNB" and float(out["var_smoothing"]) < 0:
        raise ConfigError("GaussianNB.var_smoothing must be >= 0")
    if kind == "QDA" and not 0 <= float(out["reg"]) <= 1:
        raise ConfigError("QDA.reg must lie in [0, 1]")
    if kind == "SVM" and float(out["C"]) <= 0:
        raise ConfigError("SVM.C must be > 0")
    return out


@dataclass(frozen=True, eq=False)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.scale

    @property
    def width(self) -> int:
        return len(self.mean)


def fit_standardizer(X: np.ndarray) -> Standardizer:
    """Per-column mean/std; constant columns get unit divisors."""
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    return Standardizer(mean=mean, scale=scale)


@dataclass(eq=False)
class TrainedModel:
    kind: str
    hyperparams: dict
    standardizer: Standardizer
    mask: Optional[np.ndarray]          # keep-mask over the full catalog, or None
    params: dict                        # kind-specific fitted state
    seed: int
    catalog_version: str
    classes: np.ndarray                 # internal id -> original label id
    class_names: Tuple[str, ...] = ()
    converged: bool = True
    task: str = "identification"

    @property
    def input_width(self) -> int:
        return self.standardizer.width


def train(
    spec: ModelSpec,
    hyperparams: dict,
    X: np.ndarray,
    y: np.ndarray,
    mask: Optional[np.ndarray] = None,
    catalog_version: str = "",
    class_names: Tuple[str, ...] = (),
    seed: Optional[int] = None,
    task: str = "identification",
) -> TrainedModel:
    """Fit one model at fixed hyperparameters.

    X must already be masked to the selected features (the mask argument is
    carried for provenance and re-applied to full-width inputs at predict
    time). (spec, seed, data) fully determine the result.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) != len(y):
        raise DimensionMismatch(f"X {X.shape} and y {y.shape} do not align")
    if not np.all(np.isfinite(X)):
        raise NonFiniteValue("training matrix contains non-finite values; impute first")
    classes = np.unique(y)
    if len(X) < len(classes):
        raise DimensionMismatch(f"{len(X)} rows cannot cover {len(classes)} classes")
    y_enc = np.searchsorted(classes, y)
    hp = normalize_hyperparams(spec.kind, hyperparams)
    model_seed = spec.seed if seed is None else seed
    standardizer = fit_standardizer(X)
    Xs = standardizer.transform(X)
    params, converged = _MODULES[spec.kind].fit(Xs, y_enc, len(classes), hp, model_seed)
    return TrainedModel(
        kind=spec.kind,
        hyperparams=hp,
        standardizer=standardizer,
        mask=None if mask is None else np.asarray(mask, dtype=bool),
        params=params,
        seed=model_seed,
        catalog_version=catalog_version,
        classes=classes,
        class_names=tuple(class_names),
        converged=converged,
        task=task,
    )


def _prepare_input(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] == model.input_width:
        return model.standardizer.transform(X)
    if model.mask is not None and X.shape[1] == len(model.mask):
        return model.standardizer.transform(X[:, model.mask])
    raise DimensionMismatch(
        f"input width {X.shape[1]} matches neither the model width {model.input_width}"
        f" nor the catalog width {len(model.mask) if model.mask is not None else 'n/a'}"
    )


def predict(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    """Class labels (original ids). Full-width rows are masked automatically."""
    Xs = _prepare_input(model, X)
    labels_enc, _ = _MODULES[model.kind].predict(
        model.params, Xs, len(model.classes), model.hyperparams
    )
    return model.classes[labels_enc]


def predict_scores(model: TrainedModel, X: np.ndarray) -> Optional[np.ndarray]:
    """Per-class scores summing to 1 per row; None for margin-only kinds."""
    Xs = _prepare_input(model, X)
    _, scores = _MODULES[model.kind].predict(
        model.params, Xs, len(model.classes), model.hyperparams
    )
    return scores


def decision_margins(model: TrainedModel, X: np.ndarray) -> Optional[np.ndarray]:
    """SVM decision values for diagnostics; None for other kinds."""
    if model.kind != "SVM":
        return None
    Xs = _prepare_input(model, X)
    return svm.decision_values(model.params, Xs, len(model.classes), model.hyperparams)


def raw_importances(model: TrainedModel) -> np.ndarray:
    """Unnormalized impurity-decrease sums for tree-based kinds."""
    if model.kind not in ("DecisionTree", "RandomForest", "AdaBoost"):
        raise UnsupportedKind(f"{model.kind} has no impurity importances")
    return _MODULES[model.kind].raw_importances(model.params)
