"""Quadratic discriminant analysis with shrinkage regularization.

Per-class Gaussian with covariance Sigma_reg = (1-r)*Sigma + r*(tr(Sigma)/d)*I,
i.e. shrinkage toward a scaled identity. r=0 on a singular class covariance
raises SingularCovariance with a hint to raise r.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from ..errors import SingularCovariance


def fit(Xs: np.ndarray, y: np.ndarray, k: int, hp: dict, seed: int):
    n, d = Xs.shape
    r = float(hp["reg"])
    means = np.zeros((k, d))
    chols = np.zeros((k, d, d))
    log_dets = np.zeros(k)
    counts = np.zeros(k)
    for c in range(k):
        rows = Xs[y == c]
        counts[c] = len(rows)
        means[c] = rows.mean(axis=0)
        if len(rows) > 1:
            cov = np.cov(rows, rowvar=False, ddof=1).reshape(d, d)
        else:
            cov = np.zeros((d, d))
        reg = (1.0 - r) * cov + r * (np.trace(cov) / d) * np.eye(d)
        try:
            chol = np.linalg.cholesky(reg)
        except np.linalg.LinAlgError:
            hint = "raise reg above 0" if r == 0 else "class covariance is degenerate"
            raise SingularCovariance(
                f"class {c} covariance not positive definite at reg={r}; {hint}"
            )
        chols[c] = chol
        log_dets[c] = 2.0 * float(np.log(np.diag(chol)).sum())
    log_priors = np.log(counts / n)
    return {
        "means": means,
        "chols": chols,
        "log_dets": log_dets,
        "log_priors": log_priors,
    }, True


def log_posteriors(params: dict, Xs: np.ndarray) -> np.ndarray:
    k, d = params["means"].shape
    out = np.zeros((len(Xs), k))
    for c in range(k):
        diff = (Xs - params["means"][c]).T  # (d, n)
        solved = solve_triangular(params["chols"][c], diff, lower=True)
        maha = np.square(solved).sum(axis=0)
        out[:, c] = (
            params["log_priors"][c]
            - 0.5 * params["log_dets"][c]
            - 0.5 * maha
            - 0.5 * d * np.log(2.0 * np.pi)
        )
    return out


def predict(params: dict, Xs: np.ndarray, k: int, hp: dict):
    logpost = log_posteriors(params, Xs)
    shifted = logpost - logpost.max(axis=1, keepdims=True)
    scores = np.exp(shifted)
    scores /= scores.sum(axis=1, keepdims=True)
    return np.argmax(logpost, axis=1), scores


def state_to_jsonable(params: dict) -> dict:
    return {
        "means": params["means"].tolist(),
        "chols": params["chols"].tolist(),
        "log_dets": params["log_dets"].tolist(),
        "log_priors": params["log_priors"].tolist(),
    }


def state_from_jsonable(state: dict) -> dict:
    return {
        "means": np.asarray(state["means"], dtype=float),
        "chols": np.asarray(state["chols"], dtype=float),
        "log_dets": np.asarray(state["log_dets"], dtype=float),
        "log_priors": np.asarray(state["log_priors"], dtype=float),
    }
