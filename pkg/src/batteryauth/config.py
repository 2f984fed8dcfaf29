"""Run configuration: one JSON document drives a whole experiment.

Validation is strict and total before any work starts: unknown keys are
rejected at every nesting level, and every error names the offending
field by dotted path, so a typo like "eval.ballances" fails fast
instead of silently running with defaults.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .dca import DcaConfig
from .eis import EisConfig
from .errors import BatteryAuthError, ConfigError
from .evaluate import BALANCE_LEVELS
from .models import make_spec, ModelSpec

PIPELINES = ("dca", "eis")
TASKS = ("identification", "authentication")
TARGETS = ("architecture", "model")
DEFAULT_MODEL_KINDS = ("RandomForest",)


@dataclass(frozen=True)
class SynthConfig:
    specs_path: str = "demo"        # "demo" or a path to a cell-spec JSON list
    cells_per_spec: int = 10
    records_per_cell: int = 20
    n_points: int = 512
    n_freq: int = 128
    seed: int = 7


@dataclass(frozen=True)
class SelectionConfig:
    enabled: bool
    fdr: float = 0.05


@dataclass(frozen=True)
class EvalSection:
    seed: int = 0
    train_ratio: float = 0.8
    folds: int = 5
    balances: Tuple[int, ...] = BALANCE_LEVELS
    tasks: Tuple[str, ...] = TASKS
    targets: Tuple[str, ...] = TARGETS
    undersample: bool = True


@dataclass(frozen=True)
class RunConfig:
    pipeline: str
    output_dir: str
    threads: int
    input_path: Optional[str]
    synth: Optional[SynthConfig]
    dca: DcaConfig
    eis: EisConfig
    selection: SelectionConfig
    models: Tuple[ModelSpec, ...]
    eval: EvalSection
    snapshot: dict = field(default_factory=dict)


def _reject_unknown(data: dict, allowed: set, path: str) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        where = path or "config"
        raise ConfigError(f"{where}: unknown key(s) {unknown}")


def _get(data: dict, key: str, kind, path: str, default=None, required: bool = False):
    if key not in data:
        if required:
            raise ConfigError(f"{path}{key}: required key is missing")
        return default
    value = data[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if kind is not None and not isinstance(value, kind):
        want = kind.__name__ if not isinstance(kind, tuple) else "/".join(k.__name__ for k in kind)
        raise ConfigError(f"{path}{key}: expected {want}, got {type(value).__name__}")
    if kind is int and isinstance(value, bool):
        raise ConfigError(f"{path}{key}: expected int, got bool")
    return value


def _positive(value, key: str, path: str):
    if value <= 0:
        raise ConfigError(f"{path}{key}: must be > 0, got {value}")
    return value


def _parse_dca(data: dict) -> DcaConfig:
    path = "dca."
    _reject_unknown(data, {"eps_volts", "savgol_window", "savgol_polyorder", "resample_n"}, "dca")
    cfg = DcaConfig(
        eps_volts=_positive(_get(data, "eps_volts", float, path, 1e-4), "eps_volts", path),
        savgol_window=_get(data, "savgol_window", int, path, 51),
        savgol_polyorder=_get(data, "savgol_polyorder", int, path, 3),
        resample_n=_get(data, "resample_n", int, path, 512),
    )
    if cfg.savgol_window < 3 or cfg.savgol_window % 2 == 0:
        raise ConfigError(f"dca.savgol_window: must be odd and >= 3, got {cfg.savgol_window}")
    if cfg.savgol_polyorder < 0 or cfg.savgol_polyorder >= cfg.savgol_window:
        raise ConfigError(
            f"dca.savgol_polyorder: must be in [0, savgol_window), got {cfg.savgol_polyorder}"
        )
    if cfg.resample_n < 8:
        raise ConfigError(f"dca.resample_n: must be >= 8, got {cfg.resample_n}")
    return cfg


def _parse_eis(data: dict) -> EisConfig:
    _reject_unknown(data, {"resample_m"}, "eis")
    m = _get(data, "resample_m", int, "eis.", 128)
    if m < 8:
        raise ConfigError(f"eis.resample_m: must be >= 8, got {m}")
    return EisConfig(resample_m=m)


def _parse_synth(data: dict) -> SynthConfig:
    path = "synth."
    _reject_unknown(
        data,
        {"specs", "cells_per_spec", "records_per_cell", "n_points", "n_freq", "seed"},
        "synth",
    )
    return SynthConfig(
        specs_path=_get(data, "specs", str, path, "demo"),
        cells_per_spec=_positive(_get(data, "cells_per_spec", int, path, 10), "cells_per_spec", path),
        records_per_cell=_positive(
            _get(data, "records_per_cell", int, path, 20), "records_per_cell", path
        ),
        n_points=_positive(_get(data, "n_points", int, path, 512), "n_points", path),
        n_freq=_positive(_get(data, "n_freq", int, path, 128), "n_freq", path),
        seed=_get(data, "seed", int, path, 7),
    )


def _parse_selection(data: dict, pipeline: str) -> SelectionConfig:
    _reject_unknown(data, {"enabled", "fdr"}, "selection")
    # impedance features benefit from pruning; differential-capacity runs
    # keep the full catalog unless asked otherwise
    default_enabled = pipeline == "eis"
    enabled = _get(data, "enabled", bool, "selection.", default_enabled)
    fdr = _get(data, "fdr", float, "selection.", 0.05)
    if not 0.0 < fdr < 1.0:
        raise ConfigError(f"selection.fdr: must be in (0, 1), got {fdr}")
    return SelectionConfig(enabled=enabled, fdr=fdr)


def _parse_models(items, base_seed: int) -> Tuple[ModelSpec, ...]:
    if not isinstance(items, list) or not items:
        raise ConfigError("models: must be a non-empty list of model objects")
    specs = []
    for i, item in enumerate(items):
        path = f"models[{i}]"
        if not isinstance(item, dict):
            raise ConfigError(f"{path}: expected an object, got {type(item).__name__}")
        _reject_unknown(item, {"kind", "grid", "seed"}, path)
        kind = _get(item, "kind", str, path + ".", required=True)
        grid = _get(item, "grid", dict, path + ".", None)
        seed = _get(item, "seed", int, path + ".", base_seed)
        try:
            specs.append(make_spec(kind, grid=grid, seed=seed))
        except BatteryAuthError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return tuple(specs)


def _parse_eval(data: dict) -> EvalSection:
    path = "eval."
    _reject_unknown(
        data,
        {"seed", "train_ratio", "folds", "balances", "tasks", "targets", "undersample"},
        "eval",
    )
    ratio = _get(data, "train_ratio", float, path, 0.8)
    if not 0.5 <= ratio < 1.0:
        raise ConfigError(f"eval.train_ratio: must be in [0.5, 1), got {ratio}")
    folds = _get(data, "folds", int, path, 5)
    if folds < 2:
        raise ConfigError(f"eval.folds: must be >= 2, got {folds}")
    balances = _get(data, "balances", list, path, list(BALANCE_LEVELS))
    for b in balances:
        if b not in BALANCE_LEVELS:
            raise ConfigError(f"eval.balances: {b} not in {list(BALANCE_LEVELS)}")
    if not balances:
        raise ConfigError("eval.balances: must not be empty")
    tasks = _get(data, "tasks", list, path, list(TASKS))
    for t in tasks:
        if t not in TASKS:
            raise ConfigError(f"eval.tasks: {t!r} not in {list(TASKS)}")
    if not tasks:
        raise ConfigError("eval.tasks: must not be empty")
    targets = _get(data, "targets", list, path, list(TARGETS))
    for t in targets:
        if t not in TARGETS:
            raise ConfigError(f"eval.targets: {t!r} not in {list(TARGETS)}")
    if not targets:
        raise ConfigError("eval.targets: must not be empty")
    return EvalSection(
        seed=_get(data, "seed", int, path, 0),
        train_ratio=ratio,
        folds=folds,
        balances=tuple(int(b) for b in balances),
        tasks=tuple(tasks),
        targets=tuple(targets),
        undersample=_get(data, "undersample", bool, path, True),
    )


_TOP_KEYS = {
    "pipeline", "output_dir", "threads", "input", "synth",
    "dca", "eis", "selection", "models", "eval",
}


def config_from_json_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"config root must be an object, got {type(data).__name__}")
    _reject_unknown(data, _TOP_KEYS, "")
    pipeline = _get(data, "pipeline", str, "", required=True)
    if pipeline not in PIPELINES:
        raise ConfigError(f"pipeline: must be one of {list(PIPELINES)}, got {pipeline!r}")
    output_dir = _get(data, "output_dir", str, "", "out")
    threads = _get(data, "threads", int, "", 1)
    if threads < 1:
        raise ConfigError(f"threads: must be >= 1, got {threads}")

    input_block = _get(data, "input", dict, "", None)
    input_path = None
    if input_block is not None:
        _reject_unknown(input_block, {"csv"}, "input")
        input_path = _get(input_block, "csv", str, "input.", required=True)
    synth_block = _get(data, "synth", dict, "", None)
    synth = _parse_synth(synth_block) if synth_block is not None else None
    if input_path is None and synth is None:
        raise ConfigError("config needs either an 'input' or a 'synth' section")
    if input_path is not None and synth is not None:
        raise ConfigError("'input' and 'synth' sections are mutually exclusive")

    eval_section = _parse_eval(_get(data, "eval", dict, "", {}) or {})
    models_items = data.get("models")
    if models_items is None:
        models_items = [{"kind": k} for k in DEFAULT_MODEL_KINDS]
    return RunConfig(
        pipeline=pipeline,
        output_dir=output_dir,
        threads=threads,
        input_path=input_path,
        synth=synth,
        dca=_parse_dca(_get(data, "dca", dict, "", {}) or {}),
        eis=_parse_eis(_get(data, "eis", dict, "", {}) or {}),
        selection=_parse_selection(_get(data, "selection", dict, "", {}) or {}, pipeline),
        models=_parse_models(models_items, eval_section.seed),
        eval=eval_section,
        snapshot=data,
    )


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return config_from_json_dict(data)
