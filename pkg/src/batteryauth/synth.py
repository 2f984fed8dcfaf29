"""Synthetic cell lab: known-answer cycle and impedance generators.

Each synthetic cell type is a small parameter bundle: a Gaussian peak
mixture that defines its differential-capacity signature, and a Randles
circuit (series resistance, charge-transfer resistance in parallel with
a double-layer capacitance, plus a Warburg diffusion tail) that defines
its impedance. Because every generated record has a closed-form ground
truth, the full pipeline can be verified end to end on a desk without
any external measurement campaign. No electrochemical fidelity is
claimed beyond the qualitative shapes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from .errors import BadSpec
from .records import (
    CycleRecord,
    DatasetCatalog,
    EisSpectrum,
    SampleMeta,
    build_catalog,
    make_cycle,
    make_spectrum,
)
from .seeding import child_seed, rng_from

FREQ_LO_HZ = 0.01
FREQ_HI_HZ = 1.0e4
SOH_START = 100.0
SOH_END = 80.0
MIN_CYCLE_POINTS = 64
MIN_FREQ_POINTS = 8

# Condition anchors: parameter maps are affine around these references.
SOC_REF = 50.0
TEMP_REF_C = 25.0

# Documented affine coefficients (per % SOC, per deg C). Signs follow the
# usual qualitative behaviour: resistances shrink as temperature or SOC
# rises, double-layer capacitance grows slightly with temperature.
R0_SOC_COEF = -0.0008
R0_TEMP_COEF = -0.004
RCT_SOC_COEF = -0.006
RCT_TEMP_COEF = -0.012
CDL_TEMP_COEF = 0.004
WARBURG_SOC_COEF = -0.004
_MIN_FACTOR = 0.05          # keeps every primed parameter positive


@dataclass(frozen=True)
class SohDrift:
    """Linear ageing model: per percent of SOH lost below 100."""

    peak_shift_v_per_percent: float = 0.0
    amplitude_fade_per_percent: float = 0.0


@dataclass(frozen=True)
class SyntheticCellSpec:
    name: str
    architecture: str
    dca_peaks: Tuple[Tuple[float, float, float], ...]   # (mean V, amplitude Ah/V, width V)
    voltage_window: Tuple[float, float]
    randles: Tuple[float, float, float, float]          # (r0, rct, cdl, warburg_sigma)
    noise_std: float = 0.0
    soh_drift: SohDrift = field(default_factory=SohDrift)
    dca_baseline: float = 0.05


def validate_spec(spec: SyntheticCellSpec) -> None:
    v_lo, v_hi = spec.voltage_window
    if not v_lo < v_hi:
        raise BadSpec(f"{spec.name}: voltage window must satisfy v_lo < v_hi, got {spec.voltage_window}")
    for mu, amp, width in spec.dca_peaks:
        if not v_lo <= mu <= v_hi:
            raise BadSpec(f"{spec.name}: peak mean {mu} outside window {spec.voltage_window}")
        if width <= 0:
            raise BadSpec(f"{spec.name}: peak width must be > 0, got {width}")
        if amp < 0:
            raise BadSpec(f"{spec.name}: peak amplitude must be >= 0, got {amp}")
    if any(p < 0 for p in spec.randles):
        raise BadSpec(f"{spec.name}: circuit parameters must be >= 0, got {spec.randles}")
    if spec.noise_std < 0:
        raise BadSpec(f"{spec.name}: noise_std must be >= 0")
    if spec.dca_baseline < 0:
        raise BadSpec(f"{spec.name}: dca_baseline must be >= 0")


def dca_ground_truth(spec: SyntheticCellSpec, voltage: np.ndarray, soh_percent: float) -> np.ndarray:
    """Noiseless dQ/dV at the given voltages: faded, shifted peak mixture."""
    lost = SOH_START - soh_percent
    fade = max(0.0, 1.0 - spec.soh_drift.amplitude_fade_per_percent * lost)
    shift = spec.soh_drift.peak_shift_v_per_percent * lost
    out = np.full_like(voltage, spec.dca_baseline, dtype=float)
    for mu, amp, width in spec.dca_peaks:
        out += amp * fade * np.exp(-((voltage - mu - shift) ** 2) / (2.0 * width**2))
    return out


def gen_cycle(
    spec: SyntheticCellSpec,
    soh_percent: float,
    n_points: int = 512,
    seed: int = 0,
    cell_id: str = "synth-cell",
    cycle_index: int = 0,
    dataset_id: str = "synth",
) -> CycleRecord:
    """One charge cycle: Q(V) as the cumulative trapezoid of the peak mixture.

    Noise perturbs the capacity increments multiplicatively (relative std
    ``spec.noise_std``), which keeps Q monotone for any realistic noise
    level; additive noise on Q itself would break the charge-cycle
    monotonicity contract that ingestion enforces.
    """
    validate_spec(spec)
    if n_points < MIN_CYCLE_POINTS:
        raise BadSpec(f"n_points must be >= {MIN_CYCLE_POINTS}, got {n_points}")
    v_lo, v_hi = spec.voltage_window
    voltage = np.linspace(v_lo, v_hi, n_points)
    dqdv = dca_ground_truth(spec, voltage, soh_percent)
    dv = voltage[1] - voltage[0]
    increments = 0.5 * (dqdv[:-1] + dqdv[1:]) * dv
    if spec.noise_std > 0:
        rng = rng_from(seed, "cycle")
        increments = increments * (1.0 + spec.noise_std * rng.standard_normal(len(increments)))
    capacity = np.concatenate([[0.0], np.cumsum(increments)])
    meta = SampleMeta(
        dataset_id=dataset_id,
        cell_id=cell_id,
        battery_model=spec.name,
        architecture=spec.architecture,
        soh_percent=float(soh_percent),
        cycle_index=int(cycle_index),
    )
    return make_cycle(voltage, capacity, "charge", meta)


def randles_impedance(
    freq_hz: np.ndarray, r0: float, rct: float, cdl: float, warburg_sigma: float
) -> np.ndarray:
    """Complex Z(omega) of the series R + (Rct parallel Cdl) + Warburg circuit."""
    w = 2.0 * np.pi * np.asarray(freq_hz, dtype=float)
    z = r0 + rct / (1.0 + 1j * w * rct * cdl)
    if warburg_sigma > 0:
        z = z + warburg_sigma * (1.0 - 1j) / np.sqrt(w)
    return z


def condition_factors(soc_percent: float, temperature_c: float) -> Tuple[float, float, float, float]:
    """Multipliers for (r0, rct, cdl, warburg) at the given condition."""
    d_soc = soc_percent - SOC_REF
    d_t = temperature_c - TEMP_REF_C
    f_r0 = max(_MIN_FACTOR, 1.0 + R0_SOC_COEF * d_soc + R0_TEMP_COEF * d_t)
    f_rct = max(_MIN_FACTOR, 1.0 + RCT_SOC_COEF * d_soc + RCT_TEMP_COEF * d_t)
    f_cdl = max(_MIN_FACTOR, 1.0 + CDL_TEMP_COEF * d_t)
    f_w = max(_MIN_FACTOR, 1.0 + WARBURG_SOC_COEF * d_soc)
    return f_r0, f_rct, f_cdl, f_w


def gen_eis(
    spec: SyntheticCellSpec,
    soc_percent: float = SOC_REF,
    temperature_c: float = TEMP_REF_C,
    n_freq: int = 128,
    seed: int = 0,
    cell_id: str = "synth-cell",
    cycle_index: int = 0,
    dataset_id: str = "synth",
    soh_percent: float = SOH_START,
) -> EisSpectrum:
    """One impedance sweep on a log grid from 10 mHz to 10 kHz."""
    validate_spec(spec)
    if n_freq < MIN_FREQ_POINTS:
        raise BadSpec(f"n_freq must be >= {MIN_FREQ_POINTS}, got {n_freq}")
    freq = np.logspace(np.log10(FREQ_LO_HZ), np.log10(FREQ_HI_HZ), n_freq)
    r0, rct, cdl, sigma = spec.randles
    f_r0, f_rct, f_cdl, f_w = condition_factors(soc_percent, temperature_c)
    z = randles_impedance(freq, r0 * f_r0, rct * f_rct, cdl * f_cdl, sigma * f_w)
    re, im = z.real.copy(), z.imag.copy()
    if spec.noise_std > 0:
        rng = rng_from(seed, "eis")
        re = re * (1.0 + spec.noise_std * rng.standard_normal(len(re)))
        im = im * (1.0 + spec.noise_std * rng.standard_normal(len(im)))
    meta = SampleMeta(
        dataset_id=dataset_id,
        cell_id=cell_id,
        battery_model=spec.name,
        architecture=spec.architecture,
        soc_percent=float(soc_percent),
        soh_percent=float(soh_percent),
        temperature_c=float(temperature_c),
        cycle_index=int(cycle_index),
    )
    return make_spectrum(freq, re, im, meta)


def _check_dataset_args(specs: Sequence[SyntheticCellSpec], cells: int, per_cell: int) -> None:
    if len(specs) < 2:
        raise BadSpec("dataset generation needs >= 2 cell specs for classification use")
    if cells < 1 or per_cell < 1:
        raise BadSpec("cells_per_spec and records per cell must be >= 1")
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise BadSpec(f"spec names must be unique, got {names}")
    for s in specs:
        validate_spec(s)


def gen_dataset(
    specs: Sequence[SyntheticCellSpec],
    cells_per_spec: int = 10,
    cycles_per_cell: int = 20,
    seed: int = 0,
    n_points: int = 512,
) -> DatasetCatalog:
    """Cycle corpus: every cell ages linearly from 100% to 80% SOH."""
    _check_dataset_args(specs, cells_per_spec, cycles_per_cell)
    soh_path = np.linspace(SOH_START, SOH_END, cycles_per_cell)
    records: List[CycleRecord] = []
    for spec in specs:
        for cell in range(cells_per_spec):
            cell_id = f"{spec.name}-c{cell:02d}"
            for cyc in range(cycles_per_cell):
                records.append(
                    gen_cycle(
                        spec,
                        soh_percent=float(soh_path[cyc]),
                        n_points=n_points,
                        seed=child_seed(seed, "cycle", spec.name, cell, cyc),
                        cell_id=cell_id,
                        cycle_index=cyc,
                        dataset_id="synth-dca",
                    )
                )
    return build_catalog(records)


def gen_eis_dataset(
    specs: Sequence[SyntheticCellSpec],
    cells_per_spec: int = 5,
    sweeps_per_cell: int = 8,
    seed: int = 0,
    n_freq: int = 128,
) -> DatasetCatalog:
    """Sweep corpus with per-sweep SOC in [20, 90] and temperature in [5, 45]."""
    _check_dataset_args(specs, cells_per_spec, sweeps_per_cell)
    soh_path = np.linspace(SOH_START, SOH_END, sweeps_per_cell)
    records: List[EisSpectrum] = []
    for spec in specs:
        for cell in range(cells_per_spec):
            cell_id = f"{spec.name}-c{cell:02d}"
            for sweep in range(sweeps_per_cell):
                s = child_seed(seed, "sweep", spec.name, cell, sweep)
                cond = rng_from(s, "condition")
                records.append(
                    gen_eis(
                        spec,
                        soc_percent=float(cond.uniform(20.0, 90.0)),
                        temperature_c=float(cond.uniform(5.0, 45.0)),
                        n_freq=n_freq,
                        seed=s,
                        cell_id=cell_id,
                        cycle_index=sweep,
                        dataset_id="synth-eis",
                        soh_percent=float(soh_path[sweep]),
                    )
                )
    return build_catalog(records)


def demo_specs(noise_std: float = 0.02) -> Tuple[SyntheticCellSpec, ...]:
    """Five distinct cell types over three architectures.

    Peak signatures differ in count, location, and amplitude; two pairs
    share an architecture so architecture labels (3 classes) and model
    labels (5 classes) give genuinely different tasks.
    """
    drift = SohDrift(peak_shift_v_per_percent=0.001, amplitude_fade_per_percent=0.004)
    window = (3.0, 4.2)
    return (
        SyntheticCellSpec(
            name="alpha",
            architecture="layered-oxide",
            dca_peaks=((3.45, 2.0, 0.04), (3.75, 1.2, 0.05), (4.05, 0.8, 0.04)),
            voltage_window=window,
            randles=(0.015, 0.030, 1.2, 0.003),
            noise_std=noise_std,
            soh_drift=drift,
        ),
        SyntheticCellSpec(
            name="bravo",
            architecture="layered-oxide",
            dca_peaks=((3.55, 1.6, 0.05), (3.95, 1.5, 0.04)),
            voltage_window=window,
            randles=(0.022, 0.045, 0.9, 0.005),
            noise_std=noise_std,
            soh_drift=drift,
        ),
        SyntheticCellSpec(
            name="charlie",
            architecture="olivine",
            dca_peaks=((3.30, 2.4, 0.03), (3.42, 1.0, 0.06)),
            voltage_window=window,
            randles=(0.030, 0.060, 0.6, 0.007),
            noise_std=noise_std,
            soh_drift=drift,
        ),
        SyntheticCellSpec(
            name="delta",
            architecture="olivine",
            dca_peaks=((3.35, 1.4, 0.05), (3.60, 0.9, 0.04), (3.85, 1.1, 0.05)),
            voltage_window=window,
            randles=(0.026, 0.075, 0.7, 0.009),
            noise_std=noise_std,
            soh_drift=drift,
        ),
        SyntheticCellSpec(
            name="echo",
            architecture="spinel",
            dca_peaks=((3.65, 2.2, 0.04), (4.10, 1.8, 0.03)),
            voltage_window=window,
            randles=(0.018, 0.090, 1.5, 0.004),
            noise_std=noise_std,
            soh_drift=drift,
        ),
    )


# === spec files ===

def spec_to_json_dict(spec: SyntheticCellSpec) -> dict:
    return {
        "name": spec.name,
        "architecture": spec.architecture,
        "dca_peaks": [list(p) for p in spec.dca_peaks],
        "voltage_window": list(spec.voltage_window),
        "randles": {
            "r0": spec.randles[0],
            "rct": spec.randles[1],
            "cdl": spec.randles[2],
            "warburg_sigma": spec.randles[3],
        },
        "noise_std": spec.noise_std,
        "soh_drift": {
            "peak_shift_v_per_percent": spec.soh_drift.peak_shift_v_per_percent,
            "amplitude_fade_per_percent": spec.soh_drift.amplitude_fade_per_percent,
        },
        "dca_baseline": spec.dca_baseline,
    }


_SPEC_KEYS = {
    "name", "architecture", "dca_peaks", "voltage_window",
    "randles", "noise_std", "soh_drift", "dca_baseline",
}
_RANDLES_KEYS = {"r0", "rct", "cdl", "warburg_sigma"}
_DRIFT_KEYS = {"peak_shift_v_per_percent", "amplitude_fade_per_percent"}


def spec_from_json_dict(data: dict) -> SyntheticCellSpec:
    if not isinstance(data, dict):
        raise BadSpec(f"cell spec must be an object, got {type(data).__name__}")
    unknown = set(data) - _SPEC_KEYS
    if unknown:
        raise BadSpec(f"unknown cell-spec keys: {sorted(unknown)}")
    missing = {"name", "architecture", "dca_peaks", "voltage_window", "randles"} - set(data)
    if missing:
        raise BadSpec(f"cell spec missing keys: {sorted(missing)}")
    try:
        peaks = tuple((float(m), float(a), float(w)) for m, a, w in data["dca_peaks"])
        window = tuple(float(v) for v in data["voltage_window"])
        if len(window) != 2:
            raise BadSpec("voltage_window must have exactly 2 entries")
        r = data["randles"]
        if not isinstance(r, dict) or set(r) - _RANDLES_KEYS:
            raise BadSpec(f"randles must be an object with keys {sorted(_RANDLES_KEYS)}")
        randles = tuple(float(r.get(k, 0.0)) for k in ("r0", "rct", "cdl", "warburg_sigma"))
        d = data.get("soh_drift", {})
        if not isinstance(d, dict) or set(d) - _DRIFT_KEYS:
            raise BadSpec(f"soh_drift must be an object with keys {sorted(_DRIFT_KEYS)}")
        drift = SohDrift(
            peak_shift_v_per_percent=float(d.get("peak_shift_v_per_percent", 0.0)),
            amplitude_fade_per_percent=float(d.get("amplitude_fade_per_percent", 0.0)),
        )
        spec = SyntheticCellSpec(
            name=str(data["name"]),
            architecture=str(data["architecture"]),
            dca_peaks=peaks,
            voltage_window=window,        # type: ignore[arg-type]
            randles=randles,              # type: ignore[arg-type]
            noise_std=float(data.get("noise_std", 0.0)),
            soh_drift=drift,
            dca_baseline=float(data.get("dca_baseline", 0.05)),
        )
    except BadSpec:
        raise
    except (TypeError, ValueError) as exc:
        raise BadSpec(f"malformed cell spec: {exc}") from exc
    validate_spec(spec)
    return spec


def specs_to_json(specs: Sequence[SyntheticCellSpec]) -> str:
    return json.dumps([spec_to_json_dict(s) for s in specs], sort_keys=True, indent=2) + "\n"


def specs_from_json(text: str) -> Tuple[SyntheticCellSpec, ...]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BadSpec(f"cell-spec file is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise BadSpec("cell-spec file must contain a JSON list")
    return tuple(spec_from_json_dict(d) for d in data)
