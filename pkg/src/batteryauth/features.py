"""Fixed feature catalog and deterministic extraction.

The catalog enumerates 137 named features per channel:

    13 basic statistics
     9 quantiles                (0.1 .. 0.9)
     7 autocorrelations         (lags 1, 2, 3, 5, 10, 20, 50)
     4 peak counts              (supports 1, 3, 5, 10)
     8 range counts             (8 equal sub-intervals of [min, max])
    32 FFT coefficients         (abs and angle, k = 0 .. 15)
    64 CWT coefficients         (Ricker widths 2, 5, 10, 20 at 16 positions)

Entry order is fixed and channel blocks are concatenated with ch0_/ch1_
prefixes when two channels are extracted, so a catalog version plus a
channel count fully determines vector layout. Non-finite results are
imputed to 0 and counted per vector.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .dca import DcaConfig, process_cycle
from .eis import EisConfig, process_spectrum
from .errors import (
    BadInterval,
    BadWidth,
    CatalogMismatch,
    EmptySeries,
    IndexOutOfRange,
    UnsupportedChannelCount,
)
from .parallel import ordered_map
from .records import CycleRecord, DatasetCatalog, EisSpectrum, SampleMeta

QUANTILE_QS = tuple(round(0.1 * i, 1) for i in range(1, 10))
AUTOCORR_LAGS = (1, 2, 3, 5, 10, 20, 50)
PEAK_SUPPORTS = (1, 3, 5, 10)
RANGE_BINS = 8
FFT_KS = tuple(range(16))
CWT_WIDTHS = (2, 5, 10, 20)
CWT_POSITIONS = 16

BASIC_FAMILIES = (
    "mean", "std", "variance", "skewness", "kurtosis", "min", "max", "median",
    "abs_energy", "mean_abs_change", "linear_trend_slope",
    "count_above_mean", "count_below_mean",
)

FEATURES_PER_CHANNEL = (
    len(BASIC_FAMILIES) + len(QUANTILE_QS) + len(AUTOCORR_LAGS) + len(PEAK_SUPPORTS)
    + RANGE_BINS + 2 * len(FFT_KS) + len(CWT_WIDTHS) * CWT_POSITIONS
)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    family: str
    params: tuple


@dataclass(frozen=True)
class FeatureCatalog:
    entries: Tuple[CatalogEntry, ...]
    version: str
    channels: int

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(e.name for e in self.entries)


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    catalog_version: str
    imputed_count: int


def _channel_entries(prefix: str) -> List[CatalogEntry]:
    entries = [CatalogEntry(prefix + fam, fam, ()) for fam in BASIC_FAMILIES]
    entries += [CatalogEntry(f"{prefix}quantile_{q}", "quantile", (q,)) for q in QUANTILE_QS]
    entries += [
        CatalogEntry(f"{prefix}autocorrelation_{lag}", "autocorrelation", (lag,))
        for lag in AUTOCORR_LAGS
    ]
    entries += [
        CatalogEntry(f"{prefix}number_peaks_{n}", "number_peaks", (n,)) for n in PEAK_SUPPORTS
    ]
    entries += [
        CatalogEntry(f"{prefix}range_count_{b}", "range_count", (b, RANGE_BINS))
        for b in range(RANGE_BINS)
    ]
    entries += [CatalogEntry(f"{prefix}fft_abs_{k}", "fft_abs", (k,)) for k in FFT_KS]
    entries += [CatalogEntry(f"{prefix}fft_angle_{k}", "fft_angle", (k,)) for k in FFT_KS]
    entries += [
        CatalogEntry(f"{prefix}cwt_w{w}_p{p}", "cwt", (w, p))
        for w in CWT_WIDTHS
        for p in range(CWT_POSITIONS)
    ]
    return entries


def catalog_default(channels: int) -> FeatureCatalog:
    """The versioned default catalog for 1 (dQ/dV) or 2 (EIS) channels."""
    if channels == 1:
        entries = _channel_entries("")
    elif channels == 2:
        entries = _channel_entries("ch0_") + _channel_entries("ch1_")
    else:
        raise UnsupportedChannelCount(f"channels must be 1 or 2, got {channels}")
    return FeatureCatalog(entries=tuple(entries), version=f"v1:ch{channels}", channels=channels)


# === single-feature calculators (exposed for direct verification) ===

def feature_quantile(x: Sequence[float], q: float) -> float:
    """Linear-interpolation quantile of sorted x."""
    x = np.asarray(x, dtype=float)
    if len(x) == 0:
        raise EmptySeries("quantile of an empty series")
    if not 0 < q < 1:
        raise BadInterval(f"q must lie in (0, 1), got {q}")
    return float(np.quantile(x, q, method="linear"))


def feature_autocorrelation(x: Sequence[float], lag: int) -> float:
    """R(l) = sum_t (x_t - mu)(x_{t+l} - mu) / ((n - l) * var), population moments.

    Returns nan on zero variance; extraction imputes that to 0.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    if not 0 <= lag < n:
        raise IndexOutOfRange(f"lag {lag} out of range for series of length {n}")
    mu = x.mean()
    var = x.var()
    if var == 0:
        return float("nan")
    if lag == 0:
        return 1.0
    centered = x - mu
    num = float(np.dot(centered[:-lag], centered[lag:]))
    return num / ((n - lag) * var)


def feature_number_peaks(x: Sequence[float], support: int) -> int:
    """Count samples strictly greater than all `support` neighbors per side."""
    if support < 1:
        raise BadInterval(f"peak support must be >= 1, got {support}")
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 2 * support + 1:
        return 0
    core = x[support : n - support]
    ok = np.ones(len(core), dtype=bool)
    for j in range(1, support + 1):
        ok &= core > x[support - j : n - support - j]
        ok &= core > x[support + j : n - support + j]
    return int(ok.sum())


def feature_range_count(x: Sequence[float], lo: float, hi: float) -> int:
    """Count samples with lo <= x < hi."""
    if not lo < hi:
        raise BadInterval(f"need lo < hi, got [{lo}, {hi})")
    x = np.asarray(x, dtype=float)
    return int(np.count_nonzero((x >= lo) & (x < hi)))


def feature_fft_coefficient(x: Sequence[float], k: int) -> Tuple[float, float]:
    """(abs, angle) of the k-th unnormalized DFT coefficient."""
    x = np.asarray(x, dtype=float)
    if not 0 <= k < len(x):
        raise IndexOutOfRange(f"k {k} out of range for series of length {len(x)}")
    coeff = np.fft.fft(x)[k]
    return float(np.abs(coeff)), float(np.angle(coeff))


def ricker_kernel(width: float) -> np.ndarray:
    """Ricker (Mexican hat) wavelet sampled at integer offsets |t| <= 8*width."""
    if width <= 0:
        raise BadWidth(f"wavelet width must be > 0, got {width}")
    half = int(np.ceil(8 * width))
    t = np.arange(-half, half + 1, dtype=float)
    amp = 2.0 / (np.sqrt(3.0 * width) * np.pi**0.25)
    return amp * (1.0 - t**2 / width**2) * np.exp(-(t**2) / (2.0 * width**2))


def feature_cwt_coefficient(x: Sequence[float], width: float, position: int) -> float:
    """Ricker-wavelet convolution value at `position` (zero-padded edges)."""
    x = np.asarray(x, dtype=float)
    if not 0 <= position < len(x):
        raise IndexOutOfRange(f"position {position} out of range for length {len(x)}")
    conv = np.convolve(x, ricker_kernel(width), mode="same")
    return float(conv[position])


def cwt_positions(n: int, count: int = CWT_POSITIONS) -> np.ndarray:
    """`count` sample indices spread evenly over a length-n series."""
    return np.round(np.linspace(0, n - 1, count)).astype(int)


# === whole-channel extraction ===

def _basic_block(x: np.ndarray) -> List[float]:
    n = len(x)
    mu = float(x.mean())
    var = float(x.var())
    std = float(np.sqrt(var))
    centered = x - mu
    if var > 0:
        m3 = float((centered**3).mean())
        m4 = float((centered**4).mean())
        skew = m3 / var**1.5
        kurt = m4 / var**2 - 3.0
    else:
        skew = float("nan")
        kurt = float("nan")
    diffs = np.abs(np.diff(x))
    mac = float(diffs.mean()) if n > 1 else 0.0
    if n > 1:
        t = np.arange(n, dtype=float)
        tc = t - t.mean()
        slope = float(np.dot(tc, centered) / np.dot(tc, tc))
    else:
        slope = 0.0
    return [
        mu, std, var, skew, kurt,
        float(x.min()), float(x.max()), float(np.median(x)),
        float(np.dot(x, x)), mac, slope,
        float(np.count_nonzero(x > mu)), float(np.count_nonzero(x < mu)),
    ]


def _channel_block(x: np.ndarray) -> np.ndarray:
    n = len(x)
    if n == 0:
        raise EmptySeries("cannot extract features from an empty channel")
    out: List[float] = _basic_block(x)
    out.extend(float(np.quantile(x, q, method="linear")) for q in QUANTILE_QS)
    out.extend(
        feature_autocorrelation(x, lag) if lag < n else float("nan") for lag in AUTOCORR_LAGS
    )
    out.extend(float(feature_number_peaks(x, s)) for s in PEAK_SUPPORTS)
    lo, hi = float(x.min()), float(x.max())
    if hi > lo:
        edges = np.linspace(lo, hi, RANGE_BINS + 1)
        # last bin closed on the right so the bins partition every sample
        edges[-1] = np.nextafter(hi, np.inf)
        counts, _ = np.histogram(x, bins=edges)
        out.extend(float(c) for c in counts)
    else:
        out.extend([float("nan")] * RANGE_BINS)
    fft = np.fft.fft(x)
    for k in FFT_KS:
        out.append(float(np.abs(fft[k])) if k < n else float("nan"))
    for k in FFT_KS:
        out.append(float(np.angle(fft[k])) if k < n else float("nan"))
    positions = cwt_positions(n)
    for w in CWT_WIDTHS:
        conv = np.convolve(x, ricker_kernel(w), mode="same")
        out.extend(float(conv[p]) for p in positions)
    return np.asarray(out, dtype=float)


def extract_features(
    channels: Sequence[np.ndarray], catalog: FeatureCatalog
) -> FeatureVector:
    """Extract the catalog's features from the given channels, in order."""
    if len(channels) != catalog.channels:
        raise CatalogMismatch(
            f"catalog {catalog.version} expects {catalog.channels} channels, got {len(channels)}"
        )
    blocks = [_channel_block(np.asarray(ch, dtype=float)) for ch in channels]
    values = np.concatenate(blocks)
    if len(values) != len(catalog):
        raise CatalogMismatch(
            f"extracted {len(values)} values for a {len(catalog)}-entry catalog"
        )
    bad = ~np.isfinite(values)
    if bad.any():
        values = np.where(bad, 0.0, values)
    return FeatureVector(
        values=values, catalog_version=catalog.version, imputed_count=int(bad.sum())
    )


# === feature matrices ===

@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Rectangular feature rows plus per-row class labels and metadata."""

    values: np.ndarray                 # (n, F)
    model_id: np.ndarray               # (n,)
    arch_id: np.ndarray                # (n,)
    metas: Tuple[SampleMeta, ...]
    catalog_version: str
    feature_names: Tuple[str, ...]
    model_names: Tuple[str, ...]       # class id -> label
    arch_names: Tuple[str, ...]
    imputed_counts: np.ndarray         # (n,)

    def __len__(self) -> int:
        return len(self.values)


def matrix_take(matrix: FeatureMatrix, idx: np.ndarray) -> FeatureMatrix:
    """Row subset / reorder; labels and metadata follow."""
    idx = np.asarray(idx, dtype=int)
    return FeatureMatrix(
        values=matrix.values[idx],
        model_id=matrix.model_id[idx],
        arch_id=matrix.arch_id[idx],
        metas=tuple(matrix.metas[i] for i in idx),
        catalog_version=matrix.catalog_version,
        feature_names=matrix.feature_names,
        model_names=matrix.model_names,
        arch_names=matrix.arch_names,
        imputed_counts=matrix.imputed_counts[idx],
    )


def labels_for(matrix: FeatureMatrix, target: str) -> Tuple[np.ndarray, Tuple[str, ...]]:
    """(class ids, id->name table) for target "model" or "architecture"."""
    if target == "model":
        return matrix.model_id, matrix.model_names
    if target == "architecture":
        return matrix.arch_id, matrix.arch_names
    raise CatalogMismatch(f"unknown label target {target!r}")


def _build_matrix(
    vectors: Sequence[FeatureVector], records, data_catalog: DatasetCatalog, feature_catalog
) -> FeatureMatrix:
    values = np.stack([fv.values for fv in vectors])
    model_id = np.array(
        [data_catalog.model_labels[r.meta.battery_model] for r in records], dtype=int
    )
    arch_id = np.array(
        [data_catalog.arch_labels[r.meta.architecture] for r in records], dtype=int
    )
    return FeatureMatrix(
        values=values,
        model_id=model_id,
        arch_id=arch_id,
        metas=tuple(r.meta for r in records),
        catalog_version=feature_catalog.version,
        feature_names=feature_catalog.names,
        model_names=tuple(data_catalog.model_names),
        arch_names=tuple(data_catalog.arch_names),
        imputed_counts=np.array([fv.imputed_count for fv in vectors], dtype=int),
    )


def matrix_from_cycles(
    data: DatasetCatalog,
    config: DcaConfig = DcaConfig(),
    catalog: Optional[FeatureCatalog] = None,
    threads: int = 1,
) -> FeatureMatrix:
    """Process every cycle record and extract the 1-channel catalog."""
    catalog = catalog or catalog_default(1)

    def one(rec: CycleRecord) -> FeatureVector:
        series = process_cycle(rec, config)
        return extract_features([series.dqdv], catalog)

    vectors = ordered_map(one, data.records, threads=threads)
    return _build_matrix(vectors, data.records, data, catalog)


def matrix_from_spectra(
    data: DatasetCatalog,
    config: EisConfig = EisConfig(),
    catalog: Optional[FeatureCatalog] = None,
    threads: int = 1,
) -> FeatureMatrix:
    """Process every EIS sweep and extract the 2-channel catalog."""
    catalog = catalog or catalog_default(2)

    def one(rec: EisSpectrum) -> FeatureVector:
        ch = process_spectrum(rec, config)
        return extract_features([ch.re_z, ch.neg_im_z], catalog)

    vectors = ordered_map(one, data.records, threads=threads)
    return _build_matrix(vectors, data.records, data, catalog)


# === persistence ===

def matrix_to_csv(matrix: FeatureMatrix) -> str:
    """Header = feature names + label columns; one row per sample."""
    header = list(matrix.feature_names) + ["battery_model", "architecture"]
    lines = [",".join(header)]
    for i in range(len(matrix)):
        row = [repr(float(v)) for v in matrix.values[i]]
        row.append(matrix.model_names[matrix.model_id[i]])
        row.append(matrix.arch_names[matrix.arch_id[i]])
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _meta_to_dict(meta: SampleMeta) -> dict:
    return {
        "dataset_id": meta.dataset_id,
        "cell_id": meta.cell_id,
        "battery_model": meta.battery_model,
        "architecture": meta.architecture,
        "soc_percent": meta.soc_percent,
        "soh_percent": meta.soh_percent,
        "temperature_c": meta.temperature_c,
        "cycle_index": meta.cycle_index,
    }


def save_matrix(matrix: FeatureMatrix, path_base: str) -> None:
    """Write `<base>.npz` (values + labels) and `<base>.json` sidecar."""
    np.savez_compressed(
        path_base + ".npz",
        values=matrix.values,
        model_id=matrix.model_id,
        arch_id=matrix.arch_id,
        imputed_counts=matrix.imputed_counts,
    )
    sidecar = {
        "catalog_version": matrix.catalog_version,
        "feature_names": list(matrix.feature_names),
        "model_names": list(matrix.model_names),
        "arch_names": list(matrix.arch_names),
        "metas": [_meta_to_dict(m) for m in matrix.metas],
        "total_imputed": int(matrix.imputed_counts.sum()),
    }
    with open(path_base + ".json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_matrix(path_base: str) -> FeatureMatrix:
    arrays = np.load(path_base + ".npz")
    with open(path_base + ".json", "r", encoding="utf-8") as fh:
        sidecar = json.load(fh)
    metas = tuple(SampleMeta(**{k: v for k, v in m.items()}) for m in sidecar["metas"])
    return FeatureMatrix(
        values=arrays["values"],
        model_id=arrays["model_id"],
        arch_id=arrays["arch_id"],
        metas=metas,
        catalog_version=sidecar["catalog_version"],
        feature_names=tuple(sidecar["feature_names"]),
        model_names=tuple(sidecar["model_names"]),
        arch_names=tuple(sidecar["arch_names"]),
        imputed_counts=arrays["imputed_counts"],
    )
