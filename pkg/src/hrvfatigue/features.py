"""Assemble the 18-measure feature vector for RR windows."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .core import FEATURE_NAMES, FREQ_FEATURES, LabeledDataset, RRSeries, Window
from .errors import HRVError
from .frequency import WelchSettings, band_powers
from .nonlinear import nonlinear
from .time_domain import time_domain


@dataclass(frozen=True)
class ExtractionConfig:
    nn50_mode: str = "absolute"
    pnn50_denominator: str = "pairs"
    outlier_gate: tuple[float, float] | None = None
    welch: WelchSettings = field(default_factory=WelchSettings)
    entropy_m: int = 2
    entropy_r_factor: float = 0.2  # r = factor x SDNN of the window


@dataclass(frozen=True)
class FeatureVector:
    """The 18 named measures of one window; NaN marks an undefined value."""

    values: Mapping[str, float]

    def __post_init__(self):
        missing = set(FEATURE_NAMES) - set(self.values)
        if missing:
            raise ValueError(f"missing features: {sorted(missing)}")

    def __getitem__(self, name: str) -> float:
        return self.values[name]

    @property
    def validity(self) -> dict[str, bool]:
        return {n: math.isfinite(self.values[n]) for n in FEATURE_NAMES}

    def as_array(self) -> np.ndarray:
        return np.array([self.values[n] for n in FEATURE_NAMES], dtype=float)


def extract_features(series: RRSeries, config: ExtractionConfig = ExtractionConfig()) -> FeatureVector:
    rr = series.intervals
    if config.outlier_gate is not None:
        lo, hi = config.outlier_gate
        rr = rr[(rr >= lo) & (rr <= hi)]
        series = RRSeries(rr, series.start_time, series.subject_age)

    values = time_domain(series, config.nn50_mode, config.pnn50_denominator).as_dict()
    try:
        values.update(band_powers(series, config.welch).as_dict())
    except HRVError:
        values.update({n: math.nan for n in FREQ_FEATURES})
    r = config.entropy_r_factor * float(rr.std())
    values.update(nonlinear(rr, config.entropy_m, r).as_dict())
    return FeatureVector(values)


def extract_dataset(
    windows: Iterable[Window],
    config: ExtractionConfig = ExtractionConfig(),
    include_partial: bool = False,
) -> LabeledDataset:
    """Feature rows for every full window; unlabelled windows get label -1."""
    rows, labels, ids = [], [], []
    for w in windows:
        if w.partial and not include_partial:
            continue
        rows.append(extract_features(w.series, config).as_array())
        labels.append(-1 if w.label is None else int(w.label))
        ids.append(w.window_id)
    X = np.array(rows, dtype=float).reshape(len(rows), len(FEATURE_NAMES))
    return LabeledDataset(X, np.array(labels, dtype=int), FEATURE_NAMES, tuple(ids))
