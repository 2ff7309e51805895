"""Domain types, RR/HR conversion, intensity zones, windowing and synthetic data."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateSpec,
    EmptySeries,
    InvalidAge,
    NonPositiveInterval,
)

DEFAULT_AGE = 20
DEFAULT_WINDOW_SECONDS = 300.0

FEATURE_NAMES: tuple[str, ...] = (
    "mean_hr", "mean_rr", "sd_hr", "sdnn", "rmssd", "nn50", "pnn50",
    "tp", "hf", "lf", "vlf", "nhf", "nlf", "lf_hf",
    "dfa_alpha1", "dfa_alpha2", "apen", "sampen",
)
TIME_FEATURES = FEATURE_NAMES[:7]
FREQ_FEATURES = FEATURE_NAMES[7:14]
NONLINEAR_FEATURES = FEATURE_NAMES[14:]


class ExerciseState(enum.IntEnum):
    """The five labelled exercise conditions, with stable integer codes."""

    PreExercise = 0
    VigorousDuring = 1
    ModerateDuring = 2
    VigorousPost = 3
    ModeratePost = 4

    @classmethod
    def parse(cls, value) -> "ExerciseState":
        if isinstance(value, cls):
            return value
        text = str(value).strip()
        if text.lstrip("-").isdigit():
            return cls(int(text))
        try:
            return cls[text]
        except KeyError:
            raise ValueError(f"unknown exercise state {value!r}") from None


class Zone(enum.Enum):
    BelowModerate = "BelowModerate"
    Moderate = "Moderate"
    Vigorous = "Vigorous"


@dataclass(frozen=True, eq=False)
class RRSeries:
    """Beat-to-beat intervals in milliseconds.

    ``times_ms`` optionally carries the end time of every beat; when absent the
    cumulative sum of the intervals is used.
    """

    intervals: np.ndarray
    start_time: float | None = None
    subject_age: int | None = None
    times_ms: np.ndarray | None = None

    def __post_init__(self):
        rr = np.array(self.intervals, dtype=float).reshape(-1)
        if rr.size and not np.all(rr > 0):
            raise NonPositiveInterval("every RR interval must be > 0 ms")
        rr.setflags(write=False)
        object.__setattr__(self, "intervals", rr)
        if self.times_ms is not None:
            t = np.array(self.times_ms, dtype=float).reshape(-1)
            if t.shape != rr.shape:
                raise ValueError("times_ms must match intervals in length")
            t.setflags(write=False)
            object.__setattr__(self, "times_ms", t)

    def __len__(self) -> int:
        return self.intervals.size

    @property
    def beat_times_ms(self) -> np.ndarray:
        if self.times_ms is not None:
            return self.times_ms
        return np.cumsum(self.intervals)

    @property
    def duration_ms(self) -> float:
        return float(self.intervals.sum())

    def age(self) -> int:
        return DEFAULT_AGE if self.subject_age is None else self.subject_age


@dataclass(frozen=True, eq=False)
class Window:
    series: RRSeries
    label: ExerciseState | None = None
    window_seconds: float = DEFAULT_WINDOW_SECONDS
    partial: bool = False
    window_id: str = "0"


def hr_from_rr(rr_ms):
    """Heart rate in BPM for an RR interval in ms (scalar or array)."""
    rr = np.asarray(rr_ms, dtype=float)
    if np.any(rr <= 0):
        raise NonPositiveInterval("RR interval must be > 0 ms")
    hr = 60000.0 / rr
    return float(hr) if hr.ndim == 0 else hr


def rr_from_hr(hr_bpm):
    hr = np.asarray(hr_bpm, dtype=float)
    if np.any(hr <= 0):
        raise NonPositiveInterval("heart rate must be > 0 BPM")
    rr = 60000.0 / hr
    return float(rr) if rr.ndim == 0 else rr


def intensity_zone(hr: float, age: int = DEFAULT_AGE) -> Zone:
    """CDC intensity zone from heart rate and age (max HR = 220 - age).

    Moderate is the closed band [50%, 70%] of max HR; above 70% is Vigorous.
    """
    if not 0 < age < 130:
        raise InvalidAge(f"age must be in (0, 130), got {age}")
    if hr <= 0:
        raise NonPositiveInterval("heart rate must be > 0 BPM")
    max_hr = 220 - age
    if hr > 0.7 * max_hr:
        return Zone.Vigorous
    if hr >= 0.5 * max_hr:
        return Zone.Moderate
    return Zone.BelowModerate


def segment_windows(
    series: RRSeries,
    window_seconds: float = DEFAULT_WINDOW_SECONDS,
    label: ExerciseState | None = None,
    include_partial: bool = False,
) -> list[Window]:
    """Cut a recording into consecutive non-overlapping windows.

    A beat belongs to the window in which its interval ends. A window whose
    summed RR time falls outside [0.9, 1.1] x window length is marked partial
    and dropped unless ``include_partial`` is set.
    """
    if len(series) == 0:
        raise EmptySeries("cannot segment an empty series")
    if window_seconds <= 0:
        raise ValueError("window_seconds must be > 0")
    width = window_seconds * 1000.0
    t = series.beat_times_ms
    origin = t[0] - series.intervals[0]
    # small epsilon keeps beats ending exactly on a boundary in the earlier window
    idx = np.ceil((t - origin) / width - 1e-9).astype(int) - 1
    idx = np.maximum(idx, 0)

    windows = []
    for w in np.unique(idx):
        mask = idx == w
        rr = series.intervals[mask]
        total = rr.sum()
        partial = not (0.9 * width <= total <= 1.1 * width)
        if partial and not include_partial:
            continue
        sub = RRSeries(
            rr,
            start_time=series.start_time,
            subject_age=series.subject_age,
            times_ms=None if series.times_ms is None else series.times_ms[mask],
        )
        windows.append(Window(sub, label, window_seconds, partial, str(int(w))))
    return windows


def count_windows(series: RRSeries, window_seconds: float = DEFAULT_WINDOW_SECONDS):
    """(full, partial) window counts; beats are conserved across both."""
    ws = segment_windows(series, window_seconds, include_partial=True)
    full = sum(not w.partial for w in ws)
    return full, len(ws) - full


# --------------------------------------------------------------------------
# Labelled feature datasets


@dataclass(eq=False)
class LabeledDataset:
    """Feature matrix (NaN marks an undefined measure) with exercise labels."""

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...] = FEATURE_NAMES
    window_ids: tuple[str, ...] = field(default=())

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        if self.X.ndim == 1:
            self.X = self.X[:, None]
        self.y = np.asarray(self.y, dtype=int)
        self.feature_names = tuple(self.feature_names)
        if self.X.shape != (self.y.size, len(self.feature_names)):
            raise ValueError(
                f"X shape {self.X.shape} does not match {self.y.size} labels "
                f"x {len(self.feature_names)} features"
            )
        if not self.window_ids:
            self.window_ids = tuple(str(i) for i in range(self.y.size))
        self.window_ids = tuple(str(w) for w in self.window_ids)

    def __len__(self) -> int:
        return self.y.size

    @property
    def classes(self) -> np.ndarray:
        return np.unique(self.y)

    def class_counts(self) -> dict[int, int]:
        values, counts = np.unique(self.y, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.feature_names.index(name)]

    def restrict(self, names: Sequence[str], drop_missing: bool = True) -> "LabeledDataset":
        """Keep only ``names``; rows with an undefined value among them are dropped."""
        cols = [self.feature_names.index(n) for n in names]
        X = self.X[:, cols]
        keep = np.ones(len(self), dtype=bool)
        if drop_missing:
            keep = np.all(np.isfinite(X), axis=1)
        ids = tuple(w for w, k in zip(self.window_ids, keep) if k)
        return LabeledDataset(X[keep], self.y[keep], tuple(names), ids)

    def subset(self, rows) -> "LabeledDataset":
        rows = np.asarray(rows)
        ids = tuple(self.window_ids[i] for i in np.arange(len(self))[rows])
        return LabeledDataset(self.X[rows], self.y[rows], self.feature_names, ids)


# --------------------------------------------------------------------------
# Synthetic data


@dataclass(frozen=True)
class ClassSpec:
    """Generator settings for one exercise state.

    Each window draws its own mean RR from N(rr_mean_ms, window_jitter_ms) and
    then adds per-beat Gaussian noise plus sinusoids at ``lf_hz`` / ``hf_hz``
    with random phase. Gaussian draws are clipped at +-3 sd.
    """

    count: int
    rr_mean_ms: float
    rr_sd_ms: float
    lf_amp_ms: float = 0.0
    hf_amp_ms: float = 0.0
    lf_hz: float = 0.1
    hf_hz: float = 0.25
    window_jitter_ms: float = 0.0

    def min_interval(self) -> float:
        return (
            self.rr_mean_ms
            - 3 * self.window_jitter_ms
            - 3 * self.rr_sd_ms
            - abs(self.lf_amp_ms)
            - abs(self.hf_amp_ms)
        )


REFERENCE_CLASS_COUNTS = {
    ExerciseState.PreExercise: 42,
    ExerciseState.VigorousDuring: 40,
    ExerciseState.ModerateDuring: 12,
    ExerciseState.VigorousPost: 42,
    ExerciseState.ModeratePost: 12,
}

DEFAULT_CLASS_SPECS = {
    ExerciseState.PreExercise: ClassSpec(42, 850.0, 30.0, 25.0, 35.0, window_jitter_ms=40.0),
    ExerciseState.VigorousDuring: ClassSpec(40, 380.0, 6.0, 4.0, 2.0, window_jitter_ms=15.0),
    ExerciseState.ModerateDuring: ClassSpec(12, 520.0, 12.0, 10.0, 6.0, window_jitter_ms=25.0),
    ExerciseState.VigorousPost: ClassSpec(42, 600.0, 15.0, 15.0, 8.0, window_jitter_ms=30.0),
    ExerciseState.ModeratePost: ClassSpec(12, 720.0, 22.0, 20.0, 20.0, window_jitter_ms=35.0),
}


def synthesize_window(
    spec: ClassSpec,
    rng: np.random.Generator,
    window_seconds: float = DEFAULT_WINDOW_SECONDS,
) -> np.ndarray:
    """One window of RR intervals whose total stays within ``window_seconds``."""
    width = window_seconds * 1000.0
    mean = spec.rr_mean_ms + spec.window_jitter_ms * np.clip(rng.standard_normal(), -3, 3)
    phase_lf, phase_hf = rng.uniform(0.0, 2 * np.pi, size=2)
    n_max = int(math.ceil(width / max(spec.min_interval(), 1.0))) + 1
    noise = spec.rr_sd_ms * np.clip(rng.standard_normal(n_max), -3, 3)

    rr = []
    t = 0.0
    for z in noise:
        ts = t / 1000.0
        value = (
            mean
            + z
            + spec.lf_amp_ms * math.sin(2 * math.pi * spec.lf_hz * ts + phase_lf)
            + spec.hf_amp_ms * math.sin(2 * math.pi * spec.hf_hz * ts + phase_hf)
        )
        if t + value > width:
            break
        rr.append(value)
        t += value
    return np.array(rr)


def synthesize_dataset(
    specs: dict[ExerciseState, ClassSpec] | None = None,
    seed: int = 0,
    window_seconds: float = DEFAULT_WINDOW_SECONDS,
    subject_age: int = DEFAULT_AGE,
) -> list[Window]:
    """Labelled synthetic RR windows; a pure function of ``(specs, seed)``.

    The defaults reproduce the 42/40/12/42/12 class histogram.
    """
    specs = DEFAULT_CLASS_SPECS if specs is None else specs
    for state, spec in specs.items():
        if spec.count <= 0:
            raise DegenerateSpec(f"{ExerciseState(state).name}: count must be > 0")
        if spec.rr_sd_ms < 0 or spec.window_jitter_ms < 0:
            raise DegenerateSpec(f"{ExerciseState(state).name}: negative spread")
        if spec.min_interval() <= 0:
            raise DegenerateSpec(
                f"{ExerciseState(state).name}: intervals could go nonpositive "
                f"(worst case {spec.min_interval():.1f} ms)"
            )

    rng = np.random.default_rng(seed)
    windows = []
    for state in sorted(specs, key=int):
        spec = specs[state]
        label = ExerciseState(state)
        for i in range(spec.count):
            rr = synthesize_window(spec, rng, window_seconds)
            windows.append(
                Window(
                    RRSeries(rr, subject_age=subject_age),
                    label,
                    window_seconds,
                    False,
                    f"{label.name}-{i:03d}",
                )
            )
    return windows


def synthesize_feature_dataset(
    class_counts: Iterable[int] | None = None,
    informative: Sequence[str] | None = None,
    n_informative: int = 3,
    separation: float = 4.0,
    seed: int = 0,
    feature_names: Sequence[str] = FEATURE_NAMES,
) -> tuple[LabeledDataset, tuple[str, ...]]:
    """Gaussian feature-space dataset with a few informative columns.

    Informative columns place the class means on a grid ``separation`` sds
    apart (in a random order per column), so every class pair overlaps by at
    most 2*Phi(-separation/2). All other columns are N(0, 1) in every class.
    Returns the dataset and the informative feature names.
    """
    counts = list(REFERENCE_CLASS_COUNTS.values()) if class_counts is None else list(class_counts)
    rng = np.random.default_rng(seed)
    names = tuple(feature_names)
    if informative is None:
        picks = rng.choice(len(names), size=n_informative, replace=False)
        informative = tuple(names[i] for i in sorted(picks))
    informative = tuple(informative)

    y = np.repeat(np.arange(len(counts)), counts)
    X = rng.standard_normal((y.size, len(names)))
    for name in informative:
        j = names.index(name)
        means = rng.permutation(len(counts)) * separation
        X[:, j] += means[y]
    return LabeledDataset(X, y, names), informative
