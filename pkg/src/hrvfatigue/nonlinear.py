"""Nonlinear HRV measures: DFA alpha1/alpha2, approximate and sample entropy."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import RRSeries
from .errors import (
    DegenerateSeries,
    HRVError,
    NonPositiveTolerance,
    NoTemplateMatches,
    TooShort,
)

SHORT_BOXES = (4, 16)
LONG_BOXES = (16, 64)
DFA_MIN_BEATS = 100


@dataclass(frozen=True)
class NonlinearMetrics:
    dfa_alpha1: float
    dfa_alpha2: float
    apen: float
    sampen: float

    @property
    def validity(self) -> dict[str, bool]:
        return {k: math.isfinite(v) for k, v in asdict(self).items()}

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def _values(series) -> np.ndarray:
    if isinstance(series, RRSeries):
        return series.intervals
    return np.asarray(series, dtype=float).reshape(-1)


def fluctuation(profile: np.ndarray, box: int) -> float:
    """RMS residual of per-box linear fits over non-overlapping boxes."""
    n_boxes = profile.size // box
    segs = profile[: n_boxes * box].reshape(n_boxes, box)
    x = np.arange(box, dtype=float)
    xc = x - x.mean()
    slope = segs @ xc / (xc @ xc)
    resid = segs - segs.mean(axis=1, keepdims=True) - slope[:, None] * xc
    return float(np.sqrt(np.mean(resid**2)))


def _scaling_exponent(profile: np.ndarray, lo: int, hi: int, correct: bool) -> float:
    boxes = np.arange(lo, hi + 1)
    boxes = boxes[boxes <= profile.size]
    if boxes.size < 2:
        raise TooShort(f"need at least two box sizes in [{lo}, {hi}]")
    F = np.array([fluctuation(profile, int(b)) for b in boxes])
    if np.any(F <= 0):
        raise DegenerateSeries("zero fluctuation (constant series)")
    if correct:
        # white noise gives E[F^2(n)] = (n^2 - 4) / (15 n); rescale to the n/15 asymptote
        F = F / np.sqrt(1.0 - 4.0 / boxes.astype(float) ** 2)
    slope, _ = np.polyfit(np.log(boxes), np.log(F), 1)
    return float(slope)


def dfa(
    series,
    box_range_short: tuple[int, int] = SHORT_BOXES,
    box_range_long: tuple[int, int] = LONG_BOXES,
    finite_size_correction: bool = True,
) -> tuple[float, float]:
    """Short- and long-range DFA scaling exponents (alpha1, alpha2).

    The mean-centred series is integrated, every integer box size in each range
    is linearly detrended box by box, and alpha is the slope of log F(n)
    against log n.

    Linear detrending shrinks F at the smallest boxes, which inflates alpha1
    for white noise to about 0.58. With ``finite_size_correction`` (default)
    F(n) is divided by sqrt(1 - 4/n^2), the exact white-noise shrinkage, so
    uncorrelated input yields 0.5 (Kantelhardt et al., Physica A 295, 2001).
    """
    x = _values(series)
    if x.size < DFA_MIN_BEATS:
        raise TooShort(f"DFA needs at least {DFA_MIN_BEATS} beats, got {x.size}")
    profile = np.cumsum(x - x.mean())
    return (
        _scaling_exponent(profile, *box_range_short, finite_size_correction),
        _scaling_exponent(profile, *box_range_long, finite_size_correction),
    )


def _check(x: np.ndarray, m: int, r: float):
    if m < 1:
        raise ValueError("embedding dimension m must be >= 1")
    if x.size < m + 2:
        raise TooShort(f"need at least m + 2 = {m + 2} samples, got {x.size}")
    if not r > 0:
        raise NonPositiveTolerance(f"tolerance must be > 0, got {r}")


def _lag_max(diff: np.ndarray, m: int) -> np.ndarray:
    """Chebyshev distance of length-m templates at a fixed lag."""
    if m == 1:
        return diff
    return sliding_window_view(diff, m).max(axis=1)


def apen(series, m: int = 2, r: float | None = None) -> float:
    """Approximate entropy Phi^m(r) - Phi^{m+1}(r), self-matches included.

    ``r`` defaults to 0.2 x the population standard deviation.
    """
    x = _values(series)
    if r is None:
        r = 0.2 * float(x.std())
    _check(x, m, r)
    n = x.size
    nm, nm1 = n - m + 1, n - m
    counts_m = np.ones(nm)
    counts_m1 = np.ones(nm1)
    for k in range(1, nm):
        diff = np.abs(x[k:] - x[:-k])
        dm = _lag_max(diff, m)[: nm - k]
        hit = dm <= r
        counts_m[: nm - k] += hit
        counts_m[k:] += hit
        if k < nm1:
            hit1 = hit[: nm1 - k] & (diff[m : m + nm1 - k] <= r)
            counts_m1[: nm1 - k] += hit1
            counts_m1[k:] += hit1
    phi_m = np.mean(np.log(counts_m / nm))
    phi_m1 = np.mean(np.log(counts_m1 / nm1))
    return float(phi_m - phi_m1)


def sample_entropy_counts(x: np.ndarray, m: int, r: float) -> tuple[int, int]:
    """(A, B): template pairs matching at length m+1 and m, self-matches excluded.

    Both counts range over the first ``n - m`` templates.
    """
    n = x.size
    nt = n - m
    a = b = 0
    for k in range(1, nt):
        diff = np.abs(x[k:] - x[:-k])
        dm = _lag_max(diff, m)[: nt - k]
        hit = dm <= r
        b += int(np.count_nonzero(hit))
        a += int(np.count_nonzero(hit & (diff[m : m + nt - k] <= r)))
    return a, b


def sampen(series, m: int = 2, r: float | None = None) -> float:
    """Sample entropy -ln(A/B).

    Raises ``NoTemplateMatches`` when either count is zero, where the
    statistic is undefined.
    """
    x = _values(series)
    if r is None:
        r = 0.2 * float(x.std())
    _check(x, m, r)
    a, b = sample_entropy_counts(x, m, r)
    if b == 0:
        raise NoTemplateMatches(f"no length-{m} template pairs within r={r}")
    if a == 0:
        raise NoTemplateMatches(f"no length-{m + 1} template pairs within r={r}")
    return float(-np.log(a / b))


def nonlinear(series, m: int = 2, r: float | None = None) -> NonlinearMetrics:
    """All four nonlinear measures; undefined ones come back as NaN."""
    x = _values(series)
    if r is None:
        r = 0.2 * float(x.std())

    try:
        a1, a2 = dfa(x)
    except HRVError:
        a1 = a2 = math.nan
    try:
        ap = apen(x, m, r)
    except HRVError:
        ap = math.nan
    try:
        se = sampen(x, m, r)
    except HRVError:
        se = math.nan
    return NonlinearMetrics(a1, a2, ap, se)
