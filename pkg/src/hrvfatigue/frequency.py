"""Frequency-domain HRV: tachogram resampling, Welch PSD and band powers."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline
from scipy.signal import welch

from .core import RRSeries
from .errors import TooShort

VLF_BAND = (0.003, 0.04)
LF_BAND = (0.04, 0.15)
HF_BAND = (0.15, 0.4)
HF_FLOOR = 1e-12


@dataclass(frozen=True)
class WelchSettings:
    resample_hz: float = 4.0
    nperseg: int = 256
    overlap: float = 0.5
    window: str = "hann"
    tp_mode: str = "band_sum"  # or "total": integrate (0, 0.4] including < 0.003 Hz


@dataclass(frozen=True, eq=False)
class Spectrum:
    frequencies: np.ndarray
    density: np.ndarray

    def band_power(self, lo: float, hi: float) -> float:
        """Trapezoidal integral of the density over ``[lo, hi]``.

        The band edges are linearly interpolated so adjacent bands partition the
        total exactly.
        """
        f, p = self.frequencies, self.density
        hi = min(hi, f[-1])
        if hi <= lo:
            return 0.0
        inner = f[(f > lo) & (f < hi)]
        grid = np.concatenate(([lo], inner, [hi]))
        return float(trapezoid(np.interp(grid, f, p), grid))

    def total_power(self) -> float:
        return float(trapezoid(self.density, self.frequencies))


@dataclass(frozen=True)
class BandPowers:
    tp: float
    hf: float
    lf: float
    vlf: float
    nhf: float
    nlf: float
    lf_hf: float

    @property
    def validity(self) -> dict[str, bool]:
        return {k: math.isfinite(v) for k, v in self.as_dict().items()}

    def as_dict(self) -> dict[str, float]:
        return {
            "tp": self.tp, "hf": self.hf, "lf": self.lf, "vlf": self.vlf,
            "nhf": self.nhf, "nlf": self.nlf, "lf_hf": self.lf_hf,
        }


def _intervals(series) -> np.ndarray:
    if isinstance(series, RRSeries):
        return series.intervals
    return np.asarray(series, dtype=float)


def rr_to_uniform(
    series,
    resample_hz: float = 4.0,
    allow_linear_fallback: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Resample the tachogram on a uniform grid and remove its mean.

    Each RR value is placed at the time its interval ends. Returns
    ``(times_s, values_ms)``. Fewer than 4 beats raise ``TooShort`` unless
    ``allow_linear_fallback`` is set, in which case 2-3 beats are linearly
    interpolated.
    """
    if resample_hz <= 2 * HF_BAND[1]:
        raise ValueError(f"resample_hz must exceed {2 * HF_BAND[1]} Hz")
    rr = _intervals(series)
    if isinstance(series, RRSeries):
        t = series.beat_times_ms / 1000.0
    else:
        t = np.cumsum(rr) / 1000.0
    n = rr.size
    if n < 4:
        if not allow_linear_fallback or n < 2:
            raise TooShort(f"cubic resampling needs at least 4 beats, got {n}")
        warnings.warn("fewer than 4 beats: falling back to linear interpolation")
        ticks = np.arange(t[0], t[-1] + 1e-12, 1.0 / resample_hz)
        values = np.interp(ticks, t, rr)
    else:
        ticks = np.arange(t[0], t[-1] + 1e-12, 1.0 / resample_hz)
        values = CubicSpline(t, rr)(ticks)
    return ticks, values - values.mean()


def welch_spectrum(
    values: np.ndarray,
    fs: float,
    nperseg: int = 256,
    overlap: float = 0.5,
    window: str = "hann",
) -> Spectrum:
    """One-sided Welch PSD (ms^2/Hz) of an evenly sampled signal."""
    values = np.asarray(values, dtype=float)
    seg = min(nperseg, values.size)
    f, p = welch(
        values,
        fs=fs,
        window=window,
        nperseg=seg,
        noverlap=int(seg * overlap),
        detrend="constant",
        scaling="density",
    )
    return Spectrum(f, np.maximum(p, 0.0))


def rr_spectrum(series, settings: WelchSettings = WelchSettings()) -> Spectrum:
    _, values = rr_to_uniform(series, settings.resample_hz)
    return welch_spectrum(
        values, settings.resample_hz, settings.nperseg, settings.overlap, settings.window
    )


def band_powers(series, settings: WelchSettings = WelchSettings()) -> BandPowers:
    """TP, HF, LF, VLF, nHF, nLF and LF/HF of one window.

    By default TP is the exact band sum VLF + LF + HF so nHF + nLF = 100.
    Undefined ratios (flat spectrum) are returned as NaN.
    """
    spec = rr_spectrum(series, settings)
    vlf = spec.band_power(*VLF_BAND)
    lf = spec.band_power(*LF_BAND)
    hf = spec.band_power(*HF_BAND)
    if settings.tp_mode == "band_sum":
        tp = vlf + lf + hf
    elif settings.tp_mode == "total":
        tp = spec.band_power(0.0, HF_BAND[1])
    else:
        raise ValueError(f"unknown tp_mode {settings.tp_mode!r}")

    denom = tp - vlf
    if denom > HF_FLOOR:
        nhf = 100.0 * hf / denom
        nlf = 100.0 * lf / denom
    else:
        nhf = nlf = math.nan
    lf_hf = lf / hf if hf > HF_FLOOR else math.nan
    return BandPowers(tp, hf, lf, vlf, nhf, nlf, lf_hf)
