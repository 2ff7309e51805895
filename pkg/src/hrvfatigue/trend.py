"""Polynomial heart-rate trend against elapsed exercise time."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .core import DEFAULT_AGE, Zone, intensity_zone
from .errors import RankDeficient

# quartic fatigue trend from a recorded vigorous-to-recovery session, ascending powers
REFERENCE_QUARTIC = (
    79.54454,
    0.0888544794070043,
    -0.000028960595514084,
    0.000000003230596148,
    -0.00000000000012091237,
)


@dataclass(frozen=True)
class TrendModel:
    coefficients: tuple[float, ...]  # c0 .. cd, BPM / s^i
    degree: int
    residual_rms: float = 0.0
    t_min: float = -np.inf
    t_max: float = np.inf

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("degree must be >= 1")
        if not np.all(np.isfinite(self.coefficients)):
            raise ValueError("coefficients must be finite")

    @classmethod
    def from_coefficients(cls, coefficients) -> "TrendModel":
        c = tuple(float(v) for v in coefficients)
        c += (0.0,) * (2 - len(c))
        return cls(c, len(c) - 1)

    def extrapolates(self, t) -> np.ndarray | bool:
        t = np.asarray(t, dtype=float)
        out = (t < self.t_min) | (t > self.t_max)
        return bool(out) if out.ndim == 0 else out

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "coefficients": list(self.coefficients),
            "residual_rms": self.residual_rms,
            "t_range": [self.t_min, self.t_max],
        }


def fit_trend(points, degree: int = 4) -> TrendModel:
    """Least-squares polynomial of HR (BPM) on time (s).

    Time is mapped onto [-1, 1] before a QR solve; the monomial basis in raw
    seconds is far too ill-conditioned at these magnitudes. Coefficients are
    converted back to raw-second powers for reporting.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be a sequence of (t_seconds, hr_bpm) pairs")
    if degree < 1:
        raise ValueError("degree must be >= 1")
    t, hr = pts[:, 0], pts[:, 1]
    if np.unique(t).size <= degree:
        raise RankDeficient(f"degree {degree} needs at least {degree + 1} distinct times")

    lo, hi = float(t.min()), float(t.max())
    u = (2.0 * t - (lo + hi)) / (hi - lo)
    V = np.vander(u, degree + 1, increasing=True)
    Q, R = np.linalg.qr(V)
    scaled = solve_triangular(R, Q.T @ hr)
    poly = np.polynomial.Polynomial(scaled, domain=[lo, hi], window=[-1.0, 1.0])
    raw = poly.convert(domain=[-1.0, 1.0], window=[-1.0, 1.0]).coef
    raw = np.pad(raw, (0, degree + 1 - raw.size))
    resid = hr - V @ scaled
    rms = float(np.sqrt(np.mean(resid**2)))
    return TrendModel(tuple(float(c) for c in raw), degree, rms, lo, hi)


def eval_trend(model: TrendModel, t):
    """Horner evaluation of the raw-unit polynomial."""
    t = np.asarray(t, dtype=float)
    acc = np.zeros_like(t)
    for c in reversed(model.coefficients):
        acc = acc * t + c
    return float(acc) if acc.ndim == 0 else acc


def trend_zone(model: TrendModel, t: float, age: int = DEFAULT_AGE) -> Zone:
    """Intensity zone of the trend value at ``t``; a readout, not a forecast."""
    return intensity_zone(eval_trend(model, t), age)
