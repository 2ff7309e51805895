"""Time-domain HRV indices: MeanHR, MeanRR, SDHR, SDNN, RMSSD, NN50, pNN50."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .core import RRSeries
from .errors import TooShort


@dataclass(frozen=True)
class TimeDomainMetrics:
    mean_hr: float
    mean_rr: float
    sd_hr: float
    sdnn: float
    rmssd: float
    nn50: float
    pnn50: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def _intervals(series) -> np.ndarray:
    if isinstance(series, RRSeries):
        return series.intervals
    return np.asarray(series, dtype=float)


def time_domain(
    series,
    nn50_mode: str = "absolute",
    pnn50_denominator: str = "pairs",
    outlier_gate: tuple[float, float] | None = None,
) -> TimeDomainMetrics:
    """Compute the seven time-domain indices of one window.

    Parameters
    ----------
    series : RRSeries or array-like
        RR intervals in ms.
    nn50_mode : {"absolute", "signed"}
        ``absolute`` counts ``|RR[i+1] - RR[i]| > 50``; ``signed`` is the
        literal one-sided rule ``RR[i+1] - RR[i] >= 50``.
    pnn50_denominator : {"pairs", "beats"}
        Divide NN50 by ``n - 1`` successive pairs (default) or by ``n``.
    outlier_gate : (lo, hi), optional
        Drop intervals outside ``[lo, hi]`` ms before computing.

    Standard deviations use the population (1/n) form; RMSSD divides by n-1.
    """
    rr = _intervals(series)
    if outlier_gate is not None:
        lo, hi = outlier_gate
        rr = rr[(rr >= lo) & (rr <= hi)]
    n = rr.size
    if n < 2:
        raise TooShort(f"time-domain metrics need at least 2 beats, got {n}")

    hr = 60000.0 / rr
    diff = np.diff(rr)
    if nn50_mode == "absolute":
        nn50 = int(np.count_nonzero(np.abs(diff) > 50.0))
    elif nn50_mode == "signed":
        nn50 = int(np.count_nonzero(diff >= 50.0))
    else:
        raise ValueError(f"unknown nn50_mode {nn50_mode!r}")

    if pnn50_denominator == "pairs":
        pnn50 = 100.0 * nn50 / (n - 1)
    elif pnn50_denominator == "beats":
        pnn50 = 100.0 * nn50 / n
    else:
        raise ValueError(f"unknown pnn50_denominator {pnn50_denominator!r}")

    return TimeDomainMetrics(
        mean_hr=float(hr.mean()),
        mean_rr=float(rr.mean()),
        sd_hr=float(hr.std()),
        sdnn=float(rr.std()),
        rmssd=float(np.sqrt(np.sum(diff**2) / (n - 1))),
        nn50=float(nn50),
        pnn50=float(pnn50),
    )
