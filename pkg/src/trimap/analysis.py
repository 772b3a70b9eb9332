"""OTOC time series containers, growth-rate fits, and quantum-classical
comparison helpers."""

import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np


@dataclass
class OtocSeries:
    """Log-OTOC values on integer time steps, with run metadata.

    values are in natural-log units; meta records whatever identifies the
    run (scheme, r, hbar, ensemble sizes, seed, prefactor flag, excluded
    sample counts).
    """

    scheme: str
    times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.times.shape != self.values.shape:
            raise ValueError("times and values must have matching shapes")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    def value_at(self, t: int) -> float:
        idx = np.nonzero(self.times == t)[0]
        if idx.size == 0:
            raise ValueError(f"time {t} not present in series")
        return float(self.values[idx[0]])


@dataclass(frozen=True)
class GrowthFit:
    """Least-squares line through (t, value) on a window of steps."""

    slope: float
    intercept: float
    window: Tuple[float, float]
    rms_residual: float


def fit_growth_rate(series: OtocSeries, window: Tuple[float, float]) -> GrowthFit:
    """Ordinary least squares over window = (t_min, t_max), inclusive."""
    t_min, t_max = window
    if not t_min < t_max:
        raise ValueError("window must satisfy t_min < t_max")
    mask = (series.times >= t_min) & (series.times <= t_max)
    t = np.asarray(series.times[mask], dtype=np.float64)
    y = series.values[mask]
    if t.size < 3:
        raise ValueError(f"window {window} holds {t.size} points; need >= 3")
    if not np.all(np.isfinite(y)):
        raise ValueError("series has non-finite values inside the fit window")
    design = np.column_stack([t, np.ones_like(t)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    rms = float(np.sqrt(np.mean(resid ** 2)))
    return GrowthFit(slope=float(coef[0]), intercept=float(coef[1]),
                     window=(t_min, t_max), rms_residual=rms)


def delta_qc(al_q: OtocSeries, al_c: OtocSeries, t0: int) -> float:
    """Normalized difference |q - c| / (q + c) at step t0."""
    q = al_q.value_at(t0)
    c = al_c.value_at(t0)
    denom = q + c
    if denom == 0.0:
        raise ZeroDivisionError("AL_q + AL_c vanishes at t0")
    return abs(q - c) / denom


def matched_classical_r(dim: int) -> float:
    """Round-off radius matching a Hilbert dimension: r = 1/sqrt(D)."""
    if dim <= 0:
        raise ValueError("dimension must be positive")
    return 1.0 / math.sqrt(dim)


def ehrenfest_time(hbar: float, lam: float) -> float:
    """|ln hbar| / lambda, the log-time marker for quantum-classical overlap.

    The proportionality constant is fixed to one; this is a diagnostic
    marker, not a fitted quantity.
    """
    if not 0.0 < hbar < 1.0:
        raise ValueError("hbar must lie in (0, 1)")
    if lam <= 0.0:
        raise ValueError("lambda must be positive")
    return abs(math.log(hbar)) / lam


def default_fit_windows(t_star: float, t_max: int,
                        early_span: int = 5) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    """Early/late windows around a crossover step, clipped to the series.

    Early: [1, min(early_span, t_star - 1)]; late: [t_star + 1, t_max].
    Callers should trim the late end before sampling noise or saturation
    sets in; both windows are reported in run metadata.
    """
    early_hi = max(3, min(early_span, int(math.floor(t_star)) - 1))
    late_lo = min(int(math.ceil(t_star)) + 1, t_max - 3)
    return (1, early_hi), (late_lo, t_max)
