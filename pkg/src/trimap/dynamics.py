"""Classical evolution of the (round-off) triangle map.

The map acts on the torus [-1, 1) x [-1, 1):

    p' = p - V'(x)   (mod 2)
    x' = x + p'      (mod 2)

It is area preserving and piecewise linear away from the rounded cusp
regions.  Alongside the orbit we propagate the tangent map

    M(x) = [[1 - V''(x), 1], [-V''(x), 1]]

whose cumulative product is the orbit Jacobian.  Because Jacobian entries
grow like exp(lambda*t), frames are stored in extended range: a matrix with
max-norm in [1, 2) plus the natural log of the factored-out scale.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from . import _kernels
from .params import SQRT2, MapParams
from .potential import RegionTag, classify_region, potential_deriv
from .rng import uniform_points

_LN2 = math.log(2.0)


class PhasePoint(NamedTuple):
    x: float
    p: float


def wrap(x):
    """Reduce scalar or array values into [-1, 1) (idempotent)."""
    if np.ndim(x) == 0:
        return float(x) - 2.0 * math.floor((float(x) + 1.0) * 0.5)
    x = np.asarray(x, dtype=np.float64)
    return x - 2.0 * np.floor((x + 1.0) * 0.5)


def map_step(point: PhasePoint, params: MapParams) -> PhasePoint:
    """One application of the map."""
    p_next = wrap(point.p - potential_deriv(point.x, params))
    x_next = wrap(point.x + p_next)
    return PhasePoint(x_next, p_next)


@dataclass(frozen=True)
class TangentFrame:
    """Cumulative Jacobian as exp(log_scale) * m, max-norm(m) in [1, 2).

    The factored-out scale is always an exact power of two, so the stored
    matrix is the computed Jacobian divided exactly.  Note that once
    log_scale exceeds ~18 the contracting direction of the represented
    Jacobian falls below double-precision resolution of m; the growing
    entries (all that Lyapunov/OTOC computations use) stay accurate.
    """

    m: np.ndarray
    log_scale: float = 0.0

    @staticmethod
    def identity() -> "TangentFrame":
        return TangentFrame(np.eye(2), 0.0)

    def log_abs_entry(self, i: int, j: int) -> float:
        """ln |J_ij| of the represented Jacobian (-inf for a zero entry)."""
        v = abs(self.m[i, j])
        return -math.inf if v == 0.0 else self.log_scale + math.log(v)

    def log_abs_det(self) -> float:
        """ln |det J| as representable from the stored matrix."""
        d = abs(self.m[0, 0] * self.m[1, 1] - self.m[0, 1] * self.m[1, 0])
        return -math.inf if d == 0.0 else 2.0 * self.log_scale + math.log(d)

    def entry(self, i: int, j: int) -> float:
        """J_ij as a plain double; overflows to +/-inf for huge scales."""
        return math.exp(self.log_scale) * self.m[i, j] if self.m[i, j] != 0.0 else 0.0


def tangent_step(point: PhasePoint, frame: TangentFrame, params: MapParams) -> TangentFrame:
    """Left-multiply the frame by M(x) at the current point, renormalized.

    For r = 0 the second derivative is zero almost everywhere, so every
    step (including the measure-zero cusp hits) applies the plain shear
    [[1, 1], [0, 1]].
    """
    if params.r > 0.0:
        c = _kernels._vpp_s(point.x, params.alpha, params.r)
    else:
        c = 0.0
    m = frame.m
    prod = np.array([
        [(1.0 - c) * m[0, 0] + m[1, 0], (1.0 - c) * m[0, 1] + m[1, 1]],
        [m[1, 0] - c * m[0, 0], m[1, 1] - c * m[0, 1]],
    ])
    s = np.max(np.abs(prod))
    if s > 0.0:
        _, e = math.frexp(s)
        k = e - 1
        prod *= math.ldexp(1.0, -k)
        return TangentFrame(prod, frame.log_scale + k * _LN2)
    return TangentFrame(prod, frame.log_scale)


@dataclass
class TrajectoryRecord:
    """Orbit history: points, optional tangent frames, region hits."""

    points: list
    frames: Optional[list]
    region_hits: list = field(default_factory=list)


def evolve(point: PhasePoint, n_steps: int, params: MapParams,
           record_frames: bool = False) -> TrajectoryRecord:
    """Run the map n_steps times, recording points and region passages.

    frames[t] is the Jacobian of the t-step map at the initial point
    (frames[0] the identity).  region_hits lists (step, tag) for every step
    whose position lies inside E0 or E1, the initial point included.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    pt = PhasePoint(wrap(point[0]), wrap(point[1]))
    points = [pt]
    frames = [TangentFrame.identity()] if record_frames else None
    hits = []
    tag = classify_region(pt.x, params)
    if tag is not RegionTag.OUTSIDE:
        hits.append((0, tag))
    for t in range(1, n_steps + 1):
        if record_frames:
            frames.append(tangent_step(pt, frames[-1], params))
        pt = map_step(pt, params)
        points.append(pt)
        tag = classify_region(pt.x, params)
        if tag is not RegionTag.OUTSIDE:
            hits.append((t, tag))
    return TrajectoryRecord(points=points, frames=frames, region_hits=hits)


@dataclass(frozen=True)
class ReturnTimeModel:
    """Geometric law for return times to E: P(tau) = q^(tau-1) p, tau >= 1."""

    r: float

    @property
    def p_r(self) -> float:
        return SQRT2 * self.r

    @property
    def q_r(self) -> float:
        return 1.0 - self.p_r

    @property
    def tau_bar(self) -> float:
        return 1.0 / (SQRT2 * self.r)

    def pmf(self, tau):
        tau = np.asarray(tau)
        return self.q_r ** (tau - 1.0) * self.p_r


@dataclass
class ReturnTimeStats:
    """Empirical return-time histogram with its geometric reference."""

    histogram: np.ndarray  # counts for tau = 1 .. max_tau
    mean: float
    n_gaps: int
    n_overflow: int
    model: ReturnTimeModel

    def empirical_pmf(self) -> np.ndarray:
        return self.histogram / max(self.n_gaps, 1)


def return_time_stats(params: MapParams, n_traj: int, n_steps: int, seed: int,
                      max_tau: Optional[int] = None) -> ReturnTimeStats:
    """Histogram of gaps between consecutive E-passages over random orbits."""
    if params.r <= 0.0:
        raise ValueError("return times require r > 0")
    if max_tau is None:
        model = ReturnTimeModel(params.r)
        max_tau = max(16, int(12.0 * model.tau_bar))
    pts = uniform_points(n_traj, seed)
    hist, sum_tau, count, overflow = _kernels.return_time_histogram(
        pts[:, 0], pts[:, 1], n_steps, params.alpha, params.r, max_tau)
    mean = sum_tau / count if count else math.nan
    return ReturnTimeStats(histogram=hist, mean=mean, n_gaps=count,
                           n_overflow=overflow, model=ReturnTimeModel(params.r))


def orbit_x_histogram(point: PhasePoint, n_steps: int, params: MapParams,
                      nbins: int) -> np.ndarray:
    """Occupancy counts of x over one orbit, nbins equal bins on [-1, 1)."""
    return _kernels.orbit_x_histogram(point[0], point[1], n_steps,
                                      params.alpha, params.r, nbins)


def batch_log_j00_squared(points: np.ndarray, n_steps: int, params: MapParams) -> np.ndarray:
    """ln (dx(t)/dx(0))^2 for each initial point and each t = 0..n_steps.

    points is (n, 2); the result is (n, n_steps+1) in natural-log units,
    -inf marking entries where the Jacobian element is exactly zero.
    """
    points = np.asarray(points, dtype=np.float64)
    return _kernels.tangent_log_j00_sq(points[:, 0], points[:, 1], n_steps,
                                       params.alpha, params.r)
