"""Classical OTOC of the tangent map under three averaging schemes.

The observable is (dx(t)/dx(0))^2 along trajectories started from Gaussian
clouds centered at N phase-space points (width sigma = sqrt(hbar_c/2), the
coherent-state footprint).  With <.> the in-cloud average and ln the log:

    AL(t) = mean_k ln < (dx/dx0)^2 >_k      (log of the annealed cloud)
    LA(t) = ln mean_k < (dx/dx0)^2 >_k      (fully annealed)
    LL(t) = mean_k < ln (dx/dx0)^2 >_k      (fully quenched)

Jensen's inequality gives LA >= AL >= LL pointwise at matched samples.
All averaging happens in log space (log-sum-exp for the annealed means), so
log-Jacobians of order 1e6 cannot overflow.  With the hbar prefactor on,
2 ln hbar_c is added so AL(0) = 2 ln hbar_c lines up with the quantum
commutator value at t = 0.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analysis import OtocSeries
from .dynamics import batch_log_j00_squared, wrap
from .params import MapParams
from .rng import SplitMix64, uniform_points

SCHEMES = ("AL", "LA", "LL")


@dataclass(frozen=True)
class GaussianEnsembleSpec:
    """Gaussian initial ensembles: centers, width from hbar_c, sample count.

    sigma^2 = hbar_c / 2 exactly.  Per-center sample streams are seeded from
    SplitMix64(seed) (one spawned sub-seed per center, in center order), so
    a spec reproduces its samples bit-for-bit.
    """

    centers: np.ndarray
    hbar_c: float
    samples_per_center: int
    seed: int
    include_hbar_prefactor: bool = True

    def __post_init__(self):
        centers = np.atleast_2d(np.asarray(self.centers, dtype=np.float64))
        if centers.ndim != 2 or centers.shape[1] != 2 or centers.shape[0] == 0:
            raise ValueError("centers must be a nonempty (N, 2) array")
        object.__setattr__(self, "centers", centers)
        if self.hbar_c <= 0.0:
            raise ValueError("hbar_c must be positive")
        if self.samples_per_center < 1:
            raise ValueError("samples_per_center must be >= 1")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.hbar_c / 2.0)

    @property
    def n_centers(self) -> int:
        return self.centers.shape[0]

    def center_seeds(self) -> list:
        return SplitMix64(self.seed).spawn_seeds(self.n_centers)


def random_ensemble_spec(n_centers: int, hbar_c: float, samples_per_center: int,
                         seed: int, include_hbar_prefactor: bool = True) -> GaussianEnsembleSpec:
    """Spec with centers uniform on the torus; the same seed also drives the
    per-center sample streams."""
    centers = uniform_points(n_centers, seed)
    return GaussianEnsembleSpec(centers=centers, hbar_c=hbar_c,
                                samples_per_center=samples_per_center, seed=seed,
                                include_hbar_prefactor=include_hbar_prefactor)


def sample_ensemble(spec: GaussianEnsembleSpec, center_index: int) -> np.ndarray:
    """M points from the isotropic Gaussian around one center, torus-wrapped."""
    if not 0 <= center_index < spec.n_centers:
        raise ValueError("center_index out of range")
    rng = SplitMix64(spec.center_seeds()[center_index])
    xk, pk = spec.centers[center_index]
    sig = spec.sigma
    out = np.empty((spec.samples_per_center, 2))
    for m in range(spec.samples_per_center):
        gx, gp = rng.next_gaussian_pair()
        out[m, 0] = xk + sig * gx
        out[m, 1] = pk + sig * gp
    out[:, 0] = wrap(out[:, 0])
    out[:, 1] = wrap(out[:, 1])
    return out


def _row_logsumexp(logs: np.ndarray):
    """Per-column ln(sum(exp)) and finite count, -inf entries dropped.

    Stable for arguments of any magnitude; all -inf columns give -inf.
    """
    peak = np.max(logs, axis=0)
    safe_peak = np.where(np.isfinite(peak), peak, 0.0)
    with np.errstate(invalid="ignore"):
        terms = np.exp(logs - safe_peak)
    terms = np.where(np.isfinite(logs), terms, 0.0)
    count = np.sum(np.isfinite(logs), axis=0)
    total = np.sum(terms, axis=0)
    with np.errstate(divide="ignore"):
        lse = safe_peak + np.log(total)
    return np.where(count > 0, lse, -np.inf), count


class _SchemeAccumulator:
    """Streaming reduction over per-center sample blocks, in center order.

    Keeps memory at one block of ln(J00^2) curves; the hierarchical
    log-sum-exp is exact and deterministic for a fixed block order.
    """

    def __init__(self, n_times: int):
        self.lse_blocks = []
        self.cnt_blocks = []
        self.ll_sum = np.zeros(n_times)
        self.ll_cnt = np.zeros(n_times, dtype=np.int64)
        self.excluded = np.zeros(n_times, dtype=np.int64)

    def add_block(self, logs: np.ndarray) -> None:
        finite = np.isfinite(logs)
        self.excluded += np.sum(~finite, axis=0)
        lse, cnt = _row_logsumexp(logs)
        self.lse_blocks.append(lse)
        self.cnt_blocks.append(cnt)
        self.ll_sum += np.sum(np.where(finite, logs, 0.0), axis=0)
        self.ll_cnt += np.sum(finite, axis=0)

    def reduce(self, scheme: str) -> np.ndarray:
        lse = np.vstack(self.lse_blocks)
        cnt = np.vstack(self.cnt_blocks)
        if scheme == "AL":
            with np.errstate(divide="ignore", invalid="ignore"):
                per_block = np.where(cnt > 0, lse - np.log(cnt), -np.inf)
            return np.mean(per_block, axis=0)
        if scheme == "LA":
            total_lse, _ = _row_logsumexp(lse)
            total_cnt = np.sum(cnt, axis=0)
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(total_cnt > 0, total_lse - np.log(total_cnt),
                                -np.inf)
        if scheme == "LL":
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(self.ll_cnt > 0, self.ll_sum / self.ll_cnt,
                                -np.inf)
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def _normalize_scheme(scheme: str) -> str:
    s = str(scheme).upper()
    if s not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    return s


def otoc_classical(spec: GaussianEnsembleSpec, scheme: str, params: MapParams,
                   n_steps: int) -> OtocSeries:
    """Monte-Carlo OTOC series for one averaging scheme.

    Centers are processed one block at a time, so memory stays at one
    cloud's worth of log-Jacobian curves.  Samples whose Jacobian (1,1)
    entry hits exactly zero at some t > 0 are excluded from the averages at
    that time and counted in meta["excluded_per_step"]; a warning reports
    the totals.
    """
    scheme = _normalize_scheme(scheme)
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    acc = _SchemeAccumulator(n_steps + 1)
    for k in range(spec.n_centers):
        points = sample_ensemble(spec, k)
        acc.add_block(batch_log_j00_squared(points, n_steps, params))
    if acc.excluded.any():
        warnings.warn(f"degenerate ensemble: excluded "
                      f"{int(acc.excluded.sum())} zero-Jacobian samples")
    values = acc.reduce(scheme)
    if spec.include_hbar_prefactor:
        values = values + 2.0 * math.log(spec.hbar_c)
    meta = {
        "r": params.r,
        "alpha": params.alpha,
        "hbar_c": spec.hbar_c,
        "n_centers": spec.n_centers,
        "samples_per_center": spec.samples_per_center,
        "seed": spec.seed,
        "prefactor": spec.include_hbar_prefactor,
        "excluded_per_step": acc.excluded.tolist(),
        "sampling": "gaussian",
    }
    return OtocSeries(scheme=scheme, times=np.arange(n_steps + 1),
                      values=values, meta=meta)


def otoc_phase_space(params: MapParams, scheme: str, n_samples: int,
                     n_steps: int, seed: int) -> OtocSeries:
    """LL/LA series with uniform torus sampling instead of Gaussian clouds.

    The annealed-over-clouds scheme (AL) has no whole-phase-space analog, and
    there is no hbar prefactor here.
    """
    scheme = _normalize_scheme(scheme)
    if scheme == "AL":
        raise ValueError("phase-space averaging applies to LL and LA only")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    acc = _SchemeAccumulator(n_steps + 1)
    points = uniform_points(n_samples, seed)
    block = 1 << 16
    for lo in range(0, n_samples, block):
        acc.add_block(batch_log_j00_squared(points[lo:lo + block], n_steps, params))
    if acc.excluded.any():
        warnings.warn(f"degenerate ensemble: excluded "
                      f"{int(acc.excluded.sum())} zero-Jacobian samples")
    values = acc.reduce(scheme)
    meta = {
        "r": params.r,
        "alpha": params.alpha,
        "n_samples": n_samples,
        "seed": seed,
        "prefactor": False,
        "excluded_per_step": acc.excluded.tolist(),
        "sampling": "uniform",
    }
    return OtocSeries(scheme=scheme, times=np.arange(n_steps + 1),
                      values=values, meta=meta)


def crossover_time(r: float, hbar_c: float, lam: float) -> float:
    """Step count at which a cloud of width sqrt(hbar_c) grown at rate lam
    reaches the round-off radius: ln(r / sqrt(hbar_c)) / lam.

    Negative values mean the cloud already dwarfs r at t = 0 (no early
    quenched phase).
    """
    if r <= 0.0 or hbar_c <= 0.0:
        raise ValueError("r and hbar_c must be positive")
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    return math.log(r / math.sqrt(hbar_c)) / lam
