"""Lyapunov exponent of the round-off triangle map.

Four estimates are provided, all in units of 1/step:

* ``lyapunov_numerical`` - Benettin tangent-vector growth along orbits.
* ``lyapunov_series``    - geometric-return-time series
  2 r^2 sum_tau (1 - sqrt(2) r)^(tau-1) ln(sqrt(2) |alpha| tau / r),
  the analytical estimate the numerics are compared against.
* ``lyapunov_simple``    - the closed form sqrt(2) r ln(|alpha| / r^2)
  obtained by replacing tau with its mean.
* ``lyapunov_local_max`` - largest local rate inside E, ln(sqrt(2)|alpha|/r),
  and ``lyapunov_star`` = local_max + ln(sqrt(2) r)/2, the rate that
  dominates annealed (LA) averages.

|alpha| is used inside every logarithm; the conventional alpha is negative
and only its magnitude sets the expansion factors.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .params import SQRT2, MapParams
from .rng import uniform_points


@dataclass(frozen=True)
class LyapunovEstimates:
    numerical: Optional[float]
    series: float
    simple: float
    local_max: float
    star: float


def lyapunov_series(params: MapParams, tol: float = 1e-12) -> float:
    """Sum the return-time series until the tail bound drops below tol.

    The remainder past tau = T is bounded using ln(c*tau) <= ln(c*T) +
    (tau - T)/T, which gives a geometric tail; truncation stops once that
    bound is below tol times the partial sum.
    """
    r = params.r
    if not 0.0 < r < SQRT2 / 2.0:
        raise ValueError("series estimate requires 0 < r < sqrt(2)/2")
    a = abs(params.alpha)
    p = SQRT2 * r
    q = 1.0 - p
    c = SQRT2 * a / r
    pref = 2.0 * r * r
    total = 0.0
    w = 1.0  # q^(tau-1)
    tau = 0
    while True:
        tau += 1
        total += w * math.log(c * tau)
        w *= q
        if tau >= 8:
            tail = w * (math.log(c * tau) / (1.0 - q)
                        + q / (tau * (1.0 - q) ** 2))
            if tail < tol * total:
                break
    return pref * total


def lyapunov_simple(params: MapParams) -> float:
    """Closed form sqrt(2) r ln(|alpha| / r^2)."""
    r = params.r
    a = abs(params.alpha)
    if r <= 0.0 or a / (r * r) <= 1.0:
        raise ValueError("requires r > 0 and |alpha|/r^2 > 1")
    return SQRT2 * r * math.log(a / (r * r))


def lyapunov_local_max(params: MapParams) -> float:
    """Largest local rate inside the rounded regions: ln(sqrt(2)|alpha|/r)."""
    r = params.r
    a = abs(params.alpha)
    if r <= 0.0 or SQRT2 * a / r <= 1.0:
        raise ValueError("requires r > 0 and sqrt(2)|alpha|/r > 1")
    return math.log(SQRT2 * a / r)


def lyapunov_star(params: MapParams) -> float:
    """Fluctuation-dominated rate: local_max + ln(sqrt(2) r) / 2."""
    return lyapunov_local_max(params) + 0.5 * math.log(SQRT2 * params.r)


def lyapunov_numerical(params: MapParams, n_steps: int = 200_000,
                       n_orbits: int = 64, seed: int = 2024) -> float:
    """Benettin estimate: per-step tangent renormalization along orbits.

    The tangent vector starts at (1, 0), is renormalized to unit length each
    step, and the accumulated log-norms divided by the step count are
    averaged over n_orbits random initial points.
    """
    if params.r <= 0.0:
        raise ValueError("the numerical estimator requires r > 0 "
                         "(the r = 0 map has zero exponent)")
    if n_steps <= 0 or n_orbits <= 0:
        raise ValueError("n_steps and n_orbits must be positive")
    pts = uniform_points(n_orbits, seed)
    acc = _kernels.benettin_log_growth(pts[:, 0], pts[:, 1], n_steps,
                                       params.alpha, params.r)
    return float(np.mean(acc) / n_steps)


def max_eigenvalue_product(factors: Sequence[Tuple[float, float]]) -> float:
    """Top eigenvalue of prod_k [[a_k, b_k], [a_k, b_k]]: prod_k (a_k + b_k).

    Each factor matrix has rank one with row space spanned by (1, 1)-like
    structure, so products collapse and the nonzero eigenvalue multiplies.
    """
    if len(factors) == 0:
        raise ValueError("need at least one (a, b) factor")
    out = 1.0
    for a, b in factors:
        out *= a + b
    return out


def estimate_all(params: MapParams, n_steps: int = 200_000, n_orbits: int = 64,
                 seed: int = 2024, include_numerical: bool = True) -> LyapunovEstimates:
    """All estimators at once, as used by the sweep front end."""
    numerical = (lyapunov_numerical(params, n_steps, n_orbits, seed)
                 if include_numerical else None)
    return LyapunovEstimates(
        numerical=numerical,
        series=lyapunov_series(params),
        simple=lyapunov_simple(params),
        local_max=lyapunov_local_max(params),
        star=lyapunov_star(params),
    )
