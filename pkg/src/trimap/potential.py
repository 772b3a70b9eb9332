"""Round-off triangle-map potential and its derivatives.

The sawtooth potential -alpha*|x| - beta on the torus x in [-1, 1) has cusps
at x = 0 and |x| = 1.  Here each cusp is replaced by a circle arc of radius
r, giving three branches (alpha-scaled, beta subtracted at the end):

    -sqrt(2) r + sqrt(r^2 - x^2)              |x| <= sqrt(2) r / 2
    -1 + sqrt(2) r - sqrt(r^2 - (|x|-1)^2)    |x| >= 1 - sqrt(2) r / 2
    -|x|                                      otherwise

The arcs meet the linear segments at 45 degrees, so the potential is C^1 for
r > 0; r = 0 recovers the cusped sawtooth.  The rounded neighborhoods of the
cusps are the only phase-space regions where the tangent map is expanding.
"""

import enum
import math

import numpy as np

from .params import SQRT2, MapParams


class RegionTag(enum.Enum):
    """Which rounded neighborhood (if any) a position falls in."""

    E0 = "E0"  # around x = 0
    E1 = "E1"  # around |x| = 1
    OUTSIDE = "outside"


def _as_array(x):
    arr = np.asarray(x, dtype=np.float64)
    return arr, arr.ndim == 0


def potential_value(x, params: MapParams):
    """V(x) for scalar or array x in [-1, 1)."""
    arr, scalar = _as_array(x)
    ax = np.abs(arr)
    half = SQRT2 * params.r / 2.0
    r2 = params.r * params.r
    in_e0 = (ax <= half) & (params.r > 0.0)
    in_e1 = (ax >= 1.0 - half) & (params.r > 0.0)
    d = ax - 1.0
    # np.where evaluates all branches; clamp radicands so the masked-out
    # entries do not produce NaNs.
    arc0 = -SQRT2 * params.r + np.sqrt(np.maximum(r2 - arr * arr, 0.0))
    arc1 = -1.0 + SQRT2 * params.r - np.sqrt(np.maximum(r2 - d * d, 0.0))
    v = params.alpha * np.where(in_e0, arc0, np.where(in_e1, arc1, -ax)) - params.beta
    return float(v) if scalar else v


def potential_deriv(x, params: MapParams):
    """V'(x); the force in the map is -V'(x).

    For r = 0 the derivative at the cusp x = 0 uses sign(0) := +1.
    """
    arr, scalar = _as_array(x)
    ax = np.abs(arr)
    half = SQRT2 * params.r / 2.0
    r2 = params.r * params.r
    in_e0 = (ax <= half) & (params.r > 0.0)
    in_e1 = (ax >= 1.0 - half) & (params.r > 0.0)
    sgn = np.where(arr >= 0.0, 1.0, -1.0)
    d = ax - 1.0  # in [-sqrt(2) r/2, 0] inside E1
    s0 = np.sqrt(np.maximum(r2 - arr * arr, 0.0))
    s1 = np.sqrt(np.maximum(r2 - d * d, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        d0 = -params.alpha * arr / s0
        d1 = sgn * params.alpha * d / s1
    vp = np.where(in_e0, d0, np.where(in_e1, d1, -params.alpha * sgn))
    return float(vp) if scalar else vp


def potential_second_deriv(x, params: MapParams):
    """V''(x); zero outside the rounded regions.

    Raises ValueError for r = 0, where V'' is distributional (callers must
    use the shear-only tangent step instead).
    """
    if params.r == 0.0:
        raise ValueError("V'' is not defined pointwise for r = 0")
    arr, scalar = _as_array(x)
    ax = np.abs(arr)
    half = SQRT2 * params.r / 2.0
    r2 = params.r * params.r
    in_e0 = ax <= half
    in_e1 = ax >= 1.0 - half
    d = ax - 1.0
    s0 = np.sqrt(np.maximum(r2 - arr * arr, 0.0))
    s1 = np.sqrt(np.maximum(r2 - d * d, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        c0 = -params.alpha / s0 - params.alpha * arr * arr / (s0 * s0 * s0)
        c1 = params.alpha / s1 + params.alpha * d * d / (s1 * s1 * s1)
    vpp = np.where(in_e0, c0, np.where(in_e1, c1, 0.0))
    return float(vpp) if scalar else vpp


def classify_region(x: float, params: MapParams) -> RegionTag:
    """Tag a position as E0, E1, or outside; ties go to the arc branches."""
    ax = abs(x)
    half = SQRT2 * params.r / 2.0
    if ax <= half:
        return RegionTag.E0
    if ax >= 1.0 - half:
        return RegionTag.E1
    return RegionTag.OUTSIDE


def region_measure(params: MapParams) -> float:
    """Probability that a uniform x lies in E = E0 union E1: sqrt(2) r."""
    return SQRT2 * params.r


def mean_curvature_e0(params: MapParams) -> float:
    """Average of V'' over E0, -sqrt(2) alpha / r (exact for the arcs)."""
    if params.r == 0.0:
        raise ValueError("undefined for r = 0")
    return -SQRT2 * params.alpha / params.r


def _scalar_value(x: float, alpha: float, r: float) -> float:
    """Scalar V(x)/1 with beta = 0; shared reference for the kernels."""
    ax = abs(x)
    half = SQRT2 * r / 2.0
    if r > 0.0 and ax <= half:
        return alpha * (-SQRT2 * r + math.sqrt(r * r - x * x))
    if r > 0.0 and ax >= 1.0 - half:
        d = ax - 1.0
        return alpha * (-1.0 + SQRT2 * r - math.sqrt(r * r - d * d))
    return -alpha * ax
