"""Map parameters shared by the classical and quantum engines."""

import math
from dataclasses import dataclass

SQRT2 = math.sqrt(2.0)

#: Potential strength used throughout the reference experiments,
#: ((sqrt(5) - 1)/2 - e)/2, an irrational close to -1.0501239.
DEFAULT_ALPHA = ((math.sqrt(5.0) - 1.0) / 2.0 - math.e) / 2.0


@dataclass(frozen=True)
class MapParams:
    """Parameters (alpha, beta, r) of the round-off triangle map.

    alpha scales the potential, beta is a constant offset (no force, only a
    global quantum phase), and r is the radius of the circle arcs that
    replace the cusps of the triangle potential.  r = 0 recovers the
    original piecewise-linear map.
    """

    alpha: float = DEFAULT_ALPHA
    beta: float = 0.0
    r: float = 0.0

    def __post_init__(self) -> None:
        if self.alpha == 0.0:
            raise ValueError("alpha must be nonzero")
        if not 0.0 <= self.r < SQRT2 / 2.0:
            # beyond sqrt(2)/2 the two rounded regions would overlap
            raise ValueError(f"r must lie in [0, sqrt(2)/2), got {self.r}")
