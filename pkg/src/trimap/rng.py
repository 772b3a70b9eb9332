"""Deterministic random streams for reproducible sweeps.

All randomness in the package flows through a splitmix64 generator so that a
run is reproducible bit-for-bit from its seed alone, independent of numpy
version or compute backend.  The update rule is the standard one:

    state <- state + 0x9E3779B97F4A7C15           (mod 2^64)
    z <- state
    z <- (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9   (mod 2^64)
    z <- (z XOR (z >> 27)) * 0x94D049BB133111EB   (mod 2^64)
    output z XOR (z >> 31)

Uniform doubles take the top 53 bits; Gaussian pairs use Box-Muller.
Independent sub-streams (one per trajectory, per ensemble center, ...) are
seeded from consecutive outputs of a root generator, so parallel work can be
reduced in fixed index order with bit-reproducible results.
"""

import math

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_TWO53 = float(1 << 53)


class SplitMix64:
    """Seeded splitmix64 stream of 64-bit integers and derived floats."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def next_unit(self) -> float:
        """Uniform double in [0, 1), 53-bit resolution."""
        return (self.next_u64() >> 11) / _TWO53

    def next_symmetric(self) -> float:
        """Uniform double in [-1, 1)."""
        return 2.0 * self.next_unit() - 1.0

    def next_gaussian_pair(self) -> tuple[float, float]:
        """Standard-normal pair via Box-Muller.

        The radial uniform is taken in (0, 1] so the log is always finite.
        """
        u1 = ((self.next_u64() >> 11) + 1) / _TWO53
        u2 = self.next_unit()
        rad = math.sqrt(-2.0 * math.log(u1))
        ang = 2.0 * math.pi * u2
        return rad * math.cos(ang), rad * math.sin(ang)

    def spawn_seeds(self, n: int) -> list[int]:
        """n sub-stream seeds drawn from this stream, in order."""
        return [self.next_u64() for _ in range(n)]


def uniform_points(n: int, seed: int, seam_margin: float = 0.0):
    """n points uniform on the torus [-1,1)^2 as an (n, 2) float array.

    Coordinates are drawn x-then-p per point from SplitMix64(seed).  A
    positive seam_margin rejection-resamples coordinates falling within that
    distance of the branch seam at +/-1 (used by quantum-classical
    comparison runs, where wave packets straddling the discontinuity of the
    fixed-branch position/momentum operators would dominate the average);
    the draw order keeps the stream deterministic.
    """
    import numpy as np

    if not 0.0 <= seam_margin < 1.0:
        raise ValueError("seam_margin must lie in [0, 1)")
    limit = 1.0 - seam_margin
    rng = SplitMix64(seed)
    pts = np.empty((n, 2))
    for i in range(n):
        for j in (0, 1):
            v = rng.next_symmetric()
            while abs(v) > limit:
                v = rng.next_symmetric()
            pts[i, j] = v
    return pts
