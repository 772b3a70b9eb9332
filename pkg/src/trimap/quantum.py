"""Finite-dimensional quantum mechanics of the map on the torus.

States live on the position grid x_j = -1 + 2j/D as unit-norm complex
vectors; momenta take the values p_n = 2n/D, n = -D/2 .. D/2 - 1, stored in
standard DFT frequency order, so both spectra use the fixed branch [-1, 1).
The torus area 4 equals 2 pi hbar D, fixing hbar = 2 / (pi D).

One Floquet step is split-step spectral: multiply the potential phase
exp(-i V(x)/hbar) in position space, Fourier to momentum, multiply the
kinetic phase exp(-i p^2 / (2 hbar)), and transform back.  All transforms
use the unitary (norm-preserving) convention.
"""

import math
import os
from typing import Optional, Tuple

import numpy as np
import scipy.fft as _fft

from .params import MapParams
from .potential import potential_value

_FFT_WORKERS = max(1, min(os.cpu_count() or 1, 8))


def set_fft_workers(n: int) -> None:
    """Worker threads for the spectral transforms.

    The pocketfft backend partitions work deterministically, so results are
    bit-identical for any worker count; this only affects speed.
    """
    global _FFT_WORKERS
    _FFT_WORKERS = max(1, int(n))


def _to_momentum(state):
    return _fft.fft(state, axis=-1, norm="ortho", workers=_FFT_WORKERS)


def _to_position(state):
    return _fft.ifft(state, axis=-1, norm="ortho", workers=_FFT_WORKERS)


class FloquetSpec:
    """Grid, hbar, and cached one-step phases for a Hilbert dimension D.

    ``v_grid`` may override the potential samples (e.g. zeros to test free
    evolution); by default it is the round-off triangle potential evaluated
    on the position grid, shared with the classical module.
    """

    def __init__(self, dim: int, params: MapParams,
                 v_grid: Optional[np.ndarray] = None):
        if dim <= 0 or dim % 2 != 0:
            raise ValueError(f"Hilbert dimension must be a positive even integer, got {dim}")
        self.dim = int(dim)
        self.params = params
        self.hbar = 2.0 / (math.pi * self.dim)
        self.x_grid = -1.0 + 2.0 * np.arange(self.dim) / self.dim
        self.p_grid = 2.0 * np.fft.fftfreq(self.dim)
        if v_grid is None:
            v_grid = potential_value(self.x_grid, params)
        else:
            v_grid = np.asarray(v_grid, dtype=np.float64)
            if v_grid.shape != (self.dim,):
                raise ValueError("v_grid must have shape (dim,)")
        self.v_grid = v_grid
        self._pot_phase = np.exp(-1j * self.v_grid / self.hbar)
        self._kin_phase = np.exp(-1j * self.p_grid ** 2 / (2.0 * self.hbar))

    def __repr__(self):
        return (f"FloquetSpec(dim={self.dim}, hbar={self.hbar:.6g}, "
                f"r={self.params.r:.6g})")


def hbar_for_exponent(n: int) -> float:
    """hbar = 2^-n / pi."""
    return 2.0 ** (-n) / math.pi


def dim_for_hbar_exponent(n: int) -> int:
    """Hilbert dimension with hbar = 2^-n / pi, i.e. D = 2^(n+1)."""
    if n < 0:
        raise ValueError("exponent must be >= 0")
    return 2 ** (n + 1)


def build_coherent_state(center: Tuple[float, float], spec: FloquetSpec) -> np.ndarray:
    """Minimum-uncertainty Gaussian at (x_k, p_k), periodized and normalized.

    The plane-wave Gaussian (pi hbar)^(-1/4) exp(-(x-x_k)^2 / (2 hbar)
    + i p_k x / hbar) is summed over the images x + 2m, m in {-1, 0, +1},
    which captures the wrap-around mass to well below 1e-10 for every hbar
    in use, then renormalized to unit 2-norm on the grid.
    """
    xk, pk = center
    hbar = spec.hbar
    x = spec.x_grid
    psi = np.zeros(spec.dim, dtype=np.complex128)
    for m in (-1, 0, 1):
        xs = x + 2.0 * m
        psi += np.exp(-((xs - xk) ** 2) / (2.0 * hbar) + 1j * pk * xs / hbar)
    norm = np.linalg.norm(psi)
    if norm == 0.0:
        raise ValueError("coherent state vanished on the grid")
    return psi / norm


def floquet_apply(state: np.ndarray, spec: FloquetSpec,
                  direction: str = "forward") -> np.ndarray:
    """One unitary step (or its exact adjoint) on a state or (..., D) batch."""
    if direction == "forward":
        work = _to_momentum(state * spec._pot_phase)
        work *= spec._kin_phase
        return _to_position(work)
    if direction == "backward":
        work = _to_momentum(state)
        work = work * np.conj(spec._kin_phase)
        work = _to_position(work)
        work *= np.conj(spec._pot_phase)
        return work
    raise ValueError("direction must be 'forward' or 'backward'")


def apply_position(state: np.ndarray, spec: FloquetSpec) -> np.ndarray:
    """x-hat |state>: pointwise multiply by the position grid (unnormalized)."""
    return state * spec.x_grid


def apply_momentum(state: np.ndarray, spec: FloquetSpec) -> np.ndarray:
    """p-hat |state>: multiply by p in the momentum representation."""
    work = _to_momentum(state)
    work *= spec.p_grid
    return _to_position(work)


def momentum_representation(state: np.ndarray) -> np.ndarray:
    """Unitary transform to the momentum basis (DFT frequency order)."""
    return _to_momentum(state)


def momentum_multiply(state: np.ndarray, spec: FloquetSpec,
                      diagonals: np.ndarray) -> np.ndarray:
    """Apply momentum-diagonal operators to one state.

    diagonals has shape (m, D): the state is transformed once and each row
    multiplies it in the momentum basis, returning an (m, D) batch.
    """
    tilde = _to_momentum(state)
    return _to_position(np.asarray(diagonals) * tilde)


DENSE_DIM_LIMIT = 256


def dense_oracle(spec: FloquetSpec) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Explicit (U, X, P) matrices for verification, D <= 256 only.

    Columns of U are the Floquet images of basis vectors; X is diagonal in
    position; P is built by conjugating the momentum diagonal with the DFT.
    """
    if spec.dim > DENSE_DIM_LIMIT:
        raise ValueError(f"dense oracle limited to D <= {DENSE_DIM_LIMIT}, got {spec.dim}")
    basis = np.eye(spec.dim, dtype=np.complex128)
    u = floquet_apply(basis, spec).T
    x_mat = np.diag(spec.x_grid.astype(np.complex128))
    p_mat = apply_momentum(basis, spec).T
    return u, x_mat, p_mat
