"""Hot loops for classical orbit and tangent-map evolution.

Two interchangeable backends provide the same four kernels:

* a numba ``@njit`` backend (default when numba imports cleanly), with the
  batch kernels parallelized over trajectories, and
* a pure-numpy fallback, vectorized over the batch dimension with the time
  loop in Python.

Set ``TRIMAP_DISABLE_NUMBA=1`` to force the fallback.  ``BACKEND`` names the
active one; both are importable (``numpy_impl``, ``numba_impl``) so tests and
benchmarks can compare them directly.

Tangent frames are carried in extended range: the 2x2 Jacobian is stored as
a matrix renormalized to max-norm [1, 2) times an exact power of two, whose
exponent accumulates in an int64.  Squared Jacobian entries reach
exp(2*lambda*t), which overflows doubles within tens of steps, so all growth
output is in natural-log units.
"""

import math
import os
from types import SimpleNamespace

import numpy as np

_SQRT2 = math.sqrt(2.0)
_LN2 = math.log(2.0)

ENV_FLAG = "TRIMAP_DISABLE_NUMBA"


def _numba_wanted() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() not in ("1", "true", "yes", "on")


# ---------------------------------------------------------------------------
# scalar helpers (plain Python; also the source for the jitted versions)
# ---------------------------------------------------------------------------

def _wrap_s(x):
    return x - 2.0 * math.floor((x + 1.0) * 0.5)


def _vp_s(x, alpha, r):
    ax = abs(x)
    half = 0.5 * _SQRT2 * r
    if r > 0.0 and ax <= half:
        return -alpha * x / math.sqrt(r * r - x * x)
    if r > 0.0 and ax >= 1.0 - half:
        d = ax - 1.0
        slope = alpha * d / math.sqrt(r * r - d * d)
        return slope if x >= 0.0 else -slope
    return -alpha if x >= 0.0 else alpha


def _vpp_s(x, alpha, r):
    ax = abs(x)
    half = 0.5 * _SQRT2 * r
    if r > 0.0 and ax <= half:
        s = math.sqrt(r * r - x * x)
        return -alpha / s - alpha * x * x / (s * s * s)
    if r > 0.0 and ax >= 1.0 - half:
        d = ax - 1.0
        s = math.sqrt(r * r - d * d)
        return alpha / s + alpha * d * d / (s * s * s)
    return 0.0


def _in_e_s(x, r):
    ax = abs(x)
    half = 0.5 * _SQRT2 * r
    return ax <= half or ax >= 1.0 - half


# ---------------------------------------------------------------------------
# loop kernels (jitted by the numba backend, reused in plain Python where
# vectorization does not pay off)
# ---------------------------------------------------------------------------

def _tangent_batch_loop(x0, p0, n_steps, alpha, r, out):
    n = x0.shape[0]
    for i in range(n):
        x = x0[i]
        p = p0[i]
        m00 = 1.0
        m01 = 0.0
        m10 = 0.0
        m11 = 1.0
        ex = 0
        out[i, 0] = 0.0
        for t in range(1, n_steps + 1):
            c = _vpp_s(x, alpha, r)
            n00 = (1.0 - c) * m00 + m10
            n01 = (1.0 - c) * m01 + m11
            n10 = m10 - c * m00
            n11 = m11 - c * m01
            s = abs(n00)
            if abs(n01) > s:
                s = abs(n01)
            if abs(n10) > s:
                s = abs(n10)
            if abs(n11) > s:
                s = abs(n11)
            if s > 0.0:
                _, e = math.frexp(s)
                k = e - 1
                sc = math.ldexp(1.0, -k)
                m00 = n00 * sc
                m01 = n01 * sc
                m10 = n10 * sc
                m11 = n11 * sc
                ex += k
            else:
                m00 = n00
                m01 = n01
                m10 = n10
                m11 = n11
            p = _wrap_s(p - _vp_s(x, alpha, r))
            x = _wrap_s(x + p)
            if m00 == 0.0:
                out[i, t] = -np.inf
            else:
                out[i, t] = 2.0 * (ex * _LN2 + math.log(abs(m00)))


def _benettin_batch_loop(x0, p0, n_steps, alpha, r, out):
    n = x0.shape[0]
    for i in range(n):
        x = x0[i]
        p = p0[i]
        v0 = 1.0
        v1 = 0.0
        acc = 0.0
        for _ in range(n_steps):
            c = _vpp_s(x, alpha, r)
            w0 = (1.0 - c) * v0 + v1
            w1 = v1 - c * v0
            nrm = math.sqrt(w0 * w0 + w1 * w1)
            acc += math.log(nrm)
            v0 = w0 / nrm
            v1 = w1 / nrm
            p = _wrap_s(p - _vp_s(x, alpha, r))
            x = _wrap_s(x + p)
        out[i] = acc


def _return_time_loop(x0, p0, n_steps, alpha, r, hist):
    max_tau = hist.shape[0]
    sum_tau = 0
    count = 0
    overflow = 0
    n = x0.shape[0]
    for i in range(n):
        x = x0[i]
        p = p0[i]
        last = -1
        for t in range(n_steps + 1):
            if _in_e_s(x, r):
                if last >= 0:
                    tau = t - last
                    sum_tau += tau
                    count += 1
                    if tau <= max_tau:
                        hist[tau - 1] += 1
                    else:
                        overflow += 1
                last = t
            p = _wrap_s(p - _vp_s(x, alpha, r))
            x = _wrap_s(x + p)
    return sum_tau, count, overflow


def _orbit_hist_loop(x0, p0, n_steps, alpha, r, counts):
    nbins = counts.shape[0]
    x = x0
    p = p0
    for _ in range(n_steps):
        p = _wrap_s(p - _vp_s(x, alpha, r))
        x = _wrap_s(x + p)
        b = int((x + 1.0) * 0.5 * nbins)
        if b >= nbins:
            b = nbins - 1
        counts[b] += 1


# ---------------------------------------------------------------------------
# numpy backend: batch-vectorized, time loop in Python
# ---------------------------------------------------------------------------

def _np_wrap(x):
    return x - 2.0 * np.floor((x + 1.0) * 0.5)


def _np_vp(x, alpha, r):
    ax = np.abs(x)
    half = 0.5 * _SQRT2 * r
    in_e0 = (ax <= half) & (r > 0.0)
    in_e1 = (ax >= 1.0 - half) & (r > 0.0)
    d = ax - 1.0
    s0 = np.sqrt(np.maximum(r * r - x * x, 0.0))
    s1 = np.sqrt(np.maximum(r * r - d * d, 0.0))
    sgn = np.where(x >= 0.0, 1.0, -1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        d0 = -alpha * x / s0
        d1 = sgn * alpha * d / s1
    return np.where(in_e0, d0, np.where(in_e1, d1, -alpha * sgn))


def _np_vpp(x, alpha, r):
    ax = np.abs(x)
    half = 0.5 * _SQRT2 * r
    in_e0 = (ax <= half) & (r > 0.0)
    in_e1 = (ax >= 1.0 - half) & (r > 0.0)
    d = ax - 1.0
    s0 = np.sqrt(np.maximum(r * r - x * x, 0.0))
    s1 = np.sqrt(np.maximum(r * r - d * d, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        c0 = -alpha / s0 - alpha * x * x / (s0 * s0 * s0)
        c1 = alpha / s1 + alpha * d * d / (s1 * s1 * s1)
    return np.where(in_e0, c0, np.where(in_e1, c1, 0.0))


def _np_tangent_batch(x0, p0, n_steps, alpha, r):
    x = np.array(x0, dtype=np.float64)
    p = np.array(p0, dtype=np.float64)
    n = x.shape[0]
    out = np.empty((n, n_steps + 1))
    out[:, 0] = 0.0
    m00 = np.ones(n)
    m01 = np.zeros(n)
    m10 = np.zeros(n)
    m11 = np.ones(n)
    ex = np.zeros(n, dtype=np.int64)
    for t in range(1, n_steps + 1):
        c = _np_vpp(x, alpha, r)
        n00 = (1.0 - c) * m00 + m10
        n01 = (1.0 - c) * m01 + m11
        n10 = m10 - c * m00
        n11 = m11 - c * m01
        s = np.maximum(np.maximum(np.abs(n00), np.abs(n01)),
                       np.maximum(np.abs(n10), np.abs(n11)))
        _, e = np.frexp(s)
        k = np.where(s > 0.0, e.astype(np.int64) - 1, 0)
        sc = np.ldexp(1.0, -k)
        m00 = n00 * sc
        m01 = n01 * sc
        m10 = n10 * sc
        m11 = n11 * sc
        ex += k
        p = _np_wrap(p - _np_vp(x, alpha, r))
        x = _np_wrap(x + p)
        with np.errstate(divide="ignore"):
            out[:, t] = 2.0 * (ex * _LN2 + np.log(np.abs(m00)))
    return out


def _np_benettin_batch(x0, p0, n_steps, alpha, r):
    x = np.array(x0, dtype=np.float64)
    p = np.array(p0, dtype=np.float64)
    n = x.shape[0]
    v0 = np.ones(n)
    v1 = np.zeros(n)
    acc = np.zeros(n)
    for _ in range(n_steps):
        c = _np_vpp(x, alpha, r)
        w0 = (1.0 - c) * v0 + v1
        w1 = v1 - c * v0
        nrm = np.sqrt(w0 * w0 + w1 * w1)
        acc += np.log(nrm)
        v0 = w0 / nrm
        v1 = w1 / nrm
        p = _np_wrap(p - _np_vp(x, alpha, r))
        x = _np_wrap(x + p)
    return acc


def _np_return_times(x0, p0, n_steps, alpha, r, max_tau):
    hist = np.zeros(max_tau, dtype=np.int64)
    sum_tau, count, overflow = _return_time_loop(
        np.asarray(x0, dtype=np.float64), np.asarray(p0, dtype=np.float64),
        n_steps, alpha, r, hist)
    return hist, sum_tau, count, overflow


def _np_orbit_hist(x0, p0, n_steps, alpha, r, nbins):
    counts = np.zeros(nbins, dtype=np.int64)
    _orbit_hist_loop(float(x0), float(p0), n_steps, alpha, r, counts)
    return counts


numpy_impl = SimpleNamespace(
    tangent_log_j00_sq=_np_tangent_batch,
    benettin_log_growth=_np_benettin_batch,
    return_time_histogram=_np_return_times,
    orbit_x_histogram=_np_orbit_hist,
)


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

numba_impl = None
if _numba_wanted():
    try:
        import numba
        from numba import njit, prange
    except ImportError:
        numba = None
    if numba is not None:
        _nb_wrap = njit(cache=True)(_wrap_s)
        _nb_vp = njit(cache=True)(_vp_s)
        _nb_vpp = njit(cache=True)(_vpp_s)
        _nb_in_e = njit(cache=True)(_in_e_s)

        @njit(cache=True, parallel=True)
        def _nb_tangent_batch_loop(x0, p0, n_steps, alpha, r, out):  # pragma: no cover - jitted
            n = x0.shape[0]
            for i in prange(n):
                x = x0[i]
                p = p0[i]
                m00 = 1.0
                m01 = 0.0
                m10 = 0.0
                m11 = 1.0
                ex = 0
                out[i, 0] = 0.0
                for t in range(1, n_steps + 1):
                    c = _nb_vpp(x, alpha, r)
                    n00 = (1.0 - c) * m00 + m10
                    n01 = (1.0 - c) * m01 + m11
                    n10 = m10 - c * m00
                    n11 = m11 - c * m01
                    s = abs(n00)
                    if abs(n01) > s:
                        s = abs(n01)
                    if abs(n10) > s:
                        s = abs(n10)
                    if abs(n11) > s:
                        s = abs(n11)
                    if s > 0.0:
                        _, e = math.frexp(s)
                        k = e - 1
                        sc = math.ldexp(1.0, -k)
                        m00 = n00 * sc
                        m01 = n01 * sc
                        m10 = n10 * sc
                        m11 = n11 * sc
                        ex += k
                    else:
                        m00 = n00
                        m01 = n01
                        m10 = n10
                        m11 = n11
                    p = _nb_wrap(p - _nb_vp(x, alpha, r))
                    x = _nb_wrap(x + p)
                    if m00 == 0.0:
                        out[i, t] = -np.inf
                    else:
                        out[i, t] = 2.0 * (ex * _LN2 + math.log(abs(m00)))

        @njit(cache=True, parallel=True)
        def _nb_benettin_batch_loop(x0, p0, n_steps, alpha, r, out):  # pragma: no cover - jitted
            n = x0.shape[0]
            for i in prange(n):
                x = x0[i]
                p = p0[i]
                v0 = 1.0
                v1 = 0.0
                acc = 0.0
                for _ in range(n_steps):
                    c = _nb_vpp(x, alpha, r)
                    w0 = (1.0 - c) * v0 + v1
                    w1 = v1 - c * v0
                    nrm = math.sqrt(w0 * w0 + w1 * w1)
                    acc += math.log(nrm)
                    v0 = w0 / nrm
                    v1 = w1 / nrm
                    p = _nb_wrap(p - _nb_vp(x, alpha, r))
                    x = _nb_wrap(x + p)
                out[i] = acc

        @njit(cache=True)
        def _nb_return_time_loop(x0, p0, n_steps, alpha, r, hist):  # pragma: no cover - jitted
            max_tau = hist.shape[0]
            sum_tau = 0
            count = 0
            overflow = 0
            n = x0.shape[0]
            for i in range(n):
                x = x0[i]
                p = p0[i]
                last = -1
                for t in range(n_steps + 1):
                    if _nb_in_e(x, r):
                        if last >= 0:
                            tau = t - last
                            sum_tau += tau
                            count += 1
                            if tau <= max_tau:
                                hist[tau - 1] += 1
                            else:
                                overflow += 1
                        last = t
                    p = _nb_wrap(p - _nb_vp(x, alpha, r))
                    x = _nb_wrap(x + p)
            return sum_tau, count, overflow

        @njit(cache=True)
        def _nb_orbit_hist_loop(x0, p0, n_steps, alpha, r, counts):  # pragma: no cover - jitted
            nbins = counts.shape[0]
            x = x0
            p = p0
            for _ in range(n_steps):
                p = _nb_wrap(p - _nb_vp(x, alpha, r))
                x = _nb_wrap(x + p)
                b = int((x + 1.0) * 0.5 * nbins)
                if b >= nbins:
                    b = nbins - 1
                counts[b] += 1

        def _nb_tangent_batch(x0, p0, n_steps, alpha, r):
            x0 = np.ascontiguousarray(x0, dtype=np.float64)
            p0 = np.ascontiguousarray(p0, dtype=np.float64)
            out = np.empty((x0.shape[0], n_steps + 1))
            _nb_tangent_batch_loop(x0, p0, n_steps, alpha, r, out)
            return out

        def _nb_benettin_batch(x0, p0, n_steps, alpha, r):
            x0 = np.ascontiguousarray(x0, dtype=np.float64)
            p0 = np.ascontiguousarray(p0, dtype=np.float64)
            out = np.empty(x0.shape[0])
            _nb_benettin_batch_loop(x0, p0, n_steps, alpha, r, out)
            return out

        def _nb_return_times(x0, p0, n_steps, alpha, r, max_tau):
            hist = np.zeros(max_tau, dtype=np.int64)
            sum_tau, count, overflow = _nb_return_time_loop(
                np.ascontiguousarray(x0, dtype=np.float64),
                np.ascontiguousarray(p0, dtype=np.float64),
                n_steps, alpha, r, hist)
            return hist, sum_tau, count, overflow

        def _nb_orbit_hist(x0, p0, n_steps, alpha, r, nbins):
            counts = np.zeros(nbins, dtype=np.int64)
            _nb_orbit_hist_loop(float(x0), float(p0), n_steps, alpha, r, counts)
            return counts

        numba_impl = SimpleNamespace(
            tangent_log_j00_sq=_nb_tangent_batch,
            benettin_log_growth=_nb_benettin_batch,
            return_time_histogram=_nb_return_times,
            orbit_x_histogram=_nb_orbit_hist,
        )


if numba_impl is not None:
    BACKEND = "numba"
    _active = numba_impl
else:
    BACKEND = "numpy"
    _active = numpy_impl

tangent_log_j00_sq = _active.tangent_log_j00_sq
benettin_log_growth = _active.benettin_log_growth
return_time_histogram = _active.return_time_histogram
orbit_x_histogram = _active.orbit_x_histogram


def set_threads(n: int) -> None:
    """Cap the worker count of the numba backend (no-op for numpy)."""
    if BACKEND == "numba":
        import numba

        numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))


def warmup() -> None:
    """Trigger jit compilation on tiny inputs so timings exclude it."""
    x = np.array([0.1, -0.4])
    p = np.array([0.3, 0.2])
    tangent_log_j00_sq(x, p, 2, -1.05, 0.1)
    benettin_log_growth(x, p, 2, -1.05, 0.1)
    return_time_histogram(x, p, 10, -1.05, 0.1, 8)
    orbit_x_histogram(0.1, 0.3, 10, -1.05, 0.1, 4)
