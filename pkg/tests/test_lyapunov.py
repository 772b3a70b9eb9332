import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trimap import (DEFAULT_ALPHA, MapParams, lyapunov_local_max,
                    lyapunov_numerical, lyapunov_series, lyapunov_simple,
                    lyapunov_star, max_eigenvalue_product)
from trimap.params import SQRT2
from trimap.rng import SplitMix64, uniform_points


def brute_force_series(r, alpha, n_terms=1_000_000):
    """Direct summation oracle for the return-time series."""
    p = SQRT2 * r
    q = 1.0 - p
    c = SQRT2 * abs(alpha) / r
    w = 1.0
    total = 0.0
    for tau in range(1, n_terms + 1):
        total += w * math.log(c * tau)
        w *= q
    return 2.0 * r * r * total


class TestClosedForms:
    def test_simple_r01(self):
        assert lyapunov_simple(MapParams(r=0.1)) == pytest.approx(0.6581864, abs=1e-6)

    def test_simple_r001(self):
        assert lyapunov_simple(MapParams(r=0.01)) == pytest.approx(0.1309460, abs=2e-6)

    def test_simple_identity_with_mean_return(self):
        # sqrt(2) r ln(|alpha|/r^2) == (1/tau_bar) ln(sqrt(2)|alpha| tau_bar / r)
        for r in (0.3, 0.07, 0.004):
            params = MapParams(r=r)
            tau_bar = 1.0 / (SQRT2 * r)
            rhs = math.log(SQRT2 * abs(DEFAULT_ALPHA) * tau_bar / r) / tau_bar
            assert lyapunov_simple(params) == pytest.approx(rhs, rel=1e-12)

    def test_local_max(self):
        assert lyapunov_local_max(MapParams(r=0.1)) == pytest.approx(2.6981, abs=1e-4)
        assert lyapunov_local_max(MapParams(r=0.01)) == pytest.approx(5.0007, abs=1e-4)

    def test_local_max_grows_as_r_shrinks(self):
        vals = [lyapunov_local_max(MapParams(r=r)) for r in (0.2, 0.1, 0.02, 0.004)]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_star(self):
        assert lyapunov_star(MapParams(r=0.1)) == pytest.approx(1.7201, abs=1e-4)
        assert lyapunov_star(MapParams(r=0.01)) == pytest.approx(2.8714, abs=1e-4)

    def test_star_diverges_as_r_shrinks(self):
        vals = [lyapunov_star(MapParams(r=r)) for r in (1e-2, 1e-4, 1e-6)]
        assert vals[0] < vals[1] < vals[2]

    def test_preconditions(self):
        with pytest.raises(ValueError):
            lyapunov_simple(MapParams(alpha=-0.4, r=0.7))  # |alpha|/r^2 < 1


class TestSeries:
    def test_matches_brute_force(self):
        params = MapParams(r=0.1)
        assert lyapunov_series(params) == pytest.approx(
            brute_force_series(0.1, DEFAULT_ALPHA), rel=1e-10)

    def test_matches_brute_force_small_r(self):
        params = MapParams(r=0.004)
        assert lyapunov_series(params) == pytest.approx(
            brute_force_series(0.004, DEFAULT_ALPHA), rel=1e-10)

    def test_within_factor_two_of_simple(self):
        for r in np.geomspace(1e-3, 0.2, 12):
            ratio = lyapunov_series(MapParams(r=r)) / lyapunov_simple(MapParams(r=r))
            assert 0.5 < ratio < 2.0

    def test_vanishes_as_r_to_zero(self):
        vals = [lyapunov_series(MapParams(r=r)) for r in (1e-2, 1e-3, 1e-4)]
        assert vals[0] > vals[1] > vals[2] > 0.0

    def test_below_local_max(self):
        for r in (0.3, 0.1, 0.01, 1e-3):
            assert lyapunov_series(MapParams(r=r)) < lyapunov_local_max(MapParams(r=r))

    def test_r_zero_rejected(self):
        with pytest.raises(ValueError):
            lyapunov_series(MapParams(r=0.0))


class TestEigenvalueIdentity:
    def test_two_factor_example(self):
        assert max_eigenvalue_product([(1, 2), (3, 4)]) == 21
        prod = np.array([[1, 2], [1, 2]]) @ np.array([[3, 4], [3, 4]])
        np.testing.assert_array_equal(prod, [[9, 12], [9, 12]])
        eig = np.linalg.eigvals(prod.astype(float))
        assert sorted(np.round(eig, 12)) == [0.0, 21.0]

    def test_single_factor(self):
        assert max_eigenvalue_product([(2.5, 0.5)]) == 3.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            max_eigenvalue_product([])

    @given(st.integers(min_value=0, max_value=2**32))
    @settings(max_examples=25, deadline=None)
    def test_random_factors_match_dense_eigensolve(self, seed):
        rng = SplitMix64(seed)
        factors = [(0.1 + 5.0 * rng.next_unit(), 0.1 + 5.0 * rng.next_unit())
                   for _ in range(10)]
        mats = [np.array([[a, b], [a, b]]) for a, b in factors]
        prod = np.eye(2)
        for m in mats:
            prod = prod @ m
        dense_max = max(np.linalg.eigvals(prod).real)
        assert max_eigenvalue_product(factors) == pytest.approx(dense_max, rel=1e-9)


class TestNumerical:
    def test_agrees_with_series_r01(self):
        params = MapParams(r=0.1)
        lam = lyapunov_numerical(params, n_steps=150_000, n_orbits=32, seed=3)
        assert lam == pytest.approx(lyapunov_series(params), rel=0.15)

    def test_seed_consistency_r02(self):
        params = MapParams(r=0.2)
        a = lyapunov_numerical(params, n_steps=120_000, n_orbits=32, seed=10)
        b = lyapunov_numerical(params, n_steps=120_000, n_orbits=32, seed=20)
        assert a == pytest.approx(b, rel=0.05)

    def test_decreasing_in_r(self):
        rs = (0.2, 0.1, 0.05, 0.025, 0.0125)
        vals = [lyapunov_numerical(MapParams(r=r), n_steps=60_000,
                                   n_orbits=24, seed=5) for r in rs]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_stable_under_doubling(self):
        params = MapParams(r=0.1)
        base = lyapunov_numerical(params, n_steps=100_000, n_orbits=24, seed=6)
        double_t = lyapunov_numerical(params, n_steps=200_000, n_orbits=24, seed=6)
        double_n = lyapunov_numerical(params, n_steps=100_000, n_orbits=48, seed=6)
        assert double_t == pytest.approx(base, rel=0.05)
        assert double_n == pytest.approx(base, rel=0.05)

    def test_r_zero_rejected(self):
        with pytest.raises(ValueError):
            lyapunov_numerical(MapParams(r=0.0))


class TestRenewalConstruction:
    def test_passage_product_converges_to_series(self):
        # Monte-Carlo oracle of the renewal construction: sample geometric
        # return times, multiply the per-passage top-eigenvalue factors, and
        # normalize by elapsed time.
        params = MapParams(r=0.05)
        p = SQRT2 * params.r
        c = SQRT2 * abs(params.alpha) / params.r
        rng = SplitMix64(1234)
        m0 = 20_000
        log_emax = 0.0
        total_time = 0
        for _ in range(m0):
            tau = 1
            while rng.next_unit() >= p:
                tau += 1
            log_emax += math.log(c * tau)
            total_time += tau
        estimate = log_emax / total_time
        assert estimate == pytest.approx(lyapunov_series(params), rel=0.05)

    def test_dwell_fraction_decay(self):
        # the fraction of orbits staying inside E for their first t steps
        # decays as (sqrt(2) r)^t
        from trimap import map_step
        from trimap.dynamics import PhasePoint
        from trimap.potential import RegionTag, classify_region

        params = MapParams(r=0.2)
        p_r = SQRT2 * params.r
        n = 40_000
        pts = uniform_points(n, 88)
        counts = np.zeros(4, dtype=int)
        for x0, p0 in pts:
            pt = PhasePoint(x0, p0)
            for t in range(4):
                if classify_region(pt.x, params) is RegionTag.OUTSIDE:
                    break
                counts[t] += 1
                pt = map_step(pt, params)
        expected = n * p_r ** np.arange(1, 5)
        for t in range(4):
            sigma = math.sqrt(expected[t])
            assert abs(counts[t] - expected[t]) < 5.0 * sigma + 10.0
