import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, stats

from supdeconv import limitlaw, models
from supdeconv.errors import DomainError, GridTooCoarse
from supdeconv.estimator import SampleSet


class TestRayleigh:
    def test_cdf_values(self):
        assert limitlaw.rayleigh_cdf(0.0) == 0.0
        assert limitlaw.rayleigh_cdf(math.sqrt(2 * math.log(2))) == pytest.approx(0.5, abs=1e-15)

    def test_mean_by_quadrature(self):
        mean, _ = integrate.quad(lambda x: x * float(limitlaw.rayleigh_pdf(x)), 0, np.inf)
        assert mean == pytest.approx(math.sqrt(math.pi / 2), rel=1e-10)
        assert mean == pytest.approx(1.253314, abs=1e-6)

    def test_quantiles(self):
        assert limitlaw.rayleigh_quantile(0.0) == 0.0
        assert limitlaw.rayleigh_quantile(0.95) == pytest.approx(2.447747, abs=1e-6)
        assert limitlaw.rayleigh_quantile(0.5) == pytest.approx(1.177410, abs=1e-6)

    def test_round_trip(self):
        p = np.round(np.arange(1, 100) / 100, 2)
        np.testing.assert_allclose(limitlaw.rayleigh_cdf(limitlaw.rayleigh_quantile(p)), p, atol=1e-12, rtol=0)

    @given(st.floats(0.0, 1.0 - 1e-9))
    def test_round_trip_property(self, p):
        assert limitlaw.rayleigh_cdf(limitlaw.rayleigh_quantile(p)) == pytest.approx(p, abs=1e-12)

    def test_against_scipy(self):
        x = np.linspace(0, 6, 61)
        np.testing.assert_allclose(limitlaw.rayleigh_cdf(x), stats.rayleigh.cdf(x), atol=1e-15)
        np.testing.assert_allclose(limitlaw.rayleigh_pdf(x), stats.rayleigh.pdf(x), atol=1e-15)

    @pytest.mark.parametrize("p", [-0.1, 1.0, float("nan")])
    def test_quantile_domain(self, p):
        with pytest.raises(DomainError):
            limitlaw.rayleigh_quantile(p)


class TestWProcess:
    def test_covariance_entries(self):
        grid = limitlaw.periodic_grid(64)
        cov = limitlaw.w_covariance(grid)
        assert np.allclose(np.diag(cov), 0.5)
        assert cov[0, 32] == pytest.approx(-0.5)  # grid[32] = pi

    @pytest.mark.parametrize("points", [8, 64, 301])
    def test_rank_two(self, points, rng):
        grid = np.sort(rng.uniform(0, 2 * math.pi, points))
        vals = np.sort(np.linalg.eigvalsh(limitlaw.w_covariance(grid)))[::-1]
        assert vals[2] <= 1e-10 * vals[0]

    def test_square_root(self):
        cov = limitlaw.w_covariance(limitlaw.periodic_grid(64))
        root = limitlaw.covariance_sqrt(cov)
        np.testing.assert_allclose(root @ root.T, cov, atol=1e-12)

    def test_empirical_covariance(self):
        grid = limitlaw.periodic_grid(64)
        p = limitlaw.sample_w_process(grid, 11, paths=100_000).path
        rng = np.random.default_rng(5)
        for i, j in rng.integers(0, 64, size=(10, 2)):
            emp = np.mean(p[:, i] * p[:, j])
            assert abs(emp - 0.5 * math.cos(grid[i] - grid[j])) <= 0.01

    def test_seeded(self):
        grid = limitlaw.periodic_grid(16)
        a = limitlaw.sample_w_process(grid, 3).path
        np.testing.assert_array_equal(a, limitlaw.sample_w_process(grid, 3).path)
        assert a.shape == (16,)

    def test_empty_grid(self):
        with pytest.raises(DomainError):
            limitlaw.sample_w_process([], 0)

    def test_exact_formula(self):
        assert limitlaw.sup_abs_w_from_normals(0.0, 0.0) == 0.0
        assert limitlaw.sup_abs_w_from_normals(1.0, 0.0) == pytest.approx(math.sqrt(2) / 2)

    def test_exact_sampler_mean(self):
        draws = limitlaw.sup_abs_w_exact_sample(21, size=10**6)
        assert abs(draws.mean() - math.sqrt(math.pi) / 2) <= 0.002

    def test_path_sup_matches_exact(self):
        grid = limitlaw.periodic_grid(64)
        a = limitlaw.sup_abs_path(limitlaw.sample_w_process(grid, 1, paths=20_000))
        b = limitlaw.sup_abs_w_exact_sample(2, size=20_000)
        assert limitlaw.ks_two_sample(a, b) <= 0.02


class TestCosineProcess:
    def test_single_observation(self):
        assert limitlaw.cosine_process_sup(SampleSet([0.0]), 0.3) == pytest.approx(1.0, abs=1e-12)

    def test_lattice_cancellation(self):
        h = 0.2
        x = h * 2 * math.pi * np.arange(2048) / 2048
        assert limitlaw.cosine_process_sup(SampleSet(x), h) <= 0.05

    def test_matches_direct_sum(self, rng):
        x, h = rng.normal(0, 1.4, 300), 0.3
        sig, err = models.gaussian_signal(), models.gaussian_error()
        grid = np.linspace(0, 2 * math.pi, 20001)
        phi_g = complex(sig.phi_f(np.array([1 / h]))[0] * err.phi_k(1 / h))
        y = np.mod(x / h, 2 * math.pi)
        centered = np.cos(y[:, None] - grid[None, :]).sum(0) - x.size * (
            phi_g.real * np.cos(grid) + phi_g.imag * np.sin(grid))
        direct = np.max(np.abs(centered)) / math.sqrt(x.size)
        assert limitlaw.cosine_process_sup(SampleSet(x), h, sig, err) == pytest.approx(direct, rel=1e-6)

    def test_grid_minimum(self):
        with pytest.raises(GridTooCoarse):
            limitlaw.cosine_process_sup(SampleSet([0.0]), 0.3, grid_points=512)


class TestKs:
    @pytest.mark.parametrize("m", [1, 10, 257])
    def test_quantile_stairstep(self, m):
        p = (np.arange(1, m + 1) - 0.5) / m
        assert limitlaw.ks_one_sample(limitlaw.rayleigh_quantile(p), limitlaw.rayleigh_cdf) == pytest.approx(0.5 / m, abs=1e-12)

    def test_median_single(self):
        assert limitlaw.ks_one_sample([math.sqrt(2 * math.log(2))], limitlaw.rayleigh_cdf) == pytest.approx(0.5)

    def test_against_scipy(self, rng):
        v = rng.rayleigh(size=500) * 1.1
        assert limitlaw.ks_one_sample(v, limitlaw.rayleigh_cdf) == pytest.approx(
            stats.kstest(v, "rayleigh").statistic, abs=1e-14)
        w = rng.rayleigh(size=300)
        assert limitlaw.ks_two_sample(v, w) == pytest.approx(stats.ks_2samp(v, w).statistic, abs=1e-14)

    def test_wrong_law_bounded_away(self):
        rng = np.random.default_rng(2)
        ks = [limitlaw.ks_one_sample(rng.exponential(size=m), limitlaw.rayleigh_cdf) for m in (1000, 10000, 100000)]
        assert min(ks) > 0.1

    def test_empty(self):
        with pytest.raises(DomainError):
            limitlaw.ks_one_sample([], limitlaw.rayleigh_cdf)
