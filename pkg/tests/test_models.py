import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from supdeconv import models
from supdeconv.errors import ConfigError, DomainError, OverflowGuard

from conftest import flat_error


class TestZeta:
    def test_values(self):
        assert models.zeta(0.5, 2, 2) == pytest.approx(math.e**2, rel=1e-14)
        assert models.zeta(1, 1, 2) == pytest.approx(math.e, rel=1e-14)

    def test_guard_boundary(self):
        # exponent 1/(2 * 0.05^2) = 200 is inside the guard
        assert math.log(models.zeta(0.05, 2, 2)) == pytest.approx(200.0, rel=1e-12)
        with pytest.raises(OverflowGuard):
            models.zeta(0.01, 2, 2)

    def test_bad_arguments(self):
        with pytest.raises(DomainError):
            models.zeta(0.0, 2, 2)
        with pytest.raises(DomainError):
            models.zeta(0.5, -1, 2)

    @given(st.floats(0.05, 1.0), st.floats(0.05, 1.0))
    def test_strictly_decreasing_in_h(self, h1, h2):
        if h1 == h2:
            return
        lo, hi = sorted((h1, h2))
        assert models.zeta(lo, 2, 2) > models.zeta(hi, 2, 2)

    @given(st.floats(0.1, 1.0), st.floats(0.5, 4.0), st.floats(0.5, 2.0))
    def test_log_domain_consistency(self, h, mu, lam):
        expected = (1.0 / mu) * h ** (-lam)
        assert math.log(models.zeta(h, mu, lam)) == pytest.approx(expected, rel=1e-12)


class TestGamma:
    @pytest.mark.parametrize("x, expected", [(1, 1.0), (4, 6.0), (0.5, math.sqrt(math.pi))])
    def test_known_values(self, x, expected):
        assert models.gamma_fn(x) == pytest.approx(expected, rel=1e-12)

    def test_against_scipy_on_range(self):
        xs = np.linspace(0.5, 20, 400)
        rel = [abs(models.gamma_fn(x) / special.gamma(x) - 1) for x in xs]
        assert max(rel) <= 1e-10

    def test_recurrence(self):
        rng = np.random.default_rng(7)
        for x in rng.uniform(0.5, 10, 100):
            assert models.gamma_fn(x + 1) == pytest.approx(x * models.gamma_fn(x), rel=1e-9)

    def test_small_argument_reflection(self):
        assert models.gamma_fn(0.1) == pytest.approx(special.gamma(0.1), rel=1e-12)

    @pytest.mark.parametrize("x", [0.0, -1.0, -0.5])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            models.gamma_fn(x)


class TestErrorModels:
    def test_gaussian_parameters(self):
        e = models.gaussian_error()
        assert (e.lam, e.lambda0, e.mu, e.C) == (2.0, 0.0, 2.0, 1.0)

    def test_phi_k_values(self):
        e = models.gaussian_error()
        assert models.phi_k_eval(e, 0.0) == 1.0
        assert models.phi_k_eval(e, 1.0) == pytest.approx(math.exp(-0.5), rel=1e-15)
        m = models.gaussian_laplace_mix_error()
        assert models.phi_k_eval(m, 2.0) == pytest.approx(math.exp(-2.0) / 5.0, rel=1e-15)

    def test_log_phi_k_matches(self, error):
        t = np.linspace(-8, 8, 33)
        np.testing.assert_allclose(np.exp(error.log_phi_k(t)), error.phi_k(t), rtol=1e-13)

    def test_samplers_match_characteristic_function(self, error):
        rng = np.random.default_rng(3)
        z = error.sampler(rng, 200_000)
        for t in (0.5, 1.0, 1.5):
            emp = np.mean(np.cos(t * z))
            assert abs(emp - error.phi_k(t)) < 4 / math.sqrt(200_000)

    def test_tail_ratio_within_one_percent(self, error):
        for t in models.TAIL_POINTS:
            ratio = math.exp(error.log_phi_k(t) - error.log_tail(t))
            assert abs(ratio - 1) <= 0.01


class TestKernels:
    def test_edge_expansion(self, kernel):
        for t in (1e-2, 1e-3):
            assert kernel.phi_w(1 - t) / (kernel.A * t**kernel.alpha) == pytest.approx(1, abs=0.02)

    def test_polynomial_constants(self):
        k = models.polynomial_kernel(3)
        assert (k.A, k.alpha) == (8.0, 3.0)
        k = models.sinc_flat_kernel()
        assert (k.A, k.alpha) == (1.0, 0.0)

    def test_support_and_symmetry(self, kernel):
        s = np.linspace(-2, 2, 401)
        np.testing.assert_array_equal(kernel.phi_w(s), kernel.phi_w(-s))
        assert np.all(kernel.phi_w(s[np.abs(s) > 1]) == 0)
        assert kernel.phi_w(0.0) == 1.0

    def test_bad_order(self):
        with pytest.raises(ConfigError):
            models.polynomial_kernel(-1)


class TestSignals:
    @pytest.mark.parametrize("signal", [
        models.gaussian_signal(0.3, 0.7),
        models.gaussian_mixture_signal([0.3, 0.7], [-1.0, 1.5], [0.5, 1.0]),
    ])
    def test_density_and_cf(self, signal):
        total, _ = integrate.quad(lambda x: float(signal.pdf(x)), -np.inf, np.inf, epsabs=1e-12)
        assert total == pytest.approx(1.0, abs=1e-6)
        assert np.all(signal.pdf(np.linspace(-10, 10, 101)) >= 0)
        assert signal.phi_f(0.0) == pytest.approx(1.0)
        # phi_f against quadrature of the density
        re, _ = integrate.quad(lambda x: float(signal.pdf(x)) * math.cos(0.8 * x), -30, 30, limit=200)
        im, _ = integrate.quad(lambda x: float(signal.pdf(x)) * math.sin(0.8 * x), -30, 30, limit=200)
        assert complex(signal.phi_f(0.8)) == pytest.approx(complex(re, im), abs=1e-9)

    def test_mixture_validation(self):
        with pytest.raises(ConfigError):
            models.gaussian_mixture_signal([0.5, 0.6], [0, 1], [1, 1])
        with pytest.raises(ConfigError):
            models.gaussian_signal(0, 0)


class TestValidation:
    def test_gaussian_sinc_all_pass(self):
        rep = models.validate_conditions(models.gaussian_error(), models.sinc_flat_kernel())
        assert rep.all_passed and rep.theorem_applicable
        assert (rep.A, rep.alpha) == (1.0, 0.0)

    def test_polynomial(self):
        rep = models.validate_conditions(models.gaussian_error(), models.polynomial_kernel(3))
        assert rep.all_passed
        assert (rep.A, rep.alpha) == (8.0, 3.0)

    def test_all_builtins_pass(self, error, kernel):
        assert models.validate_conditions(error, kernel).all_passed

    def test_vanishing_phi_k_fails(self):
        bad = flat_error(name="cos", phi_k=lambda t: np.cos(np.asarray(t, dtype=float)) * np.exp(-0.5 * np.asarray(t) ** 2))
        rep = models.validate_conditions(bad, models.sinc_flat_kernel())
        assert "phi_k(t) != 0" in rep.failed()

    def test_lambda_below_two_not_applicable(self):
        e = flat_error(name="stable1", lam=1.0, mu=1.0, phi_k=lambda t: np.exp(-np.abs(np.asarray(t, dtype=float))))
        rep = models.validate_conditions(e, models.sinc_flat_kernel())
        assert rep.all_passed
        assert not rep.theorem_applicable

    def test_wrong_edge_constants_fail(self):
        k = models.KernelModel("bad", lambda s: (1 - np.asarray(s) ** 2) ** 2, A=1.0, alpha=2.0)
        assert "phi_w(1-t) / (A t^alpha) -> 1" in models.validate_conditions(models.gaussian_error(), k).failed()


class TestSerialization:
    def test_round_trip(self):
        d = {"error": {"name": "gaussian_laplace_mix"},
             "kernel": {"name": "polynomial_m", "params": {"m": 3}},
             "signal": {"name": "gaussian_mixture",
                        "params": {"weights": [0.5, 0.5], "means": [0, 1], "sds": [1, 1]}}}
        e, k, s = models.models_from_dict(d)
        again = models.models_to_dict(e, k, s)
        assert again["error"]["name"] == "gaussian_laplace_mix"
        assert again["kernel"] == {"name": "polynomial_m", "params": {"m": 3}}
        assert models.models_from_dict(again)[2].weights == (0.5, 0.5)

    def test_unknown_model(self):
        with pytest.raises(ConfigError):
            models.error_from_dict({"name": "cauchy"})
        with pytest.raises(ConfigError):
            models.models_from_dict({"error": "gaussian"})
