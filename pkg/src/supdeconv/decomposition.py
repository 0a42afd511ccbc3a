"""Main term plus three remainders of the deconvolution estimator.

With s = h t and a cut-off eps in (0, 1),

    f_nh(x) = main(x) + R1(x) + R2(x) + R3(x)

where main is a scalar integral times (1/n) sum_j cos((X_j - x)/h), R1 the
error of freezing the frequency at s = 1 inside that integral, R2 the
low-frequency part |s| < eps, and R3 the deviation of 1/phi_k from its
exponential tail form on eps <= |s| <= 1.

Sample-dependent pieces are averages over observations; they are evaluated
through the empirical characteristic function on the quadrature nodes, which
is the same average taken in the other order.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate

from .errors import ConfigError, DomainError
from .estimator import (
    EstimateGrid,
    EstimatorConfig,
    SampleSet,
    deconv_estimate,
    ecf_on_nodes,
)
from .models import ErrorModel, KernelModel, SignalModel, gamma_fn, zeta_exponent
from .quadrature import QuadratureSpec

DEFAULT_EPSILON = 0.5
#: u is only evaluated away from the origin, where it may be unbounded.
U_DELTA = 0.1


@dataclass(frozen=True)
class DecompositionConfig:
    epsilon: float = DEFAULT_EPSILON
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ConfigError(f"epsilon must lie in (0, 1), got {self.epsilon}")


@dataclass
class DecompositionResult:
    main_term: EstimateGrid
    r1: EstimateGrid
    r2: EstimateGrid
    r3: EstimateGrid
    fnh: Optional[EstimateGrid] = None

    @property
    def x(self) -> np.ndarray:
        return self.main_term.x

    @property
    def total(self) -> np.ndarray:
        return self.main_term.values + self.r1.values + self.r2.values + self.r3.values

    @property
    def sups(self) -> tuple:
        return tuple(float(np.max(np.abs(r.values))) for r in (self.r1, self.r2, self.r3))

    def centered(self, expected: "DecompositionResult", a_n: float = 1.0) -> "DecompositionResult":
        """a_n (piece - E piece) for every piece."""
        def c(p, q):
            return EstimateGrid(p.x, a_n * (p.values - q.values), kind="centered")

        return DecompositionResult(
            c(self.main_term, expected.main_term),
            c(self.r1, expected.r1),
            c(self.r2, expected.r2),
            c(self.r3, expected.r3),
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "main", "r1", "r2", "r3", "fnh", "residual"])
        fnh = self.fnh.values if self.fnh is not None else np.full(self.x.size, np.nan)
        resid = self.total - fnh
        cols = (self.x, self.main_term.values, self.r1.values, self.r2.values, self.r3.values, fnh, resid)
        for row in zip(*cols):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


# ----------------------------------------------------------------------------
# ingredients
# ----------------------------------------------------------------------------

def u_function(error: ErrorModel, y):
    """C |y|^lambda0 exp(-|y|^lambda / mu) / phi_k(y) - 1, for |y| >= 0.1."""
    y_arr = np.asarray(y, dtype=float)
    if np.any(np.abs(y_arr) < U_DELTA):
        raise DomainError(f"u is evaluated only for |y| >= {U_DELTA}")
    if error.log_phi_k is not None:
        out = np.expm1(error.log_tail(y_arr) - error.log_phi_k(y_arr))
    else:
        out = np.exp(error.log_tail(y_arr)) / np.asarray(error.phi_k(y_arr)) - 1.0
    return out.item() if np.ndim(out) == 0 else out


def _log_growth(error: ErrorModel, h: float, s: np.ndarray) -> np.ndarray:
    """log(s^-lambda0 exp(s^lambda/(mu h^lambda))) for s > 0."""
    out = s**error.lam / (error.mu * h**error.lam)
    if error.lambda0 != 0:
        out = out - error.lambda0 * np.log(s)
    return out


def tail_weight(error: ErrorModel, kernel: KernelModel, h: float, s: np.ndarray) -> np.ndarray:
    """phi_w(s) s^-lambda0 exp(s^lambda/(mu h^lambda)), one exp() per node."""
    return kernel.phi_w(s) * np.exp(_log_growth(error, h, s))


def prefactor(error: ErrorModel, h: float) -> float:
    """h^(lambda0 - 1) / (pi C)."""
    return h ** (error.lambda0 - 1.0) / (math.pi * error.C)


def _nodes(cfg: EstimatorConfig, dcfg: DecompositionConfig, part: str):
    """Simpson nodes in s for the low ([0, eps]) or high ([eps, 1]) part.

    Node counts follow the quadrature density in t = s/h.
    """
    h, eps = cfg.h, dcfg.epsilon
    q = dcfg.quadrature
    if part == "low":
        t, w = q.nodes(0.0, eps / h)
    else:
        t, w = q.nodes(eps / h, 1.0 / h)
    return t * h, w * h


def main_scalar(error: ErrorModel, kernel: KernelModel, cfg: EstimatorConfig, dcfg: DecompositionConfig) -> float:
    """int_eps^1 phi_w(s) s^-lambda0 exp(s^lambda/(mu h^lambda)) ds."""
    cfg.check_guard(error)
    s, w = _nodes(cfg, dcfg, "high")
    return float(w @ tail_weight(error, kernel, cfg.h, s))


def _re_transform(x: np.ndarray, h: float, s: np.ndarray, w: np.ndarray, spectrum: np.ndarray) -> np.ndarray:
    """sum_k w_k Re[exp(-i s_k x / h) spectrum_k]."""
    arg = np.outer(x, s / h)
    return np.cos(arg) @ (w * spectrum.real) + np.sin(arg) @ (w * spectrum.imag)


def _cos_mean(ecf_at_inv_h: complex, x: np.ndarray, h: float) -> np.ndarray:
    """(1/n) sum_j cos((X_j - x)/h) = Re[exp(-ix/h) phi_emp(1/h)]."""
    return np.cos(x / h) * ecf_at_inv_h.real + np.sin(x / h) * ecf_at_inv_h.imag


@dataclass
class Spectra:
    """ECF (or a characteristic function) on the low/high nodes and at 1/h."""

    low: np.ndarray
    high: np.ndarray
    at_inv_h: complex


def sample_spectra(samples: SampleSet, cfg, dcfg) -> Spectra:
    s_lo, _ = _nodes(cfg, dcfg, "low")
    s_hi, _ = _nodes(cfg, dcfg, "high")
    lo = ecf_on_nodes(samples, s_lo / cfg.h)
    hi = ecf_on_nodes(samples, s_hi / cfg.h)
    # the high grid ends exactly at s = 1, i.e. t = 1/h
    return Spectra(lo, hi, complex(hi[-1]))


def model_spectra(signal: SignalModel, error: ErrorModel, cfg, dcfg) -> Spectra:
    """phi_g = phi_f phi_k in place of the ECF: gives E of every piece."""
    def phi_g(t):
        return signal.phi_f(t) * np.asarray(error.phi_k(t))

    s_lo, _ = _nodes(cfg, dcfg, "low")
    s_hi, _ = _nodes(cfg, dcfg, "high")
    hi = phi_g(s_hi / cfg.h)
    return Spectra(phi_g(s_lo / cfg.h), hi, complex(hi[-1]))


def _pieces(sp: Spectra, error, kernel, cfg, dcfg, x, which=("main", "r1", "r2", "r3")) -> dict:
    cfg.check_guard(error)
    h = cfg.h
    x = np.asarray(x, dtype=float)
    s_hi, w_hi = _nodes(cfg, dcfg, "high")
    out = {}
    if "main" in which or "r1" in which:
        g = tail_weight(error, kernel, h, s_hi)
        scalar = float(w_hi @ g)
        pref = prefactor(error, h)
        cos_part = scalar * _cos_mean(sp.at_inv_h, x, h)
        if "main" in which:
            out["main"] = pref * cos_part
        if "r1" in which:
            out["r1"] = pref * (_re_transform(x, h, s_hi, w_hi, g * sp.high) - cos_part)
    if "r2" in which:
        s_lo, w_lo = _nodes(cfg, dcfg, "low")
        spec = kernel.phi_w(s_lo) * error.inv_phi_k(s_lo / h) * sp.low
        out["r2"] = _re_transform(x, h, s_lo, w_lo, spec) / (math.pi * h)
    if "r3" in which:
        y = s_hi / h
        # (1/C)(s/h)^-lambda0 exp(s^lambda/(mu h^lambda)) u(s/h) phi_w(s)
        weight = kernel.phi_w(s_hi) * np.exp(-error.log_tail(y)) * u_function(error, y)
        out["r3"] = _re_transform(x, h, s_hi, w_hi, weight * sp.high) / (math.pi * h)
    return out


def _grid(x, values) -> EstimateGrid:
    return EstimateGrid(np.asarray(x, dtype=float), values, kind="estimate")


# ----------------------------------------------------------------------------
# public operations
# ----------------------------------------------------------------------------

def main_term(samples, error, kernel, cfg, dcfg, grid_x) -> EstimateGrid:
    sp = sample_spectra(samples, cfg, dcfg)
    return _grid(grid_x, _pieces(sp, error, kernel, cfg, dcfg, grid_x, ("main",))["main"])


def remainder_r1(samples, error, kernel, cfg, dcfg, grid_x, method: str = "ecf") -> EstimateGrid:
    """R1; ``method="direct"`` integrates observation by observation (O(n m Q))."""
    if method == "direct":
        return _grid(grid_x, _r1_direct(samples, error, kernel, cfg, dcfg, grid_x))
    sp = sample_spectra(samples, cfg, dcfg)
    return _grid(grid_x, _pieces(sp, error, kernel, cfg, dcfg, grid_x, ("r1",))["r1"])


def _r1_direct(samples, error, kernel, cfg, dcfg, grid_x) -> np.ndarray:
    cfg.check_guard(error)
    h = cfg.h
    s, w = _nodes(cfg, dcfg, "high")
    gw = w * tail_weight(error, kernel, h, s)
    out = []
    for x in np.asarray(grid_x, dtype=float):
        u = (samples.values - x) / h
        per_obs = (np.cos(np.outer(u, s)) - np.cos(u)[:, None]) @ gw
        out.append(per_obs.mean())
    return prefactor(error, h) * np.array(out)


def remainder_r2(samples, error, kernel, cfg, dcfg, grid_x) -> EstimateGrid:
    sp = sample_spectra(samples, cfg, dcfg)
    return _grid(grid_x, _pieces(sp, error, kernel, cfg, dcfg, grid_x, ("r2",))["r2"])


def remainder_r3(samples, error, kernel, cfg, dcfg, grid_x) -> EstimateGrid:
    sp = sample_spectra(samples, cfg, dcfg)
    return _grid(grid_x, _pieces(sp, error, kernel, cfg, dcfg, grid_x, ("r3",))["r3"])


def decompose(samples, error, kernel, cfg, dcfg, grid_x, with_fnh: bool = True) -> DecompositionResult:
    """All four pieces from a single ECF evaluation (plus f_nh if requested)."""
    sp = sample_spectra(samples, cfg, dcfg)
    p = _pieces(sp, error, kernel, cfg, dcfg, grid_x)
    fnh = deconv_estimate(samples, error, kernel, cfg, grid_x) if with_fnh else None
    return DecompositionResult(_grid(grid_x, p["main"]), _grid(grid_x, p["r1"]),
                               _grid(grid_x, p["r2"]), _grid(grid_x, p["r3"]), fnh)


def decompose_from_spectra(sp: Spectra, error, kernel, cfg, dcfg, grid_x) -> DecompositionResult:
    p = _pieces(sp, error, kernel, cfg, dcfg, grid_x)
    return DecompositionResult(_grid(grid_x, p["main"]), _grid(grid_x, p["r1"]),
                               _grid(grid_x, p["r2"]), _grid(grid_x, p["r3"]))


def expected_decomposition(signal, error, kernel, cfg, dcfg, grid_x) -> DecompositionResult:
    """Exact expectation of every piece, replacing the ECF by phi_f phi_k."""
    return decompose_from_spectra(model_spectra(signal, error, cfg, dcfg), error, kernel, cfg, dcfg, grid_x)


def reconstruct_check(samples, error, kernel, cfg, dcfg, grid_x) -> float:
    """max |main + R1 + R2 + R3 - f_nh| over the grid."""
    d = decompose(samples, error, kernel, cfg, dcfg, grid_x)
    return float(np.max(np.abs(d.total - d.fnh.values)))


def asymptotic_integral_check(kernel: KernelModel, error: ErrorModel, h: float, beta: float = 0.0,
                              epsilon: float = DEFAULT_EPSILON) -> float:
    """Numerical int_eps^1 s^-lambda0 (1-s)^beta phi_w(s) exp(s^lambda/(mu h^lambda)) ds
    divided by its Laplace-type asymptote A (mu h^lambda/lambda)^(1+alpha+beta) zeta(h) Gamma(alpha+beta+1).
    """
    if beta < 0:
        raise DomainError("beta must be nonnegative")
    zeta_exponent(h, error.mu, error.lam)  # overflow guard
    lam, mu, l0 = error.lam, error.mu, error.lambda0

    def integrand(s):
        # divided by zeta(h) to stay in range
        return s ** (-l0) * (1.0 - s) ** beta * float(kernel.phi_w(s)) * math.exp((s**lam - 1.0) / (mu * h**lam))

    width = mu * h**lam / lam
    brk = [p for p in (1.0 - 50 * width, 1.0 - 10 * width, 1.0 - width) if epsilon < p < 1.0]
    val, _ = integrate.quad(integrand, epsilon, 1.0, points=brk or None, limit=500, epsabs=0.0, epsrel=1e-12)
    a = kernel.alpha
    asym = kernel.A * width ** (1.0 + a + beta) * gamma_fn(a + beta + 1.0)
    return val / asym
