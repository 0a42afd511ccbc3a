"""Rayleigh law, the limiting cosine process W and goodness-of-fit tools.

W is the zero-mean Gaussian process on [0, 2 pi] with covariance
(1/2) cos(x1 - x2); sup |W| has the law of (sqrt(2)/2) V with V standard
Rayleigh.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, GridTooCoarse
from .extrema import refined_abs_max
from .rng import make_rng

TWO_PI = 2.0 * math.pi
HALF_SQRT2 = math.sqrt(2.0) / 2.0
#: Grid density for the periodised process; spacing must not exceed 2 pi / 2048.
PROCESS_GRID = 2048


def rayleigh_cdf(x):
    x = np.asarray(x, dtype=float)
    out = -np.expm1(-0.5 * np.maximum(x, 0.0) ** 2)
    return float(out) if out.ndim == 0 else out


def rayleigh_quantile(p):
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr < 0) | (p_arr >= 1)) or np.any(np.isnan(p_arr)):
        raise DomainError("Rayleigh quantile needs p in [0, 1)")
    out = np.sqrt(-2.0 * np.log1p(-p_arr))
    return float(out) if out.ndim == 0 else out


def rayleigh_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.where(x >= 0, x * np.exp(-0.5 * x**2), 0.0)


def scaled_rayleigh_cdf(scale: float) -> Callable:
    """CDF of scale * V."""
    return lambda x: rayleigh_cdf(np.asarray(x, dtype=float) / scale)


#: Law of sup |W| over a full period.
sup_w_cdf = scaled_rayleigh_cdf(HALF_SQRT2)


@dataclass
class ProcessSample:
    grid: np.ndarray
    path: np.ndarray

    def __post_init__(self):
        if np.shape(self.grid)[-1] != np.shape(self.path)[-1]:
            raise DomainError("grid and path lengths differ")


def periodic_grid(points: int) -> np.ndarray:
    return np.linspace(0.0, TWO_PI, points, endpoint=False)


def w_covariance(grid: np.ndarray) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    return 0.5 * np.cos(grid[:, None] - grid[None, :])


def covariance_sqrt(cov: np.ndarray) -> np.ndarray:
    """Symmetric square root; negative rounding-level eigenvalues are clamped."""
    vals, vecs = np.linalg.eigh(cov)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def sample_w_process(grid, seed, paths: Optional[int] = None) -> ProcessSample:
    """Draw W on ``grid`` through the covariance square root.

    With ``paths`` given, ``path`` has shape (paths, len(grid)).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise DomainError("grid must be nonempty")
    root = covariance_sqrt(w_covariance(grid))
    rng = make_rng(seed)
    z = rng.standard_normal((1 if paths is None else paths, grid.size))
    path = z @ root
    return ProcessSample(grid, path[0] if paths is None else path)


def sup_abs_path(sample: ProcessSample) -> np.ndarray:
    """sup |W| per path over a periodic grid, with parabolic refinement."""
    paths = np.atleast_2d(sample.path)
    period = TWO_PI
    return np.array([refined_abs_max(sample.grid, p, periodic=True, period=period)[0] for p in paths])


def sup_abs_w_from_normals(n1, n2):
    return HALF_SQRT2 * np.hypot(n1, n2)


def sup_abs_w_exact_sample(seed, size: Optional[int] = None):
    """(sqrt(2)/2) sqrt(N1^2 + N2^2): sup |W| drawn from its exact law."""
    rng = make_rng(seed)
    z = rng.standard_normal((2,) if size is None else (2, size))
    out = sup_abs_w_from_normals(z[0], z[1])
    return float(out) if size is None else out


def cosine_process_sup(samples, h: float, signal=None, error=None, grid_points: int = PROCESS_GRID) -> float:
    """S_n = sup_y |n^-1/2 sum_j (cos(Y_j - y) - E cos(Y_j - y))|, Y_j = X_j/h mod 2 pi.

    The centering uses phi_g(1/h) = phi_f(1/h) phi_k(1/h); without both
    models it is taken to be zero.
    """
    if grid_points < PROCESS_GRID:
        raise GridTooCoarse(f"process grid needs >= {PROCESS_GRID} points on [0, 2 pi)")
    x = np.asarray(getattr(samples, "values", samples), dtype=float)
    n = x.size
    y = np.mod(x / h, TWO_PI)
    # sum_j cos(Y_j - y) = cos(y) sum cos Y_j + sin(y) sum sin Y_j
    a, b = np.cos(y).sum(), np.sin(y).sum()
    if signal is not None and error is not None:
        t = np.array([1.0 / h])
        phi_g = complex(signal.phi_f(t)[0] * error.phi_k(t)[0])
        a -= n * phi_g.real
        b -= n * phi_g.imag
    grid = periodic_grid(grid_points)
    proc = (a * np.cos(grid) + b * np.sin(grid)) / math.sqrt(n)
    return refined_abs_max(grid, proc, periodic=True, period=TWO_PI)[0]


# ----------------------------------------------------------------------------
# Kolmogorov-Smirnov distances
# ----------------------------------------------------------------------------

def ks_one_sample(values, cdf: Callable) -> float:
    """sup_x |F_emp(x) - cdf(x)|, evaluated at both sides of every jump."""
    v = np.sort(np.asarray(values, dtype=float))
    m = v.size
    if m == 0:
        raise DomainError("ks_one_sample needs at least one value")
    f = np.asarray(cdf(v), dtype=float)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - f), np.max(f - (i - 1) / m)))


def ks_two_sample(a, b) -> float:
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise DomainError("ks_two_sample needs nonempty samples")
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))
