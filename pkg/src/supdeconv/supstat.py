"""The supremum distance M_n, its normalisation and uniform bands."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, GridTooCoarse, TheoremInapplicable
from .estimator import (
    EstimateGrid,
    EstimatorConfig,
    SampleSet,
    deconv_estimate,
    expected_estimate,
)
from .extrema import refined_abs_max
from .limitlaw import rayleigh_quantile
from .models import ErrorModel, KernelModel, SignalModel, gamma_fn, zeta_exponent

#: Sup extraction requires at least this many grid points per bandwidth.
POINTS_PER_BANDWIDTH = 10


@dataclass(frozen=True)
class SupResult:
    m_n: float
    argmax_x: float
    scaled: float
    a_n: float
    c_limit: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class BandResult:
    center: EstimateGrid
    half_width: float
    level: float

    @property
    def lower(self) -> np.ndarray:
        return self.center.values - self.half_width

    @property
    def upper(self) -> np.ndarray:
        return self.center.values + self.half_width

    def covers(self, target: EstimateGrid) -> bool:
        return bool(np.all(np.abs(target.values - self.center.values) <= self.half_width))

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "half_width": self.half_width,
            "x": self.center.x.tolist(),
            "center": self.center.values.tolist(),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "center", "lower", "upper"])
        for row in zip(self.center.x, self.center.values, self.lower, self.upper):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def require_theorem(error: ErrorModel) -> None:
    if error.lam != 2:
        raise TheoremInapplicable(
            f"the Rayleigh limit is established for lambda = 2 only (model {error.name!r} has {error.lam})"
        )


def rate_exponent(error: ErrorModel, kernel: KernelModel) -> float:
    """lambda (1 + alpha) + lambda0 - 1, the power of h in the normaliser."""
    return error.lam * (1.0 + kernel.alpha) + error.lambda0 - 1.0


def log_normalizer(n: int, h: float, error: ErrorModel, kernel: KernelModel) -> float:
    require_theorem(error)
    if n < 1:
        raise DomainError("n must be positive")
    expo = zeta_exponent(h, error.mu, error.lam)
    return 0.5 * math.log(n) - rate_exponent(error, kernel) * math.log(h) - expo


def normalizer_a_n(n: int, h: float, error: ErrorModel, kernel: KernelModel) -> float:
    """a_n = sqrt(n) h^-(lambda(1+alpha)+lambda0-1) / zeta(h), via logs."""
    return math.exp(log_normalizer(n, h, error, kernel))


def limit_constant(error: ErrorModel, kernel: KernelModel) -> float:
    """Scale of the Rayleigh limit of a_n M_n."""
    require_theorem(error)
    a = kernel.alpha
    return (
        math.sqrt(2.0) / 2.0
        * kernel.A / (math.pi * error.C)
        * (error.mu / error.lam) ** (1.0 + a)
        * gamma_fn(a + 1.0)
    )


def check_spacing(x: np.ndarray, h: float) -> None:
    if x.size > 1 and float(np.max(np.diff(x))) > h / POINTS_PER_BANDWIDTH * (1 + 1e-12):
        raise GridTooCoarse(
            f"grid spacing {float(np.max(np.diff(x))):.4g} exceeds h/{POINTS_PER_BANDWIDTH} = {h / POINTS_PER_BANDWIDTH:.4g}"
        )


def sup_distance(centered: EstimateGrid, h: float, a_n: float = 1.0, c_limit: float = 1.0) -> SupResult:
    """M_n from a centered grid f_nh - E f_nh, with parabolic refinement."""
    if centered.kind != "centered":
        raise DomainError(f"sup_distance needs a centered grid, got kind={centered.kind!r}")
    check_spacing(centered.x, h)
    m_n, arg = refined_abs_max(centered.x, centered.values)
    return SupResult(m_n=m_n, argmax_x=arg, scaled=a_n * m_n / c_limit, a_n=a_n, c_limit=c_limit)


def sup_statistic(samples: SampleSet, error: ErrorModel, kernel: KernelModel, signal: SignalModel,
                  cfg: EstimatorConfig, grid_x) -> SupResult:
    """M_n for a sample, centered at the closed-form E[f_nh] of ``signal``."""
    est = deconv_estimate(samples, error, kernel, cfg, grid_x)
    centered = est - expected_estimate(signal, kernel, cfg, grid_x)
    return sup_distance(
        centered,
        cfg.h,
        a_n=normalizer_a_n(samples.n, cfg.h, error, kernel),
        c_limit=limit_constant(error, kernel),
    )


def band_half_width(n: int, h: float, error: ErrorModel, kernel: KernelModel, level: float) -> float:
    if not 0 < level < 1:
        raise DomainError(f"band level must lie in (0, 1), got {level}")
    return limit_constant(error, kernel) * rayleigh_quantile(level) / normalizer_a_n(n, h, error, kernel)


def confidence_band(samples: SampleSet, error: ErrorModel, kernel: KernelModel,
                    cfg: EstimatorConfig, level: float, grid_x=None) -> BandResult:
    """Uniform band f_nh +/- c q_level / a_n.

    The asymptotic coverage statement concerns E[f_nh], not f: no bias
    correction is applied.
    """
    if grid_x is None:
        grid_x = np.linspace(0.0, 1.0, 101)
    hw = band_half_width(samples.n, cfg.h, error, kernel, level)
    center = deconv_estimate(samples, error, kernel, cfg, grid_x)
    return BandResult(center=center, half_width=hw, level=level)
