"""Error, kernel and signal families for supersmooth deconvolution.

An error model carries its exact characteristic function together with the
parameters of the exponential tail

    phi_k(t) ~ C |t|^lambda0 exp(-|t|^lambda / mu),   |t| -> inf,

and a kernel model carries its Fourier transform phi_w, supported on [-1, 1],
with the edge expansion phi_w(1 - t) ~ A t^alpha as t -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from .errors import ConfigError, DomainError, OverflowGuard

#: Largest admissible exponent 1/(mu h^lambda); exp(709) is the double limit.
EXPONENT_GUARD = 700.0

ArrayFn = Callable[[np.ndarray], np.ndarray]


# ----------------------------------------------------------------------------
# special functions
# ----------------------------------------------------------------------------

def zeta_exponent(h: float, mu: float, lam: float) -> float:
    """Return 1/(mu h^lambda), raising OverflowGuard above the guard."""
    if h <= 0 or mu <= 0 or lam <= 0:
        raise DomainError(f"zeta needs h, mu, lambda > 0 (got {h}, {mu}, {lam})")
    expo = 1.0 / (mu * h**lam)
    if expo > EXPONENT_GUARD:
        raise OverflowGuard(
            f"1/(mu h^lambda) = {expo:.6g} exceeds {EXPONENT_GUARD:g}; h={h} is too small"
        )
    return expo


def zeta(h: float, mu: float, lam: float) -> float:
    """exp(1/(mu h^lambda)), the exponential inflation factor."""
    return math.exp(zeta_exponent(h, mu, lam))


# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma_fn(x: float) -> float:
    """Gamma function on (0, inf) via the Lanczos approximation."""
    x = float(x)
    if not x > 0:
        raise DomainError(f"gamma_fn is defined here for x > 0 only, got {x}")
    if x < 0.5:
        # reflection keeps the series in its accurate range
        return math.pi / (math.sin(math.pi * x) * gamma_fn(1.0 - x))
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for k in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * math.exp((z + 0.5) * math.log(t) - t) * acc


# ----------------------------------------------------------------------------
# model types
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class ErrorModel:
    """Known error density k, described through phi_k and its tail constants.

    ``log_phi_k`` is optional; when given it must return log(phi_k(t)) for a
    real positive phi_k and is used wherever exponentials would overflow or
    underflow.
    """

    name: str
    C: float
    lambda0: float
    lam: float
    mu: float
    phi_k: ArrayFn
    log_phi_k: Optional[ArrayFn] = None
    sampler: Optional[Callable[[np.random.Generator, int], np.ndarray]] = None
    params: dict = field(default_factory=dict)

    def log_tail(self, t):
        """log(C |t|^lambda0 exp(-|t|^lambda/mu))."""
        at = np.abs(np.asarray(t, dtype=float))
        out = math.log(self.C) - at**self.lam / self.mu
        if self.lambda0 != 0:
            out = out + self.lambda0 * np.log(at)
        return out

    def inv_phi_k(self, t) -> np.ndarray:
        """1/phi_k(t), evaluated in log-space when possible."""
        t = np.asarray(t, dtype=float)
        if self.log_phi_k is not None:
            return np.exp(-self.log_phi_k(t))
        return 1.0 / np.asarray(self.phi_k(t))

    def to_dict(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}


@dataclass(frozen=True)
class KernelModel:
    """Kernel w given through phi_w on [-1, 1] and its edge constants (A, alpha)."""

    name: str
    phi_w_inner: ArrayFn
    A: float
    alpha: float
    params: dict = field(default_factory=dict)

    def phi_w(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        inside = np.abs(s) <= 1.0
        return np.where(inside, self.phi_w_inner(np.where(inside, s, 0.0)), 0.0)

    def to_dict(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}


@dataclass(frozen=True)
class SignalModel:
    """True density f of the unobserved Y, with closed-form phi_f."""

    name: str
    weights: tuple
    means: tuple
    sds: tuple
    params: dict = field(default_factory=dict)

    def pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for w, m, s in zip(self.weights, self.means, self.sds):
            out = out + w * np.exp(-0.5 * ((x - m) / s) ** 2) / (s * math.sqrt(2 * math.pi))
        return out

    def phi_f(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for w, m, s in zip(self.weights, self.means, self.sds):
            out = out + w * np.exp(1j * m * t - 0.5 * (s * t) ** 2)
        return out

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if len(self.weights) == 1:
            return rng.normal(self.means[0], self.sds[0], size=n)
        comp = rng.choice(len(self.weights), size=n, p=np.asarray(self.weights))
        means = np.asarray(self.means)[comp]
        sds = np.asarray(self.sds)[comp]
        return means + sds * rng.standard_normal(n)

    def to_dict(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}


# ----------------------------------------------------------------------------
# built-in families
# ----------------------------------------------------------------------------

def gaussian_error() -> ErrorModel:
    """Standard normal error: phi_k(t) = exp(-t^2/2); C=1, lambda0=0, lambda=2, mu=2."""
    return ErrorModel(
        name="gaussian",
        C=1.0,
        lambda0=0.0,
        lam=2.0,
        mu=2.0,
        phi_k=lambda t: np.exp(-0.5 * np.asarray(t, dtype=float) ** 2),
        log_phi_k=lambda t: -np.abs(np.asarray(t, dtype=float)) ** 2.0 / 2.0,
        sampler=lambda rng, n: rng.standard_normal(n),
    )


def gaussian_laplace_mix_error() -> ErrorModel:
    """Normal plus independent standard Laplace error.

    phi_k(t) = exp(-t^2/2) / (1 + t^2), so C=1, lambda0=-2, lambda=2, mu=2.
    """

    def phi(t):
        t = np.asarray(t, dtype=float)
        return np.exp(-0.5 * t**2) / (1.0 + t**2)

    def log_phi(t):
        t = np.asarray(t, dtype=float)
        return -np.abs(t) ** 2.0 / 2.0 - np.log1p(t**2)

    return ErrorModel(
        name="gaussian_laplace_mix",
        C=1.0,
        lambda0=-2.0,
        lam=2.0,
        mu=2.0,
        phi_k=phi,
        log_phi_k=log_phi,
        sampler=lambda rng, n: rng.standard_normal(n) + rng.laplace(0.0, 1.0, size=n),
    )


def sinc_flat_kernel() -> KernelModel:
    """phi_w = 1 on [-1, 1]; w is the sinc kernel. (A, alpha) = (1, 0)."""
    return KernelModel(
        name="sinc_flat",
        phi_w_inner=lambda s: np.ones_like(np.asarray(s, dtype=float)),
        A=1.0,
        alpha=0.0,
    )


def polynomial_kernel(m: int = 3) -> KernelModel:
    """phi_w(s) = (1 - s^2)^m on [-1, 1], with (A, alpha) = (2^m, m)."""
    if m < 0 or int(m) != m:
        raise ConfigError(f"polynomial kernel order must be a nonnegative integer, got {m}")
    m = int(m)
    return KernelModel(
        name="polynomial_m",
        phi_w_inner=lambda s: (1.0 - np.asarray(s, dtype=float) ** 2) ** m,
        A=float(2**m),
        alpha=float(m),
        params={"m": m},
    )


def gaussian_signal(mean: float = 0.0, sd: float = 1.0) -> SignalModel:
    if sd <= 0:
        raise ConfigError("signal sd must be positive")
    return SignalModel(
        name="gaussian",
        weights=(1.0,),
        means=(float(mean),),
        sds=(float(sd),),
        params={"mean": float(mean), "sd": float(sd)},
    )


def gaussian_mixture_signal(weights, means, sds) -> SignalModel:
    weights = tuple(float(w) for w in weights)
    means = tuple(float(m) for m in means)
    sds = tuple(float(s) for s in sds)
    if not (len(weights) == len(means) == len(sds)) or not weights:
        raise ConfigError("mixture weights, means and sds must have equal nonzero length")
    if any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-12:
        raise ConfigError("mixture weights must be nonnegative and sum to 1")
    if any(s <= 0 for s in sds):
        raise ConfigError("mixture sds must be positive")
    return SignalModel(
        name="gaussian_mixture",
        weights=weights,
        means=means,
        sds=sds,
        params={"weights": list(weights), "means": list(means), "sds": list(sds)},
    )


_ERRORS = {"gaussian": gaussian_error, "gaussian_laplace_mix": gaussian_laplace_mix_error}
_KERNELS = {"sinc_flat": sinc_flat_kernel, "polynomial_m": polynomial_kernel}
_SIGNALS = {"gaussian": gaussian_signal, "gaussian_mixture": gaussian_mixture_signal}


def _build(table: dict, spec: Any, kind: str):
    if isinstance(spec, str):
        spec = {"name": spec}
    if not isinstance(spec, dict) or "name" not in spec:
        raise ConfigError(f"{kind} model must be an object with a 'name' field")
    name = spec["name"]
    if name == "polynomial_3":
        name, spec = "polynomial_m", {"name": "polynomial_m", "params": {"m": 3}}
    if name not in table:
        raise ConfigError(f"unknown {kind} model {name!r}; choose from {sorted(table)}")
    try:
        return table[name](**spec.get("params", {}))
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {kind} model {name!r}: {exc}") from None


def error_from_dict(spec) -> ErrorModel:
    return _build(_ERRORS, spec, "error")


def kernel_from_dict(spec) -> KernelModel:
    return _build(_KERNELS, spec, "kernel")


def signal_from_dict(spec) -> SignalModel:
    return _build(_SIGNALS, spec, "signal")


def models_from_dict(d: dict):
    """Parse ``{error: {...}, kernel: {...}, signal: {...}}`` into model objects."""
    try:
        return (
            error_from_dict(d["error"]),
            kernel_from_dict(d["kernel"]),
            signal_from_dict(d["signal"]),
        )
    except KeyError as exc:
        raise ConfigError(f"models section is missing {exc}") from None


def models_to_dict(error: ErrorModel, kernel: KernelModel, signal: SignalModel) -> dict:
    return {"error": error.to_dict(), "kernel": kernel.to_dict(), "signal": signal.to_dict()}


def phi_k_eval(model: ErrorModel, t):
    """Exact phi_k(t) for ``model``."""
    return model.phi_k(t)


# ----------------------------------------------------------------------------
# condition checks
# ----------------------------------------------------------------------------

TAIL_POINTS = (20.0, 50.0, 100.0)
TAIL_TOL = 0.01
EDGE_POINTS = (1e-2, 1e-3)
EDGE_TOL = 0.02


@dataclass
class Check:
    name: str
    passed: bool
    measured: Any = None

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "measured": self.measured}


@dataclass
class ValidationReport:
    checks: list
    theorem_applicable: bool
    A: float
    alpha: float

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "all_passed": self.all_passed,
            "theorem_applicable": self.theorem_applicable,
            "A": self.A,
            "alpha": self.alpha,
            "checks": [c.to_dict() for c in self.checks],
        }


def _log_abs_phi_k(error: ErrorModel, t: np.ndarray) -> np.ndarray:
    if error.log_phi_k is not None:
        return np.asarray(error.log_phi_k(t), dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(np.asarray(error.phi_k(t))))


def validate_conditions(error: ErrorModel, kernel: KernelModel) -> ValidationReport:
    """Check the supersmooth-error and kernel conditions on finite grids.

    Only the leading tail ratio of phi_k is checked; the o(|t|^-1) remainder
    rate is a property of the model class and cannot be verified pointwise.
    """
    checks = []

    phi0 = complex(np.asarray(error.phi_k(np.array([0.0])))[0])
    checks.append(Check("phi_k(0) = 1", abs(phi0 - 1.0) <= 1e-12, abs(phi0 - 1.0)))

    grid = np.linspace(-30.0, 30.0, 6001)
    vals = np.asarray(error.phi_k(grid))
    logabs = _log_abs_phi_k(error, grid)
    nonzero = bool(np.all(np.isfinite(logabs)))
    if nonzero and np.all(np.abs(np.imag(vals)) <= 1e-14 * np.abs(vals) + 1e-300):
        re = np.real(vals)
        # a real-valued phi_k that changes sign has a root between grid points
        nonzero = bool(np.all(np.sign(re[1:]) * np.sign(re[:-1]) > 0))
    checks.append(Check("phi_k(t) != 0", nonzero, None))

    ratios = {}
    for t in TAIL_POINTS:
        lr = float(_log_abs_phi_k(error, np.array([t]))[0] - error.log_tail(t))
        ratios[str(t)] = math.exp(lr) if np.isfinite(lr) else float("nan")
    tail_ok = all(np.isfinite(r) and abs(r - 1.0) <= TAIL_TOL for r in ratios.values())
    checks.append(Check("phi_k tail ratio -> 1", tail_ok, ratios))

    checks.append(Check("0 < lambda <= 2", 0 < error.lam <= 2, error.lam))
    checks.append(Check("C > 0, mu > 0", error.C > 0 and error.mu > 0, None))

    w0 = float(kernel.phi_w(np.array([0.0]))[0])
    checks.append(Check("phi_w(0) = 1", abs(w0 - 1.0) <= 1e-12, w0))
    s = np.linspace(0.0, 1.0, 1001)
    sym = float(np.max(np.abs(kernel.phi_w(s) - kernel.phi_w(-s))))
    checks.append(Check("phi_w symmetric", sym <= 1e-14, sym))
    outside = np.array([1.0 + 1e-9, 1.001, 1.5, 2.0, 10.0])
    out_max = float(np.max(np.abs(np.concatenate([kernel.phi_w(outside), kernel.phi_w(-outside)]))))
    checks.append(Check("phi_w = 0 outside [-1, 1]", out_max == 0.0, out_max))

    edge = {}
    for t in EDGE_POINTS:
        edge[str(t)] = float(kernel.phi_w(np.array([1.0 - t]))[0]) / (kernel.A * t**kernel.alpha)
    edge_ok = all(abs(r - 1.0) <= EDGE_TOL for r in edge.values())
    checks.append(Check("phi_w(1-t) / (A t^alpha) -> 1", edge_ok, edge))
    checks.append(Check("A > 0, alpha >= 0", kernel.A > 0 and kernel.alpha >= 0, None))

    return ValidationReport(
        checks=checks,
        theorem_applicable=(error.lam == 2),
        A=kernel.A,
        alpha=kernel.alpha,
    )
