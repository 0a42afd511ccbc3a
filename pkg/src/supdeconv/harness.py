"""Monte Carlo ladders for the sup-distance limit law, bands and remainders.

Each replicate draws its data from a seed derived from (base_seed, stream,
replicate), so results are independent of worker count and ordering.
Completed replicates are cached in the rung directory; re-running with the
same output directory only computes what is missing.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from threadpoolctl import threadpool_limits

from .decomposition import (
    DecompositionConfig,
    model_spectra,
    sample_spectra,
    decompose_from_spectra,
)
from .errors import ConfigError
from .estimator import (
    EstimatorConfig,
    SampleSet,
    ecf_on_nodes,
    estimate_from_ecf,
    expected_estimate,
    frequency_nodes,
)
from .extrema import refined_abs_max
from .limitlaw import cosine_process_sup, ks_one_sample, rayleigh_cdf, sup_w_cdf
from .models import (
    ErrorModel,
    KernelModel,
    SignalModel,
    models_from_dict,
    models_to_dict,
    zeta_exponent,
)
from .quadrature import QuadratureSpec
from .rng import make_rng, replicate_seed
from .supstat import (
    POINTS_PER_BANDWIDTH,
    band_half_width,
    limit_constant,
    normalizer_a_n,
    require_theorem,
)

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
RAYLEIGH_MEAN = math.sqrt(math.pi / 2.0)
#: mean scaled statistic must stay within this factor range of the Rayleigh mean
MEAN_CORRIDOR = (0.5, 2.5)
#: final-rung KS bound for the scaled sup statistic against the Rayleigh law
FINAL_KS_THRESHOLD = 0.10
#: finite-sample KS bound for S_n against the law of sup |W| (calibrated, not a limit)
PROCESS_KS_THRESHOLD = 0.06


@dataclass
class ExperimentConfig:
    error: ErrorModel
    kernel: KernelModel
    signal: SignalModel
    ladder: list
    replicates: int = 500
    base_seed: int = 20240601
    epsilon: float = 0.5
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    grid_points: int = 128
    output_dir: Optional[str] = None
    level: float = 0.95
    oracle_replicates: int = 500
    diag_replicates: int = 50
    threads: int = 1
    infinite_band: bool = False

    def __post_init__(self):
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if not self.ladder:
            raise ConfigError("ladder must contain at least one (n, h) rung")
        ladder = []
        for rung in self.ladder:
            n, h = (rung["n"], rung["h"]) if isinstance(rung, dict) else rung
            if int(n) != n or n < 1:
                raise ConfigError(f"rung sample size must be a positive integer, got {n}")
            if not 0 < h <= 1:
                raise ConfigError(f"rung bandwidth must lie in (0, 1], got {h}")
            zeta_exponent(h, self.error.mu, self.error.lam)
            ladder.append((int(n), float(h)))
        self.ladder = ladder
        spacing = 1.0 / (self.grid_points - 1) if self.grid_points > 1 else math.inf
        h_min = min(h for _, h in ladder)
        if spacing > h_min / POINTS_PER_BANDWIDTH:
            raise ConfigError(
                f"grid_points={self.grid_points} gives spacing {spacing:.4g} > h/{POINTS_PER_BANDWIDTH} for h={h_min}"
            )
        if not 0 < self.epsilon < 1:
            raise ConfigError("epsilon must lie in (0, 1)")
        if not 0 < self.level < 1:
            raise ConfigError("level must lie in (0, 1)")

    @property
    def grid_x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.grid_points)

    def estimator_config(self, h: float) -> EstimatorConfig:
        return EstimatorConfig(h, self.quadrature)

    def decomposition_config(self) -> DecompositionConfig:
        return DecompositionConfig(self.epsilon, self.quadrature)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "models": models_to_dict(self.error, self.kernel, self.signal),
            "ladder": [{"n": n, "h": h} for n, h in self.ladder],
            "replicates": self.replicates,
            "base_seed": self.base_seed,
            "epsilon": self.epsilon,
            "quadrature": self.quadrature.to_dict(),
            "grid_points": self.grid_points,
            "level": self.level,
            "oracle_replicates": self.oracle_replicates,
            "diag_replicates": self.diag_replicates,
        }

    @classmethod
    def from_dict(cls, d: dict, **overrides) -> "ExperimentConfig":
        d = dict(d)
        version = d.pop("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported config schema_version {version}")
        if "models" not in d or "ladder" not in d:
            raise ConfigError("config needs 'models' and 'ladder'")
        error, kernel, signal = models_from_dict(d.pop("models"))
        if "quadrature" in d:
            d["quadrature"] = QuadratureSpec.from_dict(d["quadrature"])
        known = set(cls.__dataclass_fields__) - {"error", "kernel", "signal"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        d.update({k: v for k, v in overrides.items() if v is not None})
        return cls(error=error, kernel=kernel, signal=signal, **d)

    def __reduce__(self):
        # models hold closures; workers rebuild them from the serialised form
        extra = {"output_dir": self.output_dir, "threads": self.threads, "infinite_band": self.infinite_band}
        return (_config_from_dict, (self.to_dict(), extra))

    @classmethod
    def load(cls, path, **overrides) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(raw, **overrides)


def _config_from_dict(d: dict, extra: dict) -> ExperimentConfig:
    cfg = ExperimentConfig.from_dict(d)
    for k, v in extra.items():
        setattr(cfg, k, v)
    return cfg


# ----------------------------------------------------------------------------
# data and replicate plumbing
# ----------------------------------------------------------------------------

def generate_data(signal: SignalModel, error: ErrorModel, n: int, seed) -> SampleSet:
    """n draws of X = Y + Z with Y ~ f and Z ~ k independent."""
    if error.sampler is None:
        raise ConfigError(f"error model {error.name!r} has no sampler")
    rng = make_rng(seed)
    y = signal.sample(rng, n)
    z = error.sampler(rng, n)
    x = y + z
    if not np.isfinite(np.mean(x * x)):
        raise ConfigError("sample second moment is not finite")
    return SampleSet(x)


def _seed_label(base_seed: int, stream: str, replicate: int) -> str:
    ss = replicate_seed(base_seed, stream, replicate)
    return f"{ss.entropy}:{ss.spawn_key[0]}:{ss.spawn_key[1]}"


class ReplicateStore:
    """Per-rung cache of completed replicate records (JSON lines + manifest)."""

    def __init__(self, directory: Optional[Path], name: str):
        self.path = None if directory is None else Path(directory) / f"{name}.jsonl"
        self.manifest = None if directory is None else Path(directory) / f"{name}.manifest.json"
        self.records: dict = {}
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            if self.path.exists():
                for line in self.path.read_text().splitlines():
                    if line.strip():
                        rec = json.loads(line)
                        self.records[rec["replicate"]] = rec

    def missing(self, count: int) -> list:
        return [r for r in range(count) if r not in self.records]

    def add(self, recs: list) -> None:
        for rec in recs:
            self.records[rec["replicate"]] = rec
        if self.path is not None:
            with self.path.open("a") as fh:
                for rec in recs:
                    fh.write(json.dumps(rec) + "\n")
            self._write_manifest()

    def _write_manifest(self) -> None:
        entries = {str(r): {"seed": rec["seed"], "status": "done"} for r, rec in sorted(self.records.items())}
        self.manifest.write_text(json.dumps(entries, indent=1) + "\n")

    def finalize(self, count: int) -> list:
        """Records 0..count-1 in replicate order; rewrites the cache sorted."""
        recs = [self.records[r] for r in range(count)]
        if self.path is not None:
            self.path.write_text("".join(json.dumps(rec) + "\n" for rec in recs))
            self._write_manifest()
        return recs


def _run_batch(fn: Callable, args: tuple, replicates: list) -> list:
    with threadpool_limits(limits=1):
        return [fn(*args, r) for r in replicates]


def _map_replicates(fn: Callable, args: tuple, todo: list, store: ReplicateStore, threads: int,
                    batch: int = 10) -> None:
    batches = [todo[i:i + batch] for i in range(0, len(todo), batch)]
    if threads <= 1 or len(batches) <= 1:
        for b in batches:
            store.add(_run_batch(fn, args, b))
        return
    with ProcessPoolExecutor(max_workers=threads) as pool:
        for recs in pool.map(_run_batch, [fn] * len(batches), [args] * len(batches), batches):
            store.add(recs)


def _rung_dir(cfg: ExperimentConfig, sub: str, idx: int) -> Optional[Path]:
    if cfg.output_dir is None:
        return None
    n, h = cfg.ladder[idx]
    return Path(cfg.output_dir) / sub / f"rung{idx}_n{n}_h{h:g}"


def _write_replicate_csv(directory: Optional[Path], values: list) -> None:
    if directory is None:
        return
    lines = ["replicate,statistic"] + [f"{i},{v!r}" for i, v in enumerate(values)]
    (directory / "replicates.csv").write_text("\n".join(lines) + "\n")


def write_report(report: dict, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")


def _strictly_decreasing(seq) -> bool:
    return all(b < a for a, b in zip(seq, seq[1:]))


# ----------------------------------------------------------------------------
# scaled sup distance
# ----------------------------------------------------------------------------

def _sup_replicate(cfg: ExperimentConfig, n: int, h: float, expected: np.ndarray, r: int) -> dict:
    ecfg = cfg.estimator_config(h)
    x = generate_data(cfg.signal, cfg.error, n, (cfg.base_seed, "data", r))
    t, _ = frequency_nodes(ecfg)
    est = estimate_from_ecf(ecf_on_nodes(x, t), cfg.error, cfg.kernel, ecfg, cfg.grid_x)
    centered = est - expected
    m_n, arg = refined_abs_max(cfg.grid_x, centered)
    return {
        "replicate": r,
        "seed": _seed_label(cfg.base_seed, "data", r),
        "m_n": m_n,
        "argmax_x": arg,
        "grid_max": float(np.max(np.abs(centered))),
    }


def _sup_rung(cfg: ExperimentConfig, idx: int) -> tuple:
    n, h = cfg.ladder[idx]
    expected = expected_estimate(cfg.signal, cfg.kernel, cfg.estimator_config(h), cfg.grid_x).values
    directory = _rung_dir(cfg, "sup", idx)
    store = ReplicateStore(directory, "cache")
    todo = store.missing(cfg.replicates)
    if todo:
        log.info("rung %d (n=%d, h=%g): %d replicates to run", idx, n, h, len(todo))
    _map_replicates(_sup_replicate, (cfg, n, h, expected), todo, store, cfg.threads)
    return store.finalize(cfg.replicates), directory


def run_sup_convergence(cfg: ExperimentConfig) -> dict:
    """Per rung: law of a_n M_n / c_limit against the standard Rayleigh."""
    require_theorem(cfg.error)
    c_lim = limit_constant(cfg.error, cfg.kernel)
    rungs = []
    for idx, (n, h) in enumerate(cfg.ladder):
        recs, directory = _sup_rung(cfg, idx)
        a_n = normalizer_a_n(n, h, cfg.error, cfg.kernel)
        scaled = [a_n * rec["m_n"] / c_lim for rec in recs]
        _write_replicate_csv(directory, scaled)
        rung = {
            "n": n,
            "h": h,
            "a_n": a_n,
            "c_limit": c_lim,
            "replicates": len(scaled),
            "mean_scaled_mn": float(np.mean(scaled)),
            "ks_to_rayleigh": ks_one_sample(scaled, rayleigh_cdf) if len(scaled) > 1 else None,
        }
        rung["mean_in_corridor"] = bool(
            MEAN_CORRIDOR[0] * RAYLEIGH_MEAN <= rung["mean_scaled_mn"] <= MEAN_CORRIDOR[1] * RAYLEIGH_MEAN
        )
        rungs.append(rung)
    ks = [r["ks_to_rayleigh"] for r in rungs]
    report = {
        "schema_version": SCHEMA_VERSION,
        "kind": "sup_convergence",
        "config": cfg.to_dict(),
        "rungs": rungs,
        "ks_strictly_decreasing": None if None in ks else _strictly_decreasing(ks),
    }
    if None not in ks:
        report["verdict"] = {
            "final_ks_threshold": FINAL_KS_THRESHOLD,
            "pass": bool(report["ks_strictly_decreasing"] and ks[-1] <= FINAL_KS_THRESHOLD
                         and all(r["mean_in_corridor"] for r in rungs)),
        }
    if cfg.output_dir is not None:
        write_report(report, Path(cfg.output_dir) / "sup_report.json")
    return report


def band_coverage_from_records(recs: list, half_width: float) -> float:
    """Fraction of replicates whose band contains E[f_nh] at every grid point."""
    return float(np.mean([rec["grid_max"] <= half_width for rec in recs]))


def run_band_coverage(cfg: ExperimentConfig, level: Optional[float] = None) -> dict:
    """Simultaneous coverage of E[f_nh] by f_nh +/- c q_level / a_n, per rung."""
    require_theorem(cfg.error)
    level = cfg.level if level is None else level
    rungs = []
    for idx, (n, h) in enumerate(cfg.ladder):
        recs, _ = _sup_rung(cfg, idx)
        hw = math.inf if cfg.infinite_band else band_half_width(n, h, cfg.error, cfg.kernel, level)
        rungs.append({
            "n": n,
            "h": h,
            "level": level,
            "half_width": hw if math.isfinite(hw) else "inf",
            "replicates": len(recs),
            "coverage": band_coverage_from_records(recs, hw),
        })
    report = {
        "schema_version": SCHEMA_VERSION,
        "kind": "band_coverage",
        "config": cfg.to_dict(),
        "rungs": rungs,
    }
    if cfg.output_dir is not None:
        write_report(report, Path(cfg.output_dir) / f"band_report_{level:g}.json")
    return report


# ----------------------------------------------------------------------------
# remainder negligibility
# ----------------------------------------------------------------------------

def _pieces_replicate(cfg: ExperimentConfig, n: int, h: float, stream: str, r: int) -> dict:
    ecfg, dcfg = cfg.estimator_config(h), cfg.decomposition_config()
    x = generate_data(cfg.signal, cfg.error, n, (cfg.base_seed, stream, r))
    d = decompose_from_spectra(sample_spectra(x, ecfg, dcfg), cfg.error, cfg.kernel, ecfg, dcfg, cfg.grid_x)
    return {
        "replicate": r,
        "seed": _seed_label(cfg.base_seed, stream, r),
        "pieces": [p.values.tolist() for p in (d.main_term, d.r1, d.r2, d.r3)],
    }


def run_remainder_diagnostics(cfg: ExperimentConfig) -> dict:
    """Median a_n sup|R^(l) - E R^(l)| relative to median a_n M_n, per rung.

    E R^(l) is a Monte Carlo mean over ``oracle_replicates`` independent
    replicates; E f_nh (for M_n) is the closed-form expectation.
    """
    require_theorem(cfg.error)
    rungs = []
    for idx, (n, h) in enumerate(cfg.ladder):
        ecfg, dcfg = cfg.estimator_config(h), cfg.decomposition_config()
        a_n = normalizer_a_n(n, h, cfg.error, cfg.kernel)
        directory = _rung_dir(cfg, "remainders", idx)

        oracle = ReplicateStore(directory, "oracle")
        _map_replicates(_pieces_replicate, (cfg, n, h, "oracle"), oracle.missing(cfg.oracle_replicates),
                        oracle, cfg.threads)
        acc = np.zeros((4, cfg.grid_points))
        for rec in oracle.finalize(cfg.oracle_replicates):
            acc += np.asarray(rec["pieces"])
        mean_pieces = acc / cfg.oracle_replicates

        exact = decompose_from_spectra(model_spectra(cfg.signal, cfg.error, ecfg, dcfg),
                                       cfg.error, cfg.kernel, ecfg, dcfg, cfg.grid_x)
        expected_fnh = exact.total

        diag = ReplicateStore(directory, "diag")
        _map_replicates(_pieces_replicate, (cfg, n, h, "diag"), diag.missing(cfg.diag_replicates),
                        diag, cfg.threads)
        sup_r, sup_m, max_r3 = [], [], 0.0
        for rec in diag.finalize(cfg.diag_replicates):
            p = np.asarray(rec["pieces"])
            max_r3 = max(max_r3, float(np.max(np.abs(p[3]))))
            sup_m.append(a_n * refined_abs_max(cfg.grid_x, p.sum(axis=0) - expected_fnh)[0])
            sup_r.append([a_n * refined_abs_max(cfg.grid_x, p[l] - mean_pieces[l])[0] for l in (1, 2, 3)])
        sup_r = np.asarray(sup_r)
        med_m = float(np.median(sup_m))
        med_r = [float(np.median(sup_r[:, l])) for l in range(3)]
        rungs.append({
            "n": n,
            "h": h,
            "a_n": a_n,
            "median_scaled_mn": med_m,
            "median_scaled_remainder_sup": med_r,
            "remainder_ratios": [m / med_m for m in med_r],
            "max_abs_r3": max_r3,
            "max_abs_expected_r3": float(np.max(np.abs(exact.r3.values))),
        })
    trends = [_strictly_decreasing([r["remainder_ratios"][l] for r in rungs]) for l in range(3)]
    report = {
        "schema_version": SCHEMA_VERSION,
        "kind": "remainder_diagnostics",
        "config": cfg.to_dict(),
        "rungs": rungs,
        "ratios_decreasing": trends,
    }
    if cfg.output_dir is not None:
        write_report(report, Path(cfg.output_dir) / "remainder_report.json")
    return report


# ----------------------------------------------------------------------------
# periodised cosine process
# ----------------------------------------------------------------------------

def _process_replicate(cfg: ExperimentConfig, n: int, h: float, r: int) -> dict:
    x = generate_data(cfg.signal, cfg.error, n, (cfg.base_seed, "process", r))
    return {
        "replicate": r,
        "seed": _seed_label(cfg.base_seed, "process", r),
        "s_n": cosine_process_sup(x, h, cfg.signal, cfg.error),
    }


def run_process_convergence(cfg: ExperimentConfig) -> dict:
    """Per rung: law of S_n against the exact law of sup |W|."""
    rungs = []
    for idx, (n, h) in enumerate(cfg.ladder):
        directory = _rung_dir(cfg, "process", idx)
        store = ReplicateStore(directory, "cache")
        _map_replicates(_process_replicate, (cfg, n, h), store.missing(cfg.replicates), store, cfg.threads)
        values = [rec["s_n"] for rec in store.finalize(cfg.replicates)]
        _write_replicate_csv(directory, values)
        rungs.append({
            "n": n,
            "h": h,
            "replicates": len(values),
            "mean_s_n": float(np.mean(values)),
            "ks_to_sup_w": ks_one_sample(values, sup_w_cdf),
        })
        ks = rungs[-1]["ks_to_sup_w"]
        rungs[-1]["ks_summary"] = {"n_draws": len(values), "ks": ks, "threshold": PROCESS_KS_THRESHOLD,
                                   "pass": bool(ks <= PROCESS_KS_THRESHOLD)}
    report = {
        "schema_version": SCHEMA_VERSION,
        "kind": "process_convergence",
        "config": cfg.to_dict(),
        "rungs": rungs,
    }
    if cfg.output_dir is not None:
        write_report(report, Path(cfg.output_dir) / "process_report.json")
    return report
