"""Composite Newton-Cotes rules on uniform node sets."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, QuadratureError

MIN_NODES_PER_UNIT = 64
DEFAULT_NODES_PER_UNIT = 512


@dataclass(frozen=True)
class QuadratureSpec:
    """Node density (per unit of frequency length) and the composite rule."""

    nodes_per_unit: int = DEFAULT_NODES_PER_UNIT
    rule: str = "simpson"

    def __post_init__(self):
        if int(self.nodes_per_unit) != self.nodes_per_unit or self.nodes_per_unit < MIN_NODES_PER_UNIT:
            raise ConfigError(f"nodes_per_unit must be an integer >= {MIN_NODES_PER_UNIT}")
        if self.rule not in ("simpson", "trapezoid"):
            raise ConfigError(f"unknown quadrature rule {self.rule!r}")

    def intervals(self, length: float) -> int:
        """Interval count for a range of the given length (even for Simpson)."""
        n = max(2, math.ceil(self.nodes_per_unit * length - 1e-9))
        if self.rule == "simpson" and n % 2:
            n += 1
        return n

    def nodes(self, a: float, b: float):
        """Nodes and weights on [a, b]."""
        n = self.intervals(b - a)
        if self.rule == "simpson":
            return simpson_rule(a, b, n)
        return trapezoid_rule(a, b, n)

    def to_dict(self) -> dict:
        return {"nodes_per_unit": int(self.nodes_per_unit), "rule": self.rule}

    @classmethod
    def from_dict(cls, d: dict) -> "QuadratureSpec":
        return cls(**d)


def simpson_rule(a: float, b: float, n_intervals: int):
    """Composite Simpson nodes/weights; ``n_intervals`` must be even."""
    if n_intervals < 2 or n_intervals % 2:
        raise QuadratureError(f"Simpson's rule needs an even interval count, got {n_intervals}")
    x = np.linspace(a, b, n_intervals + 1)
    dx = (b - a) / n_intervals
    w = np.full(n_intervals + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return x, w * (dx / 3.0)


def trapezoid_rule(a: float, b: float, n_intervals: int):
    if n_intervals < 1:
        raise QuadratureError("trapezoid rule needs at least one interval")
    x = np.linspace(a, b, n_intervals + 1)
    dx = (b - a) / n_intervals
    w = np.full(n_intervals + 1, dx)
    w[0] = w[-1] = dx / 2.0
    return x, w
