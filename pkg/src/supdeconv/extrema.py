"""Grid maxima with a three-point parabolic refinement."""

from __future__ import annotations

import numpy as np


def parabolic_peak(x: np.ndarray, y: np.ndarray, k: int):
    """Vertex of the parabola through points k-1, k, k+1; None if not a maximum."""
    x0, x1, x2 = x[k - 1], x[k], x[k + 1]
    y0, y1, y2 = y[k - 1], y[k], y[k + 1]
    d0, d2 = x0 - x1, x2 - x1
    # y = y1 + b (x - x1) + c (x - x1)^2
    denom = d0 * d2 * (d2 - d0)
    c = (d2 * (y0 - y1) - d0 * (y2 - y1)) / denom
    b = (d0 * d0 * (y2 - y1) - d2 * d2 * (y0 - y1)) / denom
    if c >= 0:
        return None
    dx = -b / (2.0 * c)
    if not d0 <= dx <= d2:
        return None
    return x1 + dx, y1 + b * dx + c * dx * dx


def refined_abs_max(x: np.ndarray, values: np.ndarray, periodic: bool = False, period: float = 0.0):
    """(max |values|, location) after one parabolic step; never below the grid max.

    With ``periodic`` the grid is taken to wrap around after ``period``.
    """
    a = np.abs(values)
    k = int(np.argmax(a))
    best_x, best = float(x[k]), float(a[k])
    m = a.size
    if periodic and m >= 3:
        km, kp = (k - 1) % m, (k + 1) % m
        xs = np.array([x[km] - (period if k == 0 else 0.0), x[k], x[kp] + (period if k == m - 1 else 0.0)])
        peak = parabolic_peak(xs, np.array([a[km], a[k], a[kp]]), 1)
    elif 0 < k < m - 1:
        peak = parabolic_peak(x, a, k)
    else:
        peak = None
    if peak is not None and peak[1] >= best:
        best_x, best = float(peak[0]), float(peak[1])
        if periodic:
            best_x = float(x[0] + (best_x - x[0]) % period)
    return best, best_x
