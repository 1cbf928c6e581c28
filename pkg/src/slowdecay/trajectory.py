"""Trajectory container shared by the radial, transformed and linear solvers.

Samples live in physical variables for their coordinate system:

* ``radial``: x = r, y = (u, u')
* ``emden_fowler``: x = t = log r, y = (v, v')
* ``linear``: x = t, y = (y, y')

``x`` is strictly monotone in the integration direction (decreasing for inward
runs). ``eval`` uses the integrator's dense output (or a transform of a parent
trajectory's dense output) and works anywhere inside the covered span;
trajectories assembled from bare samples have no dense output and ``eval``
raises. Termination is one of ``reached_target``, ``positivity_lost``,
``threshold_crossed``, ``step_underflow``, ``max_steps``; ``event_x`` holds
the bisected crossing location when relevant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dopri import IntegratorStats

__all__ = ["Trajectory"]


@dataclass
class Trajectory:
    coords: str
    x: np.ndarray
    y: np.ndarray
    termination: str
    stats: IntegratorStats
    event_x: float | None = None
    eval_fn: Callable[[np.ndarray], np.ndarray] | None = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.y.ndim != 2 or self.y.shape[0] != self.x.size or self.y.shape[1] != 2:
            raise ValueError("trajectory samples must be (N,) x and (N, 2) y")
        d = np.diff(self.x)
        if d.size and not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("trajectory abscissae must be strictly monotone")

    @property
    def direction(self) -> int:
        if self.x.size < 2:
            return 1
        return 1 if self.x[1] > self.x[0] else -1

    @property
    def x_min(self) -> float:
        return float(self.x.min())

    @property
    def x_max(self) -> float:
        return float(self.x.max())

    @property
    def span(self) -> float:
        return self.x_max - self.x_min

    def covers(self, lo: float, hi: float) -> bool:
        return self.x_min <= lo and hi <= self.x_max

    def eval(self, xq):
        """Dense-output evaluation at xq (scalar or array) inside the span."""
        if self.eval_fn is None:
            raise ValueError("trajectory has no dense output")
        arr = np.atleast_1d(np.asarray(xq, dtype=float))
        if arr.size and (arr.min() < self.x_min - 1e-12 or arr.max() > self.x_max + 1e-12):
            raise ValueError(
                f"evaluation outside covered span [{self.x_min:g}, {self.x_max:g}]"
            )
        out = self.eval_fn(arr)
        if np.isscalar(xq) or getattr(xq, "ndim", 1) == 0:
            return out[0]
        return out

    def values(self, xq) -> np.ndarray:
        """First component (u, v or y) at xq."""
        out = np.atleast_2d(self.eval(np.atleast_1d(xq)))
        return out[:, 0]
