"""Adaptive embedded Runge-Kutta 5(4) core (Dormand-Prince pair).

One stepper serves the radial integrator, the transformed-plane integrator and
the linear growth demonstrator. Features the rest of the package relies on:

* PI-free step control on the user's state vector: the error norm is the RMS
  of the embedded 4th/5th order difference against atol + rtol*|y|.
* FSAL (first-same-as-last) stage reuse.
* Piecewise-quartic dense output (the standard continuous extension of the
  pair), stored per accepted step and evaluable anywhere in the covered span.
* Terminal and non-terminal scalar events. An event fires when its function
  changes sign from positive to nonpositive across an accepted step and is
  located by bisection on the dense output; the kept endpoint satisfies
  g <= 0 so callers can rely on the crossing side.
* Step underflow detection: |h| < 1e-15 * max(|x|, 1e-6) terminates with
  status "step_underflow" instead of looping forever.

The stepper never raises for underflow, step exhaustion or events; it reports
a status and returns everything computed so far.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = ["EventSpec", "IntegratorStats", "DenseOutput", "OdeResult", "integrate_ode"]

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# continuous-extension coefficients (quartic in the step fraction)
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_MIN_STEP_REL = 1e-15
_MAX_FACTOR = 5.0
_MIN_FACTOR = 0.2
_SAFETY = 0.9


@dataclass(frozen=True)
class EventSpec:
    """Scalar event g(x, y); fires when g crosses from > 0 to <= 0."""

    fn: Callable[[float, np.ndarray], float]
    terminal: bool = True
    name: str = "event"


@dataclass
class IntegratorStats:
    n_accepted: int = 0
    n_rejected: int = 0
    n_rhs: int = 0
    rtol: float = 0.0
    atol: float = 0.0
    error_estimate: float = 0.0


@dataclass
class DenseOutput:
    """Piecewise continuous extension over the accepted steps."""

    x_left: np.ndarray  # (M,)
    h: np.ndarray  # (M,)
    y_left: np.ndarray  # (M, dim)
    q: np.ndarray  # (M, dim, 4)
    direction: int

    def __call__(self, x):
        xq = np.atleast_1d(np.asarray(x, dtype=float))
        edges = self.direction * self.x_left
        idx = np.searchsorted(edges, self.direction * xq, side="right") - 1
        idx = np.clip(idx, 0, len(self.h) - 1)
        theta = (xq - self.x_left[idx]) / self.h[idx]
        powers = np.stack([theta, theta**2, theta**3, theta**4], axis=-1)  # (N,4)
        incr = np.einsum("sdk,sk->sd", self.q[idx], powers)
        out = self.y_left[idx] + self.h[idx][:, None] * incr
        if np.isscalar(x) or getattr(x, "ndim", 1) == 0:
            return out[0]
        return out

    @property
    def x_min(self) -> float:
        lo = self.x_left[0]
        hi = self.x_left[-1] + self.h[-1]
        return min(lo, hi)

    @property
    def x_max(self) -> float:
        lo = self.x_left[0]
        hi = self.x_left[-1] + self.h[-1]
        return max(lo, hi)


@dataclass
class OdeResult:
    x: np.ndarray
    y: np.ndarray
    status: str  # reached_target | event | step_underflow | max_steps
    stats: IntegratorStats
    dense: DenseOutput | None
    event_name: str | None = None
    event_x: float | None = None
    event_log: dict = field(default_factory=dict)  # name -> first crossing x


def _rms(v: np.ndarray) -> float:
    return float(math.sqrt(np.mean(v * v)))


def _initial_step(fun, x0, y0, f0, direction, rtol, atol, span):
    scale = atol + rtol * np.abs(y0)
    d0 = _rms(y0 / scale)
    d1 = _rms(f0 / scale)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, 0.1 * span)
    y1 = y0 + h0 * direction * f0
    f1 = fun(x0 + h0 * direction, y1)
    d2 = _rms((f1 - f0) / scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span) * direction


def integrate_ode(
    fun: Callable[[float, np.ndarray], np.ndarray],
    x0: float,
    y0: Sequence[float],
    x_end: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    events: Sequence[EventSpec] = (),
    max_steps: int = 100_000,
    first_step: float | None = None,
    keep_dense: bool = True,
) -> OdeResult:
    """Integrate y' = fun(x, y) from x0 to x_end with adaptive RK5(4).

    Returns the accepted nodes (strictly monotone in the integration
    direction), a status, step statistics and the dense output. first_step,
    when given, is a magnitude; the direction is inferred from x_end - x0.
    """
    y0 = np.asarray(y0, dtype=float)
    if x_end == x0:
        raise ValueError("empty integration span")
    direction = 1 if x_end > x0 else -1
    span = abs(x_end - x0)

    stats = IntegratorStats(rtol=rtol, atol=atol)

    def f(x, y):
        stats.n_rhs += 1
        return np.asarray(fun(x, y), dtype=float)

    x, y = float(x0), y0.copy()
    k0 = f(x, y)
    if first_step is not None:
        h = min(abs(first_step), span) * direction
    else:
        h = _initial_step(f, x, y, k0, direction, rtol, atol, span)

    xs = [x]
    ys = [y.copy()]
    dim = y.size
    d_xl: list[float] = []
    d_h: list[float] = []
    d_yl: list[np.ndarray] = []
    d_q: list[np.ndarray] = []

    ev_state = [ev.fn(x, y) for ev in events]
    ev_log: dict[str, float] = {}
    status = None
    event_name = None
    event_x = None
    just_rejected = False

    K = np.empty((7, dim))

    while status is None:
        if stats.n_accepted + stats.n_rejected >= max_steps:
            status = "max_steps"
            break
        floor = _MIN_STEP_REL * max(abs(x), 1e-6)
        if abs(h) < floor:
            status = "step_underflow"
            break
        # do not step past the target; the clipped step lands exactly on it
        final = direction * (x + h - x_end) >= 0.0
        if final:
            h = x_end - x

        K[0] = k0
        for i in range(1, 7):
            yi = y + h * (K[:i].T @ _A[i])
            K[i] = f(x + _C[i] * h, yi)
        y_new = y + h * (K.T @ _B)
        # K[6] is f(x+h, y_new) because the pair is FSAL
        err_vec = h * (K.T @ _E)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(err_vec / scale)

        if err > 1.0:
            stats.n_rejected += 1
            h *= max(_MIN_FACTOR, _SAFETY * err**-0.2)
            just_rejected = True
            continue

        # accepted
        stats.n_accepted += 1
        stats.error_estimate += float(np.max(np.abs(err_vec)))
        x_new = x_end if final else x + h
        q = (K.T @ _P) * 1.0  # (dim, 4)

        # event handling on this step
        hit = None
        for j, ev in enumerate(events):
            g_new = ev.fn(x_new, y_new)
            if ev_state[j] > 0.0 >= g_new and (hit is None or not events[hit[0]].terminal):
                # bisection on the step fraction for the first crossing
                lo, hi = 0.0, 1.0

                def val(theta):
                    yy = y + h * (q @ np.array([theta, theta**2, theta**3, theta**4]))
                    return ev.fn(x + theta * h, yy), yy

                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    gm, _ = val(mid)
                    if gm > 0.0:
                        lo = mid
                    else:
                        hi = mid
                    if hi - lo < 1e-15:
                        break
                g_hit, y_hit = val(hi)
                if ev.name not in ev_log:
                    ev_log[ev.name] = x + hi * h
                if ev.terminal:
                    hit = (j, x + hi * h, y_hit)
            ev_state[j] = g_new

        if hit is not None:
            j, x_ev, y_ev = hit
            theta_ev = (x_ev - x) / h
            if keep_dense:
                d_xl.append(x)
                d_h.append(x_ev - x)
                # rescale the quartic so theta spans the truncated step
                scale_pows = np.array([theta_ev, theta_ev**2, theta_ev**3, theta_ev**4])
                q_trunc = q * scale_pows[None, :] / np.maximum(theta_ev, 1e-300)
                d_yl.append(y.copy())
                d_q.append(q_trunc)
            xs.append(x_ev)
            ys.append(y_ev)
            status = "event"
            event_name = events[j].name
            event_x = x_ev
            break

        if keep_dense:
            d_xl.append(x)
            d_h.append(h)
            d_yl.append(y.copy())
            d_q.append(q)
        xs.append(x_new)
        ys.append(y_new.copy())

        factor = min(_MAX_FACTOR, _SAFETY * (err**-0.2 if err > 0.0 else _MAX_FACTOR / _SAFETY))
        if just_rejected:
            factor = min(1.0, factor)
            just_rejected = False
        x, y, k0 = x_new, y_new, K[6].copy()
        if final:
            status = "reached_target"
            break
        h *= factor

    dense = None
    if keep_dense and d_h:
        dense = DenseOutput(
            x_left=np.array(d_xl),
            h=np.array(d_h),
            y_left=np.array(d_yl),
            q=np.array(d_q),
            direction=direction,
        )
    return OdeResult(
        x=np.array(xs),
        y=np.array(ys),
        status=status,
        stats=stats,
        dense=dense,
        event_name=event_name,
        event_x=event_x,
        event_log=ev_log,
    )
