"""Initial value solver for the radial equation in its physical variables.

The second-order problem

    u'' + (n-1)/r * u' + K(r) u**p + mu f(r) = 0

is integrated as a first-order system in the scaled state (u, w) with
w = r u', which regularizes the origin-facing coefficient and is also the
state the step-size control acts on:

    u' = w / r,       w' = -(n-2) w / r - r (K u**p + mu f).

Positivity is enforced by a terminal event at u = tol_pos = 1e-14 located by
bisection on the step; trajectories report how they ended instead of raising.
``series_start`` produces consistent initial data at a small radius from the
two-term origin expansion; ``integral_residual`` re-derives the trajectory
from its own integral representation by Simpson quadrature, an independent
check on the Runge-Kutta route.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import cumulative_simpson

from .dopri import EventSpec, integrate_ode
from .errors import InsufficientCoverage, NegativeBase, SeriesInvalid
from .model import DerivedConstants, ProblemParams
from .trajectory import Trajectory

__all__ = [
    "TOL_POS",
    "rhs_radial",
    "series_start",
    "integrate_radial",
    "integral_residual",
]

TOL_POS = 1e-14  # positivity threshold for the terminal event


def _power(p: float):
    """u**p for u >= 0, clamped at TOL_POS for non-integer p (stage probes
    may dip below zero by roundoff)."""
    if float(p).is_integer():
        ip = int(p)
        return lambda u: u**ip
    return lambda u: math.exp(p * math.log(u)) if u > TOL_POS else TOL_POS**p


def rhs_radial(params: ProblemParams, constants: DerivedConstants, r: float, u: float, du: float) -> float:
    """u'' from the radial equation at (r, u, u').

    Raises NegativeBase when u < 0 meets a non-integer exponent; negative u
    with an integer exponent is evaluated as written.
    """
    if not r > 0.0:
        raise ValueError("radius must be positive")
    if u < 0.0 and not float(params.p).is_integer():
        raise NegativeBase(f"u = {u:.6g} < 0 with non-integer p = {params.p}")
    up = u**params.p if u >= 0.0 or float(params.p).is_integer() else math.nan
    val = params.K(r) * up
    if params.mu != 0.0:
        val += params.mu * params.f(r)
    return -(params.n - 1.0) / r * du - val


def series_start(
    params: ProblemParams,
    constants: DerivedConstants,
    alpha: float,
    r0: float = 1e-6,
) -> tuple[float, float, float]:
    """Consistent initial data (r0, u0, u0') from the two-term origin expansion.

    u(r) = alpha - k0 alpha**p r**(l+2) / ((l+2)(n+l))
                 - mu b r**(2-d) / ((2-d)(n-d)) + higher order,

    with (b, d) the forcing's origin behavior f ~ b r**-d. The start radius is
    halved until every retained correction is below 1e-12 * alpha, keeping the
    truncation under the integrator's own error. Raises SeriesInvalid when the
    forcing is too singular for the expansion (d >= 2).
    """
    if not alpha > 0.0:
        raise ValueError("central value alpha must be positive")
    if not r0 > 0.0:
        raise ValueError("start radius must be positive")
    n, p, l = params.n, params.p, params.l
    k0, _ = params.K.leading_at_zero()
    b = d = 0.0
    if params.mu != 0.0:
        coef, expo = params.f.leading_at_zero()
        if coef != 0.0:
            b, d = coef, -expo
            if d >= 2.0:
                raise SeriesInvalid(
                    f"forcing decay index d = {d:.6g} >= 2: the origin expansion does not apply"
                )

    def terms(r: float) -> tuple[float, float]:
        t1 = k0 * alpha**p * r ** (l + 2.0) / ((l + 2.0) * (n + l))
        t2 = 0.0
        if b != 0.0:
            t2 = params.mu * b * r ** (2.0 - d) / ((2.0 - d) * (n - d))
        return t1, t2

    for _ in range(200):
        t1, t2 = terms(r0)
        if max(abs(t1), abs(t2)) < 1e-12 * alpha:
            break
        r0 *= 0.5
    else:
        raise SeriesInvalid("start radius did not shrink to a valid expansion point")

    u0 = alpha - t1 - t2
    du0 = -k0 * alpha**p * r0 ** (l + 1.0) / (n + l)
    if b != 0.0:
        du0 -= params.mu * b * r0 ** (1.0 - d) / (n - d)
    return r0, u0, du0


def integrate_radial(
    params: ProblemParams,
    constants: DerivedConstants,
    r0: float,
    u0: float,
    du0: float,
    r_target: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    max_steps: int = 100_000,
    first_step: float | None = None,
    tol_pos: float = TOL_POS,
) -> Trajectory:
    """Integrate the radial equation from (r0, u0, u0') toward r_target.

    Works in both directions (r_target below r0 integrates inward). The
    returned trajectory carries physical samples (u, u'), dense output,
    integrator statistics, and the termination record; positivity loss
    truncates the run at the bisected crossing radius with the final sample
    satisfying u <= tol_pos.
    """
    if not r0 > 0.0 or not r_target > 0.0:
        raise ValueError("radii must be positive")
    n, p, mu = params.n, params.p, params.mu
    K, f = params.K, params.f
    upow = _power(p)
    nm2 = n - 2.0

    def rhs(r, y):
        u, w = y
        val = K(r) * upow(u)
        if mu != 0.0:
            val += mu * f(r)
        return np.array([w / r, -nm2 * w / r - r * val])

    if first_step is None:
        first_step = 0.05 * r0

    res = integrate_ode(
        rhs,
        r0,
        (u0, r0 * du0),
        r_target,
        rtol=rtol,
        atol=atol,
        events=(EventSpec(lambda r, y: y[0] - tol_pos, terminal=True, name="positivity"),),
        max_steps=max_steps,
        first_step=first_step,
    )

    rs = res.x
    us = res.y[:, 0]
    dus = res.y[:, 1] / rs
    termination = "positivity_lost" if res.status == "event" else res.status
    dense = res.dense

    def eval_fn(rq):
        yy = np.atleast_2d(dense(rq))
        return np.column_stack([yy[:, 0], yy[:, 1] / np.atleast_1d(rq)])

    traj = Trajectory(
        coords="radial",
        x=rs,
        y=np.column_stack([us, dus]),
        termination=termination,
        stats=res.stats,
        event_x=res.event_x,
        eval_fn=eval_fn if dense is not None else None,
        notes={
            "tol_pos": tol_pos,
            "n_du_positive": int(np.count_nonzero(dus > 0.0)),
        },
    )
    return traj


def integral_residual(
    params: ProblemParams,
    traj: Trajectory,
    r_lo: float | None = None,
    r_hi: float | None = None,
    n_fine: int | None = None,
) -> float:
    """Defect of the trajectory against its own double-integral representation.

    Integrating the equation twice gives, for r_lo <= r <= R,

        u(r) - u(R) = int_r^R t**(1-n) [ I0 + int_{r_lo}^t (K u**p + mu f) s**(n-1) ds ] dt,

    where I0 = int_0^{r_lo} (...) s**(n-1) ds is the part of the inner
    integral the trajectory cannot see; it is anchored through the flux
    identity I0 = -r_lo**(n-1) u'(r_lo), exact for true solutions. Both
    integrals are evaluated by cumulative Simpson quadrature (on a uniform
    log-radius refinement of the dense output when available, else on the
    raw samples), an independent route from the Runge-Kutta one. Returns the
    maximum absolute defect over the evaluation grid.
    """
    order = np.argsort(traj.x)
    rs_all = traj.x[order]
    lo = traj.x_min if r_lo is None else r_lo
    hi = traj.x_max if r_hi is None else r_hi
    if lo < traj.x_min - 1e-12 or hi > traj.x_max + 1e-12 or not lo < hi:
        raise InsufficientCoverage(
            f"trajectory covers [{traj.x_min:g}, {traj.x_max:g}], requested [{lo:g}, {hi:g}]"
        )

    if traj.eval_fn is not None:
        inside = np.count_nonzero((rs_all >= lo) & (rs_all <= hi))
        if n_fine is None:
            n_fine = min(20001, max(4001, 4 * inside + 1))
        if n_fine % 2 == 0:
            n_fine += 1
        rs = np.exp(np.linspace(math.log(lo), math.log(hi), n_fine))
        rs[0], rs[-1] = lo, hi
        ys = np.atleast_2d(traj.eval(rs))
        us, dus = ys[:, 0], ys[:, 1]
    else:
        keep = (rs_all >= lo) & (rs_all <= hi)
        rs = rs_all[keep]
        if rs.size < 5:
            raise InsufficientCoverage("too few samples in the requested window")
        us = traj.y[order][keep, 0]
        dus = traj.y[order][keep, 1]

    n, mu = params.n, params.mu
    upow = _power(params.p)
    F = params.K(rs) * np.array([upow(u) for u in us]) * rs ** (n - 1.0)
    if mu != 0.0:
        F = F + mu * params.f(rs) * rs ** (n - 1.0)

    I0 = -(rs[0] ** (n - 1.0)) * dus[0]
    G = I0 + np.concatenate([[0.0], cumulative_simpson(F, x=rs)])
    outer = rs ** (1.0 - n) * G
    S = np.concatenate([[0.0], cumulative_simpson(outer, x=rs)])
    H = S[-1] - S  # int_r^R
    defect = us - us[-1] - H
    return float(np.max(np.abs(defect)))
