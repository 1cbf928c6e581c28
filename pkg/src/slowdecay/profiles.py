"""Radial coefficient profiles for the nonlinearity weight K and the forcing f.

Each profile is an analytic family: it evaluates K(r) or f(r) for r > 0, knows
its own derivative, and carries the decay metadata the rest of the package
needs (leading power behavior at the origin and at infinity). Families:

* ``PowerProfile``: ``coef * r**exponent``. Used for pure-power K (slow decay
  weight) and pure-power forcing ``b * r**(-d)``.
* ``PerturbedPowerProfile``: ``coef * r**exponent * (1 + amp*sin(r**pert_exponent))``,
  a monotonicity-breaking perturbation that still has a clean origin limit.
* ``PowerSumProfile``: ``sum(c_i * r**e_i)``, the shape manufactured forcings take
  for power-law reference solutions.
* ``LogReferenceForcing``: the closed-form forcing induced by the logarithmic
  reference solution ``u* = log(1/r)`` against a pure-power K.

Evaluation requires r > 0; nonpositive radii raise ValueError. Positivity
ranges are metadata (``positive_interval``), not evaluation guards: integrating
an equation past the radius where a forcing changes sign is legitimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PowerProfile",
    "PerturbedPowerProfile",
    "PowerSumProfile",
    "LogReferenceForcing",
    "zero_forcing",
    "profile_from_config",
    "profile_to_config",
]


def _check_radius(r):
    arr = np.asarray(r, dtype=float)
    if np.any(arr <= 0.0) or not np.all(np.isfinite(arr)):
        raise ValueError("profile evaluation requires finite r > 0")
    return arr


def _scalar_like(r, value):
    # mirror the input shape: scalars in, floats out
    if np.isscalar(r) or getattr(r, "ndim", 1) == 0:
        return float(value)
    return value


@dataclass(frozen=True)
class PowerProfile:
    """coef * r**exponent."""

    coef: float
    exponent: float

    family = "pure_power"

    def __post_init__(self):
        if not math.isfinite(self.coef) or not math.isfinite(self.exponent):
            raise ValueError("PowerProfile needs finite coef and exponent")

    def __call__(self, r):
        arr = _check_radius(r)
        return _scalar_like(r, self.coef * arr**self.exponent)

    def deriv(self, r):
        arr = _check_radius(r)
        return _scalar_like(r, self.coef * self.exponent * arr ** (self.exponent - 1.0))

    def leading_at_zero(self) -> tuple[float, float]:
        return (self.coef, self.exponent)

    def leading_at_inf(self) -> tuple[float, float]:
        return (self.coef, self.exponent)

    @property
    def positive_interval(self) -> tuple[float, float]:
        return (0.0, math.inf) if self.coef > 0 else (0.0, 0.0)


@dataclass(frozen=True)
class PerturbedPowerProfile:
    """coef * r**exponent * (1 + pert_amp * sin(r**pert_exponent)).

    |pert_amp| < 1 keeps the profile positive; pert_exponent > 0 keeps the
    origin limit equal to the unperturbed one (sin(r**s) -> 0).
    """

    coef: float
    exponent: float
    pert_amp: float
    pert_exponent: float

    family = "perturbed_power"

    def __post_init__(self):
        if abs(self.pert_amp) >= 1.0:
            raise ValueError("perturbation amplitude must satisfy |amp| < 1")
        if self.pert_exponent <= 0.0:
            raise ValueError("perturbation exponent must be positive")
        if self.coef <= 0.0:
            raise ValueError("PerturbedPowerProfile needs coef > 0")

    def __call__(self, r):
        arr = _check_radius(r)
        val = self.coef * arr**self.exponent * (1.0 + self.pert_amp * np.sin(arr**self.pert_exponent))
        return _scalar_like(r, val)

    def deriv(self, r):
        arr = _check_radius(r)
        s = self.pert_exponent
        base = arr**self.exponent
        osc = 1.0 + self.pert_amp * np.sin(arr**s)
        d = self.coef * (
            self.exponent * arr ** (self.exponent - 1.0) * osc
            + base * self.pert_amp * np.cos(arr**s) * s * arr ** (s - 1.0)
        )
        return _scalar_like(r, d)

    def leading_at_zero(self) -> tuple[float, float]:
        return (self.coef, self.exponent)

    def leading_at_inf(self) -> tuple[float, float]:
        # no limit along r**exponent; the oscillation does not decay
        return (self.coef, self.exponent)

    @property
    def positive_interval(self) -> tuple[float, float]:
        return (0.0, math.inf)


@dataclass(frozen=True)
class PowerSumProfile:
    """sum of c_i * r**e_i over the stored (c_i, e_i) terms."""

    terms: tuple[tuple[float, float], ...]

    family = "power_sum"

    def __post_init__(self):
        terms = tuple((float(c), float(e)) for c, e in self.terms)
        if not terms:
            raise ValueError("PowerSumProfile needs at least one term")
        exps = [e for _, e in terms]
        if len(set(exps)) != len(exps):
            raise ValueError("PowerSumProfile exponents must be distinct")
        object.__setattr__(self, "terms", terms)

    def __call__(self, r):
        arr = _check_radius(r)
        val = sum(c * arr**e for c, e in self.terms)
        return _scalar_like(r, val)

    def deriv(self, r):
        arr = _check_radius(r)
        val = sum(c * e * arr ** (e - 1.0) for c, e in self.terms)
        return _scalar_like(r, val)

    def leading_at_zero(self) -> tuple[float, float]:
        c, e = min(self.terms, key=lambda t: t[1])
        return (c, e)

    def leading_at_inf(self) -> tuple[float, float]:
        c, e = max(self.terms, key=lambda t: t[1])
        return (c, e)

    @property
    def positive_interval(self) -> tuple[float, float]:
        # bracket the first sign change of the leading-positive case on a log grid
        c0, _ = self.leading_at_zero()
        if c0 <= 0:
            return (0.0, 0.0)
        grid = np.logspace(-12, 12, 4801)
        vals = self(grid)
        bad = np.nonzero(vals <= 0.0)[0]
        if bad.size == 0:
            return (0.0, math.inf)
        k = bad[0]
        lo, hi = grid[k - 1], grid[k]
        for _ in range(80):
            mid = math.sqrt(lo * hi)
            if self(mid) > 0.0:
                lo = mid
            else:
                hi = mid
        return (0.0, lo)


@dataclass(frozen=True)
class LogReferenceForcing:
    """Forcing induced by u* = log(1/r) against K = k0 * r**l in dimension n.

    f(r) = (n-2) * r**-2 - k0 * r**l * log(1/r)**p, valid (u* > 0) on (0, 1).
    The origin behavior is f ~ (n-2) * r**-2: decay index d = 2.
    """

    n: int
    p: float
    k0: float
    l: float = 0.0

    family = "log_reference"

    def __call__(self, r):
        arr = _check_radius(r)
        logs = -np.log(arr)
        val = (self.n - 2.0) * arr**-2.0 - self.k0 * arr**self.l * np.sign(logs) * np.abs(logs) ** self.p
        return _scalar_like(r, val)

    def deriv(self, r):
        arr = _check_radius(r)
        logs = -np.log(arr)
        powp = np.sign(logs) * np.abs(logs) ** self.p
        powm = np.abs(logs) ** (self.p - 1.0)
        d = (
            -2.0 * (self.n - 2.0) * arr**-3.0
            - self.k0 * (self.l * arr ** (self.l - 1.0) * powp - self.p * arr ** (self.l - 1.0) * powm)
        )
        return _scalar_like(r, d)

    def leading_at_zero(self) -> tuple[float, float]:
        return (self.n - 2.0, -2.0)

    def leading_at_inf(self) -> tuple[float, float]:
        # dominated by the negative log-power term; exponent up to log factors
        return (-self.k0, self.l)

    @property
    def positive_interval(self) -> tuple[float, float]:
        return (0.0, 1.0)


def zero_forcing() -> PowerProfile:
    """The trivial forcing f = 0 (used with mu = 0)."""
    return PowerProfile(0.0, 0.0)


_FAMILIES = {
    "pure_power": PowerProfile,
    "perturbed_power": PerturbedPowerProfile,
    "power_sum": PowerSumProfile,
    "log_reference": LogReferenceForcing,
}


def profile_from_config(doc: dict):
    """Build a profile from its JSON configuration form."""
    doc = dict(doc)
    family = doc.pop("family", None)
    if family not in _FAMILIES:
        raise ValueError(f"unknown profile family: {family!r}")
    if family == "power_sum":
        doc["terms"] = tuple(tuple(t) for t in doc["terms"])
    try:
        return _FAMILIES[family](**doc)
    except TypeError as exc:
        raise ValueError(f"bad fields for profile family {family!r}: {exc}") from exc


def profile_to_config(profile) -> dict:
    """Serialize a profile back to its JSON configuration form."""
    if isinstance(profile, PowerProfile):
        return {"family": "pure_power", "coef": profile.coef, "exponent": profile.exponent}
    if isinstance(profile, PerturbedPowerProfile):
        return {
            "family": "perturbed_power",
            "coef": profile.coef,
            "exponent": profile.exponent,
            "pert_amp": profile.pert_amp,
            "pert_exponent": profile.pert_exponent,
        }
    if isinstance(profile, PowerSumProfile):
        return {"family": "power_sum", "terms": [list(t) for t in profile.terms]}
    if isinstance(profile, LogReferenceForcing):
        return {
            "family": "log_reference",
            "n": profile.n,
            "p": profile.p,
            "k0": profile.k0,
            "l": profile.l,
        }
    raise ValueError(f"cannot serialize profile of type {type(profile).__name__}")
