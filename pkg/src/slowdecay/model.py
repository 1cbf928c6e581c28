"""Problem definition and the constants derived from the exponent triple.

The equation under study is the radial semilinear problem

    u'' + (n-1)/r * u' + K(r) * u**p + mu * f(r) = 0,      r > 0,

with a slow-decay weight K ~ k0 * r**l (l > -2) near the origin. Everything
downstream is organized around the scaling exponent m = (l+2)/(p-1) and the
constant L with L**(p-1) = m*(n-2-m): the function L * r**(-m) (suitably
normalized by K) is the separatrix that singular solutions approach.

Operations:

* ``derive_constants``: m, L, L**(p-1), damping a = n-2-2m, the oscillation
  threshold root lambda2 (None when the discriminant is negative), and the
  critical exponent p_c.
* ``critical_exponent``: Joseph-Lundgren-type threshold in (n, l) alone.
* ``limit_equation_roots``: nonnegative roots z1 <= z2 of
  k0*z**p - Lp1*z + b = 0, the only possible origin limits of r**m * u.
* ``forcing_ceiling``: largest admissible b (roots exist iff b <= b_max).
* ``check_hypotheses``: decide the standing structural hypotheses on (K, f)
  analytically for the built-in families, numerically where needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import DegenerateExponents, NoNonnegativeRoot
from .profiles import (
    LogReferenceForcing,
    PerturbedPowerProfile,
    PowerProfile,
    PowerSumProfile,
)

__all__ = [
    "ProblemParams",
    "DerivedConstants",
    "derive_constants",
    "critical_exponent",
    "limit_equation_roots",
    "forcing_ceiling",
    "effective_forcing_limit",
    "HypothesisCheck",
    "HypothesisReport",
    "check_hypotheses",
]


@dataclass(frozen=True)
class ProblemParams:
    """Inputs of the radial problem: exponents, weight, forcing, forcing size."""

    n: int
    p: float
    l: float
    K: PowerProfile | PerturbedPowerProfile | PowerSumProfile | LogReferenceForcing
    f: PowerProfile | PerturbedPowerProfile | PowerSumProfile | LogReferenceForcing
    mu: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError("dimension n must be an integer >= 3")
        if not self.p > 1.0:
            raise ValueError("exponent p must exceed 1")
        if not self.l > -2.0:
            raise ValueError("slow-decay exponent l must exceed -2")
        if self.mu < 0.0:
            raise ValueError("forcing size mu must be nonnegative")

    def rhs_nonlinearity(self, r, u_pow_p):
        """K(r) * u**p + mu * f(r) with the power already applied."""
        val = self.K(r) * u_pow_p
        if self.mu != 0.0:
            val = val + self.mu * self.f(r)
        return val


@dataclass(frozen=True)
class DerivedConstants:
    """Constants determined by (n, l, p) alone."""

    n: int
    l: float
    p: float
    m: float
    L: float
    Lp1: float
    a: float
    lambda2: float | None
    p_c: float

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "L": self.L,
            "Lp1": self.Lp1,
            "a": self.a,
            "lambda2": self.lambda2,
            "p_c": self.p_c,
        }


def derive_constants(n: int, l: float, p: float) -> DerivedConstants:
    """Derive (m, L, Lp1, a, lambda2, p_c) from the exponent triple.

    Raises DegenerateExponents when n - 2 - m <= 0, where L is not defined
    as a positive number and the singular scaling degenerates.
    """
    if not p > 1.0:
        raise ValueError("exponent p must exceed 1")
    if not l > -2.0:
        raise ValueError("slow-decay exponent l must exceed -2")
    m = (l + 2.0) / (p - 1.0)
    gap = n - 2.0 - m
    if gap <= 0.0:
        raise DegenerateExponents(
            f"n-2-m = {gap:.6g} <= 0 for (n,l,p)=({n},{l},{p}); no singular scaling"
        )
    Lp1 = m * gap
    L = Lp1 ** (1.0 / (p - 1.0))
    a = n - 2.0 - 2.0 * m
    disc = a * a - 4.0 * (l + 2.0) * gap
    lambda2 = (a + math.sqrt(disc)) / 2.0 if disc >= 0.0 else None
    return DerivedConstants(
        n=int(n), l=float(l), p=float(p), m=m, L=L, Lp1=Lp1, a=a,
        lambda2=lambda2, p_c=critical_exponent(n, l),
    )


def critical_exponent(n: float, l: float = 0.0) -> float:
    """Joseph-Lundgren-type threshold p_c(n, l); math.inf when n <= 10 + 4l.

    Accepts real n so the divergence of the threshold as n decreases to
    10 + 4l can be probed directly.
    """
    if not n > 2.0:
        raise ValueError("critical exponent needs n > 2")
    if not l > -2.0:
        raise ValueError("slow-decay exponent l must exceed -2")
    if n <= 10.0 + 4.0 * l:
        return math.inf
    num = (n - 2.0) ** 2 - 2.0 * (l + 2.0) * (n + l) + 2.0 * (l + 2.0) * math.sqrt(
        (n + l) ** 2 - (n - 2.0) ** 2
    )
    den = (n - 2.0) * (n - 10.0 - 4.0 * l)
    pc = num / den
    if not pc > 1.0:
        raise AssertionError(f"critical exponent left its admissible range: {pc}")
    return pc


def forcing_ceiling(k0: float, p: float, Lp1: float) -> float:
    """max over z >= 0 of Lp1*z - k0*z**p, the largest b with roots.

    Closed form: with z* = (Lp1/(p*k0))**(1/(p-1)) the ceiling is
    (1 - 1/p) * Lp1 * z*.
    """
    if k0 <= 0.0 or Lp1 <= 0.0 or not p > 1.0:
        raise ValueError("forcing_ceiling needs k0 > 0, Lp1 > 0, p > 1")
    z_star = (Lp1 / (p * k0)) ** (1.0 / (p - 1.0))
    return (1.0 - 1.0 / p) * Lp1 * z_star


def limit_equation_roots(k0: float, p: float, Lp1: float, b: float) -> tuple[float, float]:
    """Nonnegative roots z1 <= z2 of phi(z) = k0*z**p - Lp1*z + b.

    Bracketed bisection refined by Newton; each returned root is certified by
    the residual bound |phi(z)| < 1e-12 * max(1, Lp1*z). Raises
    NoNonnegativeRoot when b exceeds the forcing ceiling.
    """
    if k0 <= 0.0 or Lp1 <= 0.0 or not p > 1.0:
        raise ValueError("limit equation needs k0 > 0, Lp1 > 0, p > 1")
    if b < 0.0:
        raise ValueError("limit equation takes b >= 0")

    z_star = (Lp1 / (p * k0)) ** (1.0 / (p - 1.0))
    b_max = (1.0 - 1.0 / p) * Lp1 * z_star
    if b > b_max:
        raise NoNonnegativeRoot(
            f"b = {b:.6g} exceeds the forcing ceiling b_max = {b_max:.6g}"
        )

    def phi(z: float) -> float:
        return k0 * z**p - Lp1 * z + b

    def dphi(z: float) -> float:
        return p * k0 * z ** (p - 1.0) - Lp1

    def certify(z: float) -> float:
        res = phi(z)
        if abs(res) >= 1e-12 * max(1.0, Lp1 * z):
            raise AssertionError(f"root residual not certified: phi({z!r}) = {res!r}")
        return z

    if b == 0.0:
        return (0.0, certify((Lp1 / k0) ** (1.0 / (p - 1.0))))
    if b == b_max or phi(z_star) >= 0.0:
        # at the ceiling the two roots coincide at the maximizer
        return (certify(z_star), certify(z_star))

    def solve(lo: float, hi: float) -> float:
        flo = phi(lo)
        for _ in range(90):
            mid = 0.5 * (lo + hi)
            fm = phi(mid)
            if fm == 0.0:
                return mid
            if (fm > 0.0) == (flo > 0.0):
                lo, flo = mid, fm
            else:
                hi = mid
            if hi - lo <= 1e-15 * max(1.0, hi):
                break
        z = 0.5 * (lo + hi)
        for _ in range(8):
            d = dphi(z)
            if d == 0.0:
                break
            step = phi(z) / d
            z_new = z - step
            if not (lo <= z_new <= hi):
                break
            if z_new == z:
                break
            z = z_new
        return z

    hi = z_star * (2.0 * p) ** (1.0 / (p - 1.0)) + 1.0
    while phi(hi) <= 0.0:
        hi *= 2.0
    z1 = solve(0.0, z_star)
    z2 = solve(z_star, hi)
    return (certify(z1), certify(z2))


def effective_forcing_limit(params: ProblemParams, constants: DerivedConstants) -> float:
    """The constant b entering the limit equation: mu * lim r**d f(r).

    Zero when mu = 0, when the forcing vanishes, or when the forcing decays
    strictly slower than r**-(m+2) at the origin (its transform then tends
    to 0). Only a forcing with decay index d = m+2 contributes.
    """
    if params.mu == 0.0:
        return 0.0
    coef, expo = params.f.leading_at_zero()
    d = -expo
    if coef == 0.0 or abs(d - (constants.m + 2.0)) > 1e-12:
        return 0.0
    return params.mu * coef


# ---------------------------------------------------------------------------
# structural hypotheses on (K, f)
# ---------------------------------------------------------------------------

_K_NAMES = ("K.1", "K.2", "K.3", "K'.2", "K'.3")
_F_NAMES = ("f.1", "f.2", "f'.2", "f'.3")


@dataclass(frozen=True)
class HypothesisCheck:
    name: str
    verdict: str  # "holds" | "fails" | "not_decidable"
    mode: str  # "analytic" | "numeric"
    witness: dict = field(default_factory=dict)


@dataclass(frozen=True)
class HypothesisReport:
    checks: tuple[HypothesisCheck, ...]

    def verdict(self, name: str) -> str:
        for c in self.checks:
            if c.name == name:
                return c.verdict
        raise KeyError(name)

    def witness(self, name: str) -> dict:
        for c in self.checks:
            if c.name == name:
                return c.witness
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {
            c.name: {"verdict": c.verdict, "mode": c.mode, "witness": c.witness}
            for c in self.checks
        }


def _signed_part_integral(deriv, sign: int, eps: float, r_cut: float) -> float:
    def integrand(r):
        d = deriv(r)
        return max(d, 0.0) if sign > 0 else max(-d, 0.0)

    val, _ = integrate.quad(integrand, eps, r_cut, limit=400)
    return val


def _quadrature_part(deriv, sign: int, r_cut: float = 1.0) -> tuple[str, dict]:
    """Integrate the positive or negative part of deriv on (0, r_cut].

    The lower cutoff eps is halved from 1e-8 until the integral moves by less
    than 1e-6 in absolute terms; divergence shows up as failure to settle.
    """
    eps = 1e-8
    prev = _signed_part_integral(deriv, sign, eps, r_cut)
    for _ in range(12):
        eps *= 0.5
        cur = _signed_part_integral(deriv, sign, eps, r_cut)
        if abs(cur - prev) < 1e-6 * max(1.0, abs(cur)):
            return "holds", {"integral": cur, "eps": eps}
        prev = cur
    return "fails", {"integral": prev, "eps": eps, "note": "did not settle"}


def _check_weight(params: ProblemParams, constants: DerivedConstants | None) -> list[HypothesisCheck]:
    K, l = params.K, params.l
    out: list[HypothesisCheck] = []

    def scaled(r):
        return r ** (-l) * K(r)

    def scaled_deriv(r):
        return -l * r ** (-l - 1.0) * K(r) + r ** (-l) * K.deriv(r)

    if isinstance(K, PowerProfile):
        match = K.exponent == l and K.coef > 0.0
        k0 = K.coef if match else None
        out.append(
            HypothesisCheck(
                "K.1",
                "holds" if match else "fails",
                "analytic",
                {"k_inf": K.coef if match else None, "d1": "inf" if match else None},
            )
        )
        out.append(HypothesisCheck("K.2", "holds" if match else "fails", "analytic", {"k0": k0}))
        out.append(
            HypothesisCheck(
                "K.3",
                "holds" if K.exponent <= l else "fails",
                "analytic",
                {"scaled_derivative_sign": float(np.sign(K.exponent - l))},
            )
        )
        pos = 0.0 if K.exponent <= l else K.coef  # integral of the positive part to r=1
        out.append(HypothesisCheck("K'.2", "holds", "analytic", {"integral": pos}))
        neg_ok = K.exponent >= l
        out.append(
            HypothesisCheck(
                "K'.3",
                "holds" if neg_ok else "fails",
                "analytic",
                {"integral": 0.0 if neg_ok else math.inf},
            )
        )
        return out

    if isinstance(K, PerturbedPowerProfile):
        match = K.exponent == l
        out.append(
            HypothesisCheck(
                "K.1", "fails", "analytic",
                {"note": "oscillatory remainder does not decay", "remainder_order": l},
            )
        )
        out.append(
            HypothesisCheck("K.2", "holds" if match else "fails", "analytic", {"k0": K.coef if match else None})
        )
        # sign changes of (r**-l K)' on a log grid decide K.3
        grid = np.logspace(-6, 1, 2000)
        signs = np.sign(scaled_deriv(grid))
        changes = np.nonzero(np.diff(signs))[0]
        holds = changes.size == 0 and signs.max() <= 0.0
        witness = {}
        if changes.size:
            witness["sign_change_near_r"] = float(grid[changes[0]])
        out.append(HypothesisCheck("K.3", "holds" if holds else "fails", "numeric", witness))
        for name, sgn in (("K'.2", +1), ("K'.3", -1)):
            verdict, w = _quadrature_part(scaled_deriv, sgn)
            out.append(HypothesisCheck(name, verdict, "numeric", w))
        return out

    for name in _K_NAMES:
        out.append(HypothesisCheck(name, "not_decidable", "analytic", {"note": "unrecognized family"}))
    return out


def _check_forcing(params: ProblemParams, constants: DerivedConstants | None) -> list[HypothesisCheck]:
    f = params.f
    out: list[HypothesisCheck] = []
    m = constants.m if constants else None
    lam2 = constants.lambda2 if constants else None
    q_threshold = None
    if constants is not None and lam2 is not None:
        q_threshold = constants.n - m - lam2

    def check_f2(q: float | None, extra: dict | None = None) -> HypothesisCheck:
        w = dict(extra or {})
        w["q"] = q
        w["threshold"] = q_threshold
        if q is None:
            return HypothesisCheck("f.2", "fails", "analytic", w)
        if q_threshold is None:
            return HypothesisCheck("f.2", "not_decidable", "analytic", w)
        return HypothesisCheck("f.2", "holds" if q > q_threshold else "fails", "analytic", w)

    if isinstance(f, PowerProfile):
        b, d = f.coef, -f.exponent
        if b == 0.0:
            out.append(HypothesisCheck("f.1", "holds", "analytic", {"b": 0.0, "d": None}))
            out.append(check_f2(math.inf, {"note": "zero forcing"}))
            out.append(HypothesisCheck("f'.2", "holds", "analytic", {"integral": 0.0}))
            out.append(HypothesisCheck("f'.3", "holds", "analytic", {"integral": 0.0}))
            return out
        if d <= 0.0:
            # bounded forcing: admissible with b = 0 at any small d
            f1 = "holds" if b > 0.0 else "fails"
            out.append(HypothesisCheck("f.1", f1, "analytic", {"b": 0.0, "d": None}))
        else:
            ok = b > 0.0 and (m is None or d <= m + 2.0 + 1e-12)
            verdict = "holds" if ok else "fails"
            if m is None and b > 0.0:
                verdict = "not_decidable"
            out.append(HypothesisCheck("f.1", verdict, "analytic", {"b": b, "d": d}))
        out.append(check_f2(d if d > 0 else -f.exponent))
        # r**d f is constant for the pure power: derivative vanishes
        out.append(HypothesisCheck("f'.2", "holds", "analytic", {"integral": 0.0}))
        out.append(HypothesisCheck("f'.3", "holds", "analytic", {"integral": 0.0}))
        return out

    if isinstance(f, PowerSumProfile):
        b, e0 = f.leading_at_zero()
        d = -e0
        ok = b > 0.0 and 0.0 < d and (m is None or d <= m + 2.0 + 1e-12)
        verdict = "holds" if ok else "fails"
        if m is None and b > 0.0 and d > 0.0:
            verdict = "not_decidable"
        out.append(HypothesisCheck("f.1", verdict, "analytic", {"b": b, "d": d}))
        _, e_inf = f.leading_at_inf()
        out.append(check_f2(-e_inf))

        def scaled_deriv(r):
            return sum(c * (d + e) * r ** (d + e - 1.0) for c, e in f.terms)

        # every non-leading term has e > -d, so d+e-1 > -1: integrable at 0
        integrable = all(d + e - 1.0 > -1.0 for c, e in f.terms if e != e0)
        if integrable:
            pos = _signed_part_integral(scaled_deriv, +1, 1e-10, 1.0)
            neg = _signed_part_integral(scaled_deriv, -1, 1e-10, 1.0)
            out.append(HypothesisCheck("f'.2", "holds", "analytic", {"integral": pos}))
            out.append(HypothesisCheck("f'.3", "holds", "analytic", {"integral": neg}))
        else:
            for name, sgn in (("f'.2", +1), ("f'.3", -1)):
                v, w = _quadrature_part(scaled_deriv, sgn)
                out.append(HypothesisCheck(name, v, "numeric", w))
        return out

    if isinstance(f, LogReferenceForcing):
        b, d = float(f.n - 2), 2.0
        ok = m is None or d <= m + 2.0 + 1e-12
        out.append(
            HypothesisCheck("f.1", "holds" if ok else "fails", "analytic", {"b": b, "d": d})
        )
        out.append(check_f2(None, {"note": "no decay at infinity; profile intended on (0,1)"}))

        def scaled_deriv(r):
            return 2.0 * r * f(r) + r * r * f.deriv(r)

        for name, sgn in (("f'.2", +1), ("f'.3", -1)):
            v, w = _quadrature_part(scaled_deriv, sgn)
            out.append(HypothesisCheck(name, v, "numeric", w))
        return out

    for name in _F_NAMES:
        out.append(HypothesisCheck(name, "not_decidable", "analytic", {"note": "unrecognized family"}))
    return out


def check_hypotheses(params: ProblemParams) -> HypothesisReport:
    """Decide the structural hypotheses on K and f for the built-in families.

    Pure powers are decided analytically; the perturbed family falls back to
    sampled sign checks and adaptive quadrature on (eps, 1] with eps halved
    until the integral settles. Unknown profile types yield not_decidable.
    """
    try:
        constants = derive_constants(params.n, params.l, params.p)
    except DegenerateExponents:
        constants = None
    checks = _check_weight(params, constants) + _check_forcing(params, constants)
    return HypothesisReport(tuple(checks))
