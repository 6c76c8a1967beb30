"""Eta and theta multiplier systems on explicit 2x2 integer matrices.

chi (the eta multiplier, weight 1/2 on the full modular group) and
nu_theta (weight 1/2 on Gamma_0(4)) are evaluated in exact exponent
arithmetic: chi(g) = e(k/24), nu_theta(g) = e(k/4), with the Kronecker
sign folded into the exponent.  Numerical checks (cocycle consistency,
transformation laws of eta and theta) live here as residual functions.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .arith import epsilon_exponent, kronecker
from .exactsum import MultiplierValue


class NotUnimodular(ValueError):
    """Matrix determinant is not 1."""


class NotInGamma0Of4(ValueError):
    """theta multiplier needs c = 0 (mod 4) and odd d."""


@dataclass(frozen=True)
class UnimodularMatrix:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise NotUnimodular(f"det != 1 for {(self.a, self.b, self.c, self.d)}")

    def __matmul__(self, other: "UnimodularMatrix") -> "UnimodularMatrix":
        return UnimodularMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __neg__(self) -> "UnimodularMatrix":
        return UnimodularMatrix(-self.a, -self.b, -self.c, -self.d)

    def apply(self, tau: complex) -> complex:
        return (self.a * tau + self.b) / (self.c * tau + self.d)


def eta_chi_exponent(a: int, b: int, c: int, d: int) -> int:
    """Exponent k with chi((a,b;c,d)) = e(k/24), exact mod 24.

    The c > 0 branches follow the closed formula with Kronecker symbol
    (d/c) for odd c and (c/d) for even c; the sign contributes 0 or 12.
    c < 0 is reduced through chi(g) = i*chi(-g); c = 0 is the
    translation case (with chi(-I) = -i folded in for d = -1).
    """
    if a * d - b * c != 1:
        raise NotUnimodular(f"det != 1 for {(a, b, c, d)}")
    if c == 0:
        return b % 24 if d == 1 else (-b - 6) % 24
    if c < 0:
        return (6 + eta_chi_exponent(-a, -b, -c, -d)) % 24
    cm, am, bm, dm = c % 24, a % 24, b % 24, d % 24
    if c % 2 == 1:
        t = (am + dm) * cm - bm * dm * ((cm * cm - 1) % 24) - 3 * cm
        sign = kronecker(d, c)
    else:
        t = (am + dm) * cm - bm * dm * ((cm * cm - 1) % 24) + 3 * dm - 3 - 3 * cm * dm
        sign = kronecker(c, d)
    e = t % 24
    if sign == -1:
        e = (e + 12) % 24
    return e


def eta_chi(g: UnimodularMatrix) -> MultiplierValue:
    """chi(g) as an exact 24th root of unity."""
    return MultiplierValue(24, eta_chi_exponent(g.a, g.b, g.c, g.d))


def theta_nu_exponent(a: int, b: int, c: int, d: int) -> int:
    """Exponent k with nu_theta((a,b;c,d)) = e(k/4) = (c/d) epsilon_d^{-1}."""
    if a * d - b * c != 1:
        raise NotUnimodular(f"det != 1 for {(a, b, c, d)}")
    if c % 4 != 0 or d % 2 == 0:
        raise NotInGamma0Of4(f"need 4 | c and odd d, got c={c}, d={d}")
    e = (-epsilon_exponent(d)) % 4
    if kronecker(c, d) == -1:
        e = (e + 2) % 4
    return e


def theta_nu(g: UnimodularMatrix) -> MultiplierValue:
    """nu_theta(g) as an exact fourth root of unity (value in {1,-1,i,-i})."""
    return MultiplierValue(4, theta_nu_exponent(g.a, g.b, g.c, g.d))


@dataclass(frozen=True)
class MultiplierSystem:
    """One of the three multiplier systems handled by this package.

    kind: "eta" (weight 1/2, alpha 23/24), "eta-conjugate" (weight -1/2,
    alpha 1/24), or "theta" (weight 1/2 on Gamma_0(4), alpha 0).
    """

    kind: str

    @property
    def weight(self) -> Fraction:
        return Fraction(-1, 2) if self.kind == "eta-conjugate" else Fraction(1, 2)

    @property
    def alpha(self) -> Fraction:
        return {"eta": Fraction(23, 24), "eta-conjugate": Fraction(1, 24), "theta": Fraction(0)}[
            self.kind
        ]

    def shifted_index(self, n: int) -> Fraction:
        """n_nu = n - alpha."""
        return Fraction(n) - self.alpha

    def __call__(self, g: UnimodularMatrix) -> complex:
        if self.kind == "eta":
            return eta_chi(g).value
        if self.kind == "eta-conjugate":
            return eta_chi(g).conjugate().value
        if self.kind == "theta":
            return theta_nu(g).value
        raise ValueError(f"unknown multiplier kind {self.kind!r}")


ETA = MultiplierSystem("eta")
ETA_CONJUGATE = MultiplierSystem("eta-conjugate")
THETA = MultiplierSystem("theta")


def _j_factor(g: UnimodularMatrix, z: complex) -> complex:
    w = g.c * z + g.d
    return w / abs(w)


def _unit_power(w: complex, k: float) -> complex:
    # principal branch, arg in (-pi, pi]
    return cmath.exp(1j * k * cmath.phase(w))


def cocycle_defect(
    nu: MultiplierSystem, g1: UnimodularMatrix, g2: UnimodularMatrix, tau: complex
) -> float:
    """|nu(g1 g2) j(g1 g2, tau)^k - nu(g1) nu(g2) j(g2, tau)^k j(g1, g2 tau)^k|.

    Zero (up to rounding) exactly when nu satisfies the weight-k
    consistency condition; k is the multiplier's weight and j is the
    unimodular automorphy factor.
    """
    k = float(nu.weight)
    g12 = g1 @ g2
    lhs = nu(g12) * _unit_power(_j_factor(g12, tau), k)
    rhs = (
        nu(g1)
        * nu(g2)
        * _unit_power(_j_factor(g2, tau), k)
        * _unit_power(_j_factor(g1, g2.apply(tau)), k)
    )
    return abs(lhs - rhs)


def _series_length(q_abs: float, tail: float = 1e-15) -> int:
    # geometric tail |q|^(N+1)/(1-|q|) < tail
    if q_abs >= 1.0:
        raise ValueError("need |q| < 1")
    n = math.log(tail * (1 - q_abs)) / math.log(q_abs)
    return max(8, int(n) + 2)


def eta_value(tau: complex, tail: float = 1e-15) -> complex:
    """Dedekind eta via its q-product, truncated so the dropped tail of
    the log-product is below `tail`."""
    q = cmath.exp(2j * cmath.pi * tau)
    n = _series_length(abs(q))
    qs = q ** np.arange(1, n + 1)
    return cmath.exp(2j * cmath.pi * tau / 24) * complex(np.prod(1.0 - qs))


def theta_value(tau: complex, tail: float = 1e-15) -> complex:
    """theta(tau) = sum over n of q^(n^2), truncated at the same tail scale."""
    q = cmath.exp(2j * cmath.pi * tau)
    qa = abs(q)
    n_max = max(4, int(math.sqrt(_series_length(qa))) + 2)
    ns = np.arange(1, n_max + 1)
    return 1.0 + 2.0 * complex(np.sum(q ** (ns * ns)))


def eta_transform_residual(g: UnimodularMatrix, tau: complex) -> float:
    """|eta(g tau) - chi(g) sqrt(c tau + d) eta(tau)| (principal sqrt)."""
    lhs = eta_value(g.apply(tau))
    rhs = eta_chi(g).value * cmath.sqrt(g.c * tau + g.d) * eta_value(tau)
    return abs(lhs - rhs)


def theta_transform_residual(g: UnimodularMatrix, tau: complex) -> float:
    """|theta(g tau) - nu_theta(g) sqrt(c tau + d) theta(tau)|."""
    lhs = theta_value(g.apply(tau))
    rhs = theta_nu(g).value * cmath.sqrt(g.c * tau + g.d) * theta_value(tau)
    return abs(lhs - rhs)


def random_sl2(rng, max_entry: int = 1000) -> UnimodularMatrix:
    """Random SL2(Z) matrix with |c|, |d| <= max_entry (c, d coprime)."""
    while True:
        c = int(rng.integers(-max_entry, max_entry + 1))
        d = int(rng.integers(-max_entry, max_entry + 1))
        if (c, d) == (0, 0) or math.gcd(c, d) != 1:
            continue
        # solve a*d - b*c = 1
        g, x, y = _xgcd(d, -c)
        a, b = x, y
        return UnimodularMatrix(a, b, c, d)


def random_gamma0(rng, level: int, max_entry: int = 1000) -> UnimodularMatrix:
    """Random element of Gamma_0(level) with |c|, |d| <= max_entry."""
    while True:
        c = level * int(rng.integers(-(max_entry // level), max_entry // level + 1))
        d = int(rng.integers(-max_entry, max_entry + 1))
        if (c, d) == (0, 0) or math.gcd(c, d) != 1:
            continue
        g, x, y = _xgcd(d, -c)
        return UnimodularMatrix(x, y, c, d)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    if old_r < 0:
        old_r, old_x, old_y = -old_r, -old_x, -old_y
    return old_r, old_x, old_y
