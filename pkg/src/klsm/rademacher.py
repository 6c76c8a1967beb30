"""Dedekind sums, the Rademacher sums A_c(n), exact p(n), and the
truncated Rademacher series for the partition function.

This is the end-to-end validation path: the A_c(n) are (up to a fixed
eighth root of unity) the c = 1 family of generalized Kloosterman sums,
and the truncated series must round to the exact p(n) computed by
Euler's pentagonal recurrence.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .special import bessel_I


class NotCoprime(ValueError):
    """Dedekind sums need gcd(d, c) = 1."""


def dedekind_sum(d: int, c: int) -> Fraction:
    """s(d, c) = sum of ((k/c))((kd/c)), by the O(log c) reciprocity
    recursion in exact rationals."""
    if c < 1:
        raise ValueError(f"need c >= 1, got {c}")
    if math.gcd(d, c) != 1:
        raise NotCoprime(f"gcd({d}, {c}) != 1")
    d %= c
    if c == 1:
        return Fraction(0)
    # s(d,c) + s(c,d) = -1/4 + (d^2 + c^2 + 1)/(12 c d); s(c,d) = s(c mod d, d)
    s = Fraction(0)
    sign = 1
    while d:
        s += sign * (Fraction(-1, 4) + Fraction(d * d + c * c + 1, 12 * c * d))
        c, d = d, c % d
        sign = -sign
    return s


def dedekind_sum_direct(d: int, c: int) -> Fraction:
    """O(c) sawtooth-sum oracle for s(d, c)."""
    if math.gcd(d, c) != 1:
        raise NotCoprime(f"gcd({d}, {c}) != 1")

    def saw(num: int, den: int) -> Fraction:
        if num % den == 0:
            return Fraction(0)
        return Fraction(num % den, den) - Fraction(1, 2)

    return sum((saw(k, c) * saw(k * d, c) for k in range(1, c)), Fraction(0))


@lru_cache(maxsize=4096)
def _ac_phase_table(c: int) -> tuple:
    """(d, e^(pi i s(d, c))) over units d mod c, cached per c."""
    if c == 1:
        return ((0, 1.0 + 0j),)
    out = []
    for d in range(1, c):
        if math.gcd(d, c) == 1:
            s = dedekind_sum(d, c)
            out.append((d, cmath.exp(1j * math.pi * float(s))))
    return tuple(out)


def rademacher_Ac(n: int, c: int) -> float:
    """A_c(n) = sum over units d mod c of e^(pi i s(d,c)) e(-n d / c).

    Real-valued; an imaginary part above 1e-9 raises.
    """
    if c < 1:
        raise ValueError(f"need c >= 1, got {c}")
    acc = 0j
    for d, w in _ac_phase_table(c):
        acc += w * cmath.exp(-2j * math.pi * n * d / c)
    if abs(acc.imag) > 1e-9:
        raise ArithmeticError(f"A_{c}({n}) came out non-real: {acc}")
    return acc.real


def rademacher_Ac_complex(n: int, c: int) -> complex:
    """A_c(n) without the realness assertion (for cross-oracles)."""
    acc = 0j
    for d, w in _ac_phase_table(c):
        acc += w * cmath.exp(-2j * math.pi * n * d / c)
    return acc


_partition_memo = [1]


def partition_exact(n: int) -> int:
    """p(n) by Euler's pentagonal recurrence, exact."""
    if n < 0:
        raise ValueError(f"need n >= 0, got {n}")
    memo = _partition_memo
    while len(memo) <= n:
        m = len(memo)
        total = 0
        k = 1
        while True:
            g1 = k * (3 * k - 1) // 2
            g2 = k * (3 * k + 1) // 2
            if g1 > m:
                break
            sign = 1 if k % 2 == 1 else -1  # (-1)^(k+1)
            total += sign * memo[m - g1]
            if g2 <= m:
                total += sign * memo[m - g2]
            k += 1
        memo.append(total)
    return memo[n]


@dataclass(frozen=True)
class PartitionResult:
    n: int
    exact: int
    estimate: float
    terms_used: int
    residual: float

    @property
    def rounds_correctly(self) -> bool:
        return self.residual < 0.5


def partition_rademacher(n: int, N: int) -> PartitionResult:
    """Truncated Rademacher series
    (2 pi / (24n-1)^(3/4)) sum_{c<=N} A_c(n)/c * I_{3/2}(pi sqrt(24n-1)/(6c)),
    with the residual measured against the exact recurrence."""
    if n < 1 or N < 1:
        raise ValueError("need n >= 1 and N >= 1")
    mu = math.sqrt(24.0 * n - 1.0)
    acc = 0.0
    for c in range(1, N + 1):
        ac = rademacher_Ac(n, c)
        if ac == 0.0:
            continue
        acc += (ac / c) * bessel_I(1.5, math.pi * mu / (6.0 * c))
    est = 2.0 * math.pi * (24.0 * n - 1.0) ** (-0.75) * acc
    exact = partition_exact(n)
    return PartitionResult(n, exact, est, N, abs(est - exact))
