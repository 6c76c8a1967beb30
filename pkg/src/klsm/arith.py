"""Integer kernel: gcds, modular inverses, Kronecker symbols, divisor
counts, square-free decompositions, pentagonal membership, epsilon_d.

Everything here is exact integer (or small dataclass) arithmetic; all
functions are pure and safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class NotInvertible(ValueError):
    """No inverse exists for the given residue/modulus pair."""


class EvenInput(ValueError):
    """An odd integer was required."""


def gcd(a: int, b: int) -> int:
    """Greatest common divisor, non-negative; gcd(0, 0) = 0 by convention."""
    return math.gcd(a, b)


def mod_inverse(a: int, c: int) -> int:
    """Inverse of a modulo c, in [0, c).  For c = 1 returns 0."""
    if c < 1:
        raise ValueError(f"modulus must be positive, got {c}")
    if c == 1:
        return 0
    try:
        return pow(a, -1, c)
    except ValueError:
        raise NotInvertible(f"{a} is not invertible mod {c}") from None


def kronecker(a: int, n: int) -> int:
    """Extended Kronecker symbol (a/n) for arbitrary integers.

    Conventions: (a/0) = 1 iff a = +-1 else 0; (a/-1) = -1 iff a < 0;
    (a/2) = 0 for even a and +-1 by a mod 8 otherwise.  Fully
    multiplicative in both arguments on coprime supports.
    """
    if n == 0:
        return 1 if a in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -1
    # strip the even part of n
    t = 0
    while n % 2 == 0:
        n //= 2
        t += 1
    if t:
        if a % 2 == 0:
            return 0
        if t % 2 == 1 and a % 8 in (3, 5):
            result = -result
    # binary Jacobi loop for odd n >= 1
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


@dataclass(frozen=True)
class EpsilonD:
    """Sign factor for odd d: 1 when d = 1 (mod 4), i when d = 3 (mod 4)."""

    d: int
    exponent: int  # e(exponent/4)

    @property
    def value(self) -> complex:
        return 1j ** self.exponent


def epsilon(d: int) -> EpsilonD:
    """epsilon_d as an exact fourth root of unity; raises on even d."""
    if d % 2 == 0:
        raise EvenInput(f"epsilon is defined for odd d only, got {d}")
    return EpsilonD(d, 0 if d % 4 == 1 else 1)


def epsilon_exponent(d: int) -> int:
    """Exponent k with epsilon_d = e(k/4); d must be odd."""
    if d % 2 == 0:
        raise EvenInput(f"epsilon is defined for odd d only, got {d}")
    return 0 if d % 4 == 1 else 1


def factorize(n: int) -> dict[int, int]:
    """Prime factorization by trial division; fine for n up to ~10^12."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 5
    while f * f <= n:
        for p in (f, f + 2):
            while n % p == 0:
                out[p] = out.get(p, 0) + 1
                n //= p
        f += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def divisor_count(c: int) -> int:
    """tau(c), the number of divisors of c >= 1."""
    if c < 1:
        raise ValueError(f"need c >= 1, got {c}")
    t = 1
    for e in factorize(c).values():
        t *= e + 1
    return t


def divisors(n: int) -> list[int]:
    """All positive divisors of n, ascending."""
    ds = [1]
    for p, e in factorize(n).items():
        ds = [d * p**k for d in ds for k in range(e + 1)]
    return sorted(ds)


@dataclass(frozen=True)
class SquarefreeDecomposition:
    """N = root**2 * core with core square-free and root maximal."""

    N: int
    root: int
    core: int


def squarefree_decompose(N: int) -> SquarefreeDecomposition:
    """Split N >= 1 as root^2 * core with core square-free.

    Trial division up to N^(1/3), then a square test on the cofactor;
    the cofactor has no cube factor left, so it is either square-free,
    a prime square, or a prime times a square-free part.
    """
    if N < 1:
        raise ValueError(f"need N >= 1, got {N}")
    root, core = 1, 1
    n = N
    p = 2
    while p * p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            root *= p ** (e // 2)
            if e % 2:
                core *= p
        p += 1 if p == 2 else 2
    # n has at most two prime factors now
    if n > 1:
        s = math.isqrt(n)
        if s * s == n:
            root *= s
        else:
            # n = p*q (p != q) or prime: square-free either way unless
            # one factor already divides core (impossible: primes > N^(1/3))
            core *= n
    return SquarefreeDecomposition(N, root, core)


def is_generalized_pentagonal(v: int) -> bool:
    """True iff v = k(3k +- 1)/2 for some integer k (v >= 0)."""
    if v < 0:
        raise ValueError(f"need v >= 0, got {v}")
    # k(3k+-1)/2 = v  <=>  24v + 1 = (6k +- 1)^2
    m = 24 * v + 1
    s = math.isqrt(m)
    return s * s == m and s % 6 in (1, 5)
