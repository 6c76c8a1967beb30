"""Coefficient-level Hecke and Shimura machinery.

q-expansions are held as CoefficientSeries: a table n -> a(n) over
1..N, an index offset (0 for integer exponents, 23/24 for the eta
family, where index n stands for the exponent n - 23/24), and
weight/character metadata.  Half-integral-weight series keep exact
integer/rational values; the weight-0 side (which involves sqrt
factors) works in doubles.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .arith import factorize, kronecker

ETA_OFFSET = Fraction(23, 24)


class BadOffset(ValueError):
    """Operation requires a specific index offset."""


class NotInvertible(ValueError):
    """No Dirichlet inverse: the value at 1 is not a unit."""


@dataclass
class CoefficientSeries:
    """Arithmetic function n -> a(n) on 1..length with expansion metadata."""

    offset: Fraction
    coeffs: list  # index 0 unused
    weight: Fraction | None = None
    character: str = ""

    def __post_init__(self):
        if self.offset not in (Fraction(0), ETA_OFFSET):
            raise BadOffset(f"offset must be 0 or 23/24, got {self.offset}")

    @property
    def length(self) -> int:
        return len(self.coeffs) - 1

    def a(self, n: int):
        """a(n); zero outside 1..length is NOT assumed - reading past the
        truncation raises."""
        if not 1 <= n <= self.length:
            raise IndexError(f"index {n} outside 1..{self.length}")
        return self.coeffs[n]

    def __eq__(self, other):
        return (
            isinstance(other, CoefficientSeries)
            and self.offset == other.offset
            and self.coeffs[1:] == other.coeffs[1:]
        )


def eta_qexp(N: int) -> CoefficientSeries:
    """q-expansion of eta in the shifted basis: coefficient at index n
    multiplies the exponent n - 23/24; nonzero (value +-1) exactly when
    n-1 is a generalized pentagonal number."""
    if N < 1:
        raise ValueError("need N >= 1")
    co = [0] * (N + 1)
    k = 0
    while True:
        g1 = k * (3 * k - 1) // 2
        g2 = k * (3 * k + 1) // 2
        if g1 > N - 1 and g2 > N - 1 and k > 0:
            break
        s = -1 if k % 2 else 1
        if g1 <= N - 1:
            co[g1 + 1] = s
        if g2 <= N - 1:
            co[g2 + 1] = s
        k += 1
    return CoefficientSeries(ETA_OFFSET, co, weight=Fraction(1, 2), character="eta")


def _poly_mul_trunc(a: list, b: list, n: int) -> list:
    """First n coefficients of the product of integer polynomials, via
    Kronecker substitution (pack into one big integer, multiply, unpack)."""
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        return [0] * n
    max_a = max(1, max(abs(v) for v in a))
    max_b = max(1, max(abs(v) for v in b))
    bound = min(la, lb) * max_a * max_b
    limb = (bound.bit_length() + 2 + 7) // 8 * 8  # byte-aligned limbs
    base = 1 << limb
    half = base >> 1
    ea = 0
    for i in reversed(range(la)):
        ea = (ea << limb) + a[i]
    eb = 0
    for i in reversed(range(lb)):
        eb = (eb << limb) + b[i]
    prod = ea * eb
    count = min(n, la + lb - 1)
    # bias each limb by base/2 so the evaluation is digit-aligned
    bias = sum(half << (limb * i) for i in range(count + 1))
    prod += bias
    if prod < 0:
        raise ArithmeticError("kronecker packing underflow")
    nbytes = limb // 8
    buf = prod.to_bytes((prod.bit_length() + 7) // 8 + nbytes, "little")
    out = [0] * n
    carry = 0
    for i in range(count):
        d = int.from_bytes(buf[i * nbytes : (i + 1) * nbytes], "little") + carry
        coeff = d - half
        if coeff >= half:  # borrow propagated from the bias addition
            coeff -= base
            carry = 1
        else:
            carry = 0
        out[i] = coeff
    return out


def eta_power_qexp(power: int, N: int) -> list:
    """Coefficients of prod (1 - q^m)^power up to q^(N-1), exact."""
    base = [0] * N
    k = 0
    while True:
        g1 = k * (3 * k - 1) // 2
        g2 = k * (3 * k + 1) // 2
        if g1 >= N and g2 >= N and k > 0:
            break
        s = -1 if k % 2 else 1
        if g1 < N:
            base[g1] += s
        if g2 < N and g2 != g1:
            base[g2] += s
        k += 1
    result = None
    sq = base
    p = power
    while p:
        if p & 1:
            result = sq if result is None else _poly_mul_trunc(result, sq, N)
        p >>= 1
        if p:
            sq = _poly_mul_trunc(sq, sq, N)
    return result if result is not None else [1] + [0] * (N - 1)


def eta_delta_series(N: int) -> CoefficientSeries:
    """eta * Delta = eta^25, the canonical weight-25/2 cusp form for the
    eta multiplier; a(n) is the q^(n-2) coefficient of prod(1-q^m)^25."""
    f = eta_power_qexp(25, max(N - 1, 1))
    co = [0] * (N + 1)
    for n in range(2, N + 1):
        co[n] = f[n - 2]
    return CoefficientSeries(ETA_OFFSET, co, weight=Fraction(25, 2), character="eta")


def dilate_L(f: CoefficientSeries) -> CoefficientSeries:
    """Index dilation tau -> 24 tau: input coefficient at n lands at
    24n - 23; all other outputs vanish.  Offset 23/24 -> 0."""
    if f.offset != ETA_OFFSET:
        raise BadOffset("dilation applies to offset-23/24 series")
    N = f.length
    out = [0] * (24 * N - 23 + 1)
    for n in range(1, N + 1):
        out[24 * n - 23] = f.coeffs[n]
    return CoefficientSeries(Fraction(0), out, weight=f.weight, character=f.character + "*chi12-theta")


class MultiplicativeFunction:
    """Multiplicative function given by its prime-power values."""

    def __init__(self, prime_power, name: str = ""):
        self._pp = prime_power
        self._memo: dict[int, object] = {1: 1}
        self.name = name

    def __call__(self, n: int):
        if n < 1:
            raise ValueError("multiplicative functions are indexed by n >= 1")
        v = self._memo.get(n)
        if v is None:
            v = 1
            for p, e in factorize(n).items():
                v *= self._pp(p, e)
            self._memo[n] = v
        return v

    def values(self, N: int) -> list:
        return [0] + [self(n) for n in range(1, N + 1)]


def character(label: str) -> MultiplicativeFunction:
    """Real Dirichlet characters used here: "trivial" and "chi12"."""
    if label == "trivial":
        return MultiplicativeFunction(lambda p, e: 1, "trivial")
    if label == "chi12":
        return MultiplicativeFunction(lambda p, e: kronecker(12, p) ** e, "chi12")
    raise ValueError(f"unknown character label {label!r}")


def holomorphic_weight_factor(l: int, t: int) -> MultiplicativeFunction:
    """h(u) = u^(2l-1) * (12t/u), the Dirichlet factor whose inverse
    unwinds the holomorphic lift."""
    return MultiplicativeFunction(
        lambda p, e: (p ** (e * (2 * l - 1))) * (kronecker(12 * t, p) ** e), f"h[l={l},t={t}]"
    )


def maass_weight_factor(t: int) -> MultiplicativeFunction:
    """h(u) = u^(-1) * (t/u) on the weight-0 side (double precision)."""
    return MultiplicativeFunction(lambda p, e: (kronecker(t, p) ** e) / p**e, f"h[t={t}]")


def dirichlet_convolve(f, g, N: int) -> list:
    """(f*g)(n) = sum over d | n of f(d) g(n/d), for 1 <= n <= N.

    f, g: sequences indexed from 1 (index 0 ignored) or callables.
    """
    fv = f.values(N) if hasattr(f, "values") else (list(f) if not callable(f) else [0] + [f(i) for i in range(1, N + 1)])
    gv = g.values(N) if hasattr(g, "values") else (list(g) if not callable(g) else [0] + [g(i) for i in range(1, N + 1)])
    out = [0] * (N + 1)
    for d in range(1, N + 1):
        fd = fv[d]
        if fd == 0:
            continue
        for m in range(d, N + 1, d):
            out[m] += fd * gv[m // d]
    return out


def dirichlet_inverse(h, N: int) -> list:
    """Inverse of h under Dirichlet convolution, h * h^-1 = delta_1."""
    hv = h.values(N) if hasattr(h, "values") else (list(h) if not callable(h) else [0] + [h(i) for i in range(1, N + 1)])
    if hv[1] != 1:
        raise NotInvertible(f"h(1) = {hv[1]} != 1")
    inv = [0] * (N + 1)
    inv[1] = 1
    for n in range(2, N + 1):
        s = 0
        for d in range(1, n):
            if n % d == 0:
                s += hv[n // d] * inv[d]
        inv[n] = -s
    return inv


def _psi_star(psi, p: int, k: int):
    """psi*(p) = psi(p) * (-1/p)^k."""
    return psi(p) * (kronecker(-1, p) ** k)


def hecke_Tp2_half(f: CoefficientSeries, p: int, k: int, psi) -> CoefficientSeries:
    """T_{p^2} on a half-integral-weight series.

    For offset 0:  out(n) = a(p^2 n) + psi*(p)(n/p) p^(k-1) a(n)
                            + psi(p^2) p^(2k-1) a(n/p^2).
    For offset 23/24 the same action is expressed through the dilated
    index M = 24n - 23: the symbol reads (M/p) and the first/last terms
    shift by multiples of (p^2-1)/24 (an integer since p is prime to 6),
    which is exactly what makes the operator commute with dilation.
    """
    if p < 5 or p % 2 == 0 or p % 3 == 0 or len(factorize(p)) != 1 or factorize(p)[p] != 1:
        raise ValueError(f"need a prime p coprime to 6, got {p}")
    N = f.length
    M_out = N // (p * p)
    if M_out < 1:
        raise ValueError(f"series too short ({N}) for p^2 = {p * p}")
    psi_p = psi(p)
    psi_p2 = psi(p * p)
    star = _psi_star(psi, p, k)
    co = [0] * (M_out + 1)
    if f.offset == Fraction(0):
        for n in range(1, M_out + 1):
            v = f.coeffs[p * p * n] + star * kronecker(n, p) * p ** (k - 1) * f.coeffs[n]
            if n % (p * p) == 0:
                v += psi_p2 * p ** (2 * k - 1) * f.coeffs[n // (p * p)]
            co[n] = v
    else:
        shift = 23 * (p * p - 1) // 24
        for n in range(1, M_out + 1):
            M = 24 * n - 23
            v = f.coeffs[p * p * n - shift]
            v += star * kronecker(M, p) * p ** (k - 1) * f.coeffs[n]
            if M % (p * p) == 0:
                v += psi_p2 * p ** (2 * k - 1) * f.coeffs[(M // (p * p) + 23) // 24]
            co[n] = v
    return CoefficientSeries(f.offset, co, weight=f.weight, character=f.character)


def hecke_Tp_weight0(rho: list, p: int) -> list:
    """Weight-0 Hecke action on a coefficient sequence:
    out(n) = sqrt(p) rho(pn) + rho(n/p)/sqrt(p)."""
    N = len(rho) - 1
    M = N // p
    sq = math.sqrt(p)
    out = [0.0] * (M + 1)
    for n in range(1, M + 1):
        v = sq * rho[p * n]
        if n % p == 0:
            v += rho[n // p] / sq
        out[n] = v
    return out


def hecke_Tn_weight0(rho: list, n: int) -> list:
    """Composite weight-0 Hecke operator via
    T_{p^(a+1)} = T_p T_{p^a} - T_{p^(a-1)} and multiplicativity."""
    if n < 1:
        raise ValueError("need n >= 1")
    out = list(rho)
    for p, e in factorize(n).items():
        out = _hecke_p_power_weight0(out, p, e)
    return out


def _hecke_p_power_weight0(rho: list, p: int, e: int) -> list:
    if e == 0:
        return list(rho)
    prev = list(rho)  # T_{p^0}
    cur = hecke_Tp_weight0(rho, p)  # T_{p^1}
    for _ in range(e - 1):
        nxt = hecke_Tp_weight0(cur, p)
        # lengths: trim prev to match
        keep = len(nxt) - 1
        nxt = [0.0] + [nxt[i] - prev[i] for i in range(1, keep + 1)]
        prev, cur = cur, nxt
    return cur


def shimura_holo(a: CoefficientSeries, t: int, k: int, psi_t, N: int) -> list:
    """Holomorphic lift coefficients: b_t(n) = sum over u | n of
    psi_t(u) u^(k-1) a(t (n/u)^2); requires a defined at t n^2, n <= N."""
    if t * N * N > a.length:
        raise ValueError(f"series too short: need index {t * N * N}, have {a.length}")
    gv = [0] + [a.coeffs[t * m * m] for m in range(1, N + 1)]
    hv = [0] + [psi_t(u) * u ** (k - 1) for u in range(1, N + 1)]
    return dirichlet_convolve(hv, gv, N)


def shimura_maass(a, t: int, N: int) -> tuple[list, list, list]:
    """Weight-0 lift from the Maass normalization: with
    g(u) = a(t u^2) sqrt(u) (12/u) and h(u) = (t/u)/u,  b_t = g * h.

    a: callable on positive integers (values at t u^2 are read).
    Returns (b, g, h) as index-1 sequences of floats.
    """
    if t % 24 != 1 or t < 1:
        raise ValueError(f"need square-free t = 1 (mod 24), got {t}")
    g = [0.0] + [a(t * u * u) * math.sqrt(u) * kronecker(12, u) for u in range(1, N + 1)]
    h = maass_weight_factor(t).values(N)
    b = dirichlet_convolve(g, h, N)
    return b, g, h


# ---------------------------------------------------------------------------
# CSV import/export: columns n, value (ints or "p/q" rationals)
# ---------------------------------------------------------------------------


def series_to_csv(s: CoefficientSeries, f) -> None:
    w = csv.writer(f)
    w.writerow(["n", "value"])
    for n in range(1, s.length + 1):
        v = s.coeffs[n]
        if isinstance(v, Fraction):
            text = str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
        elif isinstance(v, float):
            text = repr(v)
        else:
            text = str(v)
        w.writerow([n, text])


def series_from_csv(f, offset=Fraction(0)) -> CoefficientSeries:
    rd = csv.reader(f)
    header = next(rd)
    if header[:2] != ["n", "value"]:
        raise ValueError(f"unexpected header {header}")
    vals: dict[int, object] = {}
    for row in rd:
        if not row:
            continue
        n = int(row[0])
        text = row[1]
        if "/" in text:
            num, den = text.split("/")
            vals[n] = Fraction(int(num), int(den))
        elif "." in text or "e" in text or "E" in text:
            vals[n] = float(text)
        else:
            vals[n] = int(text)
    N = max(vals) if vals else 0
    co = [0] * (N + 1)
    for n, v in vals.items():
        co[n] = v
    return CoefficientSeries(offset, co)
