"""Kloosterman sums (classical, eta-multiplier, conjugate, twisted) and
their weighted partial sums over the modulus c.

Exact values are ExactExponentialSum multisets (modulus c, 24c or 8c);
bulk numeric evaluation goes through the numba kernels in _kernels,
with a deterministic reduction contract: terms are computed by a pure
parallel map indexed by c, then combined in ascending c order with
compensated summation, so checkpoint values are bit-identical for any
worker count.
"""

from __future__ import annotations

import csv
import io
import math
import os
import struct
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .arith import divisor_count, kronecker
from .exactsum import ExactExponentialSum
from .multiplier import eta_chi_exponent

KINDS = ("classical", "eta", "eta-conjugate", "twisted")
_KIND_CODE = {k: i for i, k in enumerate(KINDS)}

#: exact multisets are cached only up to this c (24c-entry arrays grow linearly)
EXACT_C_CAP = 1000

CACHE_MAGIC = b"KLSM"
CACHE_VERSION = 1


class BadModulus(ValueError):
    """Twisted sums need 4 | c."""


class CacheCorrupt(ValueError):
    """A cache record disagrees with recomputation (offending c attached)."""

    def __init__(self, msg, c=None):
        super().__init__(msg)
        self.c = c


@dataclass(frozen=True)
class KloostermanQuery:
    m: int
    n: int
    c: int
    kind: str = "eta"
    character: str = "trivial"  # for kind="twisted"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.c < 1:
            raise ValueError(f"need c >= 1, got {self.c}")
        if self.kind == "twisted":
            if self.c % 4:
                raise BadModulus(f"twisted sums need 4 | c, got c={self.c}")
            if self.character == "chi12" and self.c % 576:
                raise BadModulus(f"chi12-twisted sums need 576 | c, got c={self.c}")


# ---------------------------------------------------------------------------
# smallest-prime-factor sieve shared with the kernels
# ---------------------------------------------------------------------------

_spf_cache: dict[str, np.ndarray] = {}


def _spf_table(limit: int) -> np.ndarray:
    tab = _spf_cache.get("tab")
    if tab is None or len(tab) <= limit:
        size = max(limit + 1, 1 << 10)
        tab = np.zeros(size, dtype=np.int64)
        for p in range(2, size):
            if tab[p] == 0:
                sl = tab[p::p]
                sl[sl == 0] = p
        tab[1] = 1
        _spf_cache["tab"] = tab
    return tab


# ---------------------------------------------------------------------------
# exact sums
# ---------------------------------------------------------------------------


def _units(c: int) -> list[int]:
    if c == 1:
        return [0]
    return [a for a in range(1, c) if math.gcd(a, c) == 1]


@lru_cache(maxsize=512)
def _eta_matrix_data(c: int):
    """Per-c matrix data (a, d, chi-exponent) shared by all (m, n)."""
    if c == 1:
        return np.array([0]), np.array([0]), np.array([21])
    gas, gds, ges = [], [], []
    for a in _units(c):
        d = pow(a, -1, c)
        b = (a * d - 1) // c
        gas.append(a)
        gds.append(d)
        ges.append(eta_chi_exponent(a, b, c, d))
    return np.array(gas, dtype=np.int64), np.array(gds, dtype=np.int64), np.array(ges, dtype=np.int64)


def classical_sum(m: int, n: int, c: int) -> ExactExponentialSum:
    """S(m, n, c) = sum over units d of e((m d + n d^-1)/c), modulus c."""
    if c < 1:
        raise ValueError(f"need c >= 1, got {c}")
    exps = []
    for d in _units(c):
        dinv = pow(d, -1, c) if c > 1 else 0
        exps.append((m * d + n * dinv) % c)
    return ExactExponentialSum.from_exponents(c, exps)


def _index_factors(m: int, n: int, kind: str) -> tuple[int, int]:
    if kind == "eta":
        return 24 * m - 23, 24 * n - 23
    if kind == "eta-conjugate":
        return 24 * m - 1, 24 * n - 1
    raise ValueError(kind)


def eta_sum(m: int, n: int, c: int, kind: str = "eta") -> ExactExponentialSum:
    """Generalized Kloosterman sum for the eta multiplier, exact, Q = 24c.

    Each matrix (a, b; c, d) with 0 <= a, d < c and ad = 1 (mod c)
    contributes one 24c-th root of unity with exponent
    j*c + (24m-23)*a + (24n-23)*d, where chi-bar = e(j/24).
    The "eta-conjugate" kind uses chi itself and index factor 24n-1.
    """
    if c < 1:
        raise ValueError(f"need c >= 1, got {c}")
    Km, Kn = _index_factors(m, n, kind)
    Q = 24 * c
    gas, gds, ges = _eta_matrix_data(c)
    js = ges if kind == "eta-conjugate" else (-ges) % 24
    exps = (js * c + (Km % Q) * gas + (Kn % Q) * gds) % Q
    return ExactExponentialSum.from_exponents(Q, exps)


def twisted_sum(psi: str, m: int, n: int, c: int) -> ExactExponentialSum:
    """Theta-weighted twisted sum: sum over units d of
    epsilon_d (c/d) Psi(d) e((m d + n d^-1)/c); needs 4 | c; Q = 8c."""
    if c % 4:
        raise BadModulus(f"need 4 | c, got c={c}")
    if psi not in ("trivial", "chi12"):
        raise ValueError(f"unknown character label {psi!r}")
    Q = 8 * c
    exps = []
    for d in _units(c):
        if psi == "chi12":
            ps = kronecker(12, d)
            if ps == 0:
                continue
        else:
            ps = 1
        dinv = pow(d, -1, c)
        e8 = 0 if d % 4 == 1 else 2  # epsilon_d = e(0/8) or e(2/8)
        if kronecker(c, d) == -1:
            e8 += 4
        if ps == -1:
            e8 += 4
        exps.append((e8 * c + 8 * (m * d + n * dinv)) % Q)
    return ExactExponentialSum.from_exponents(Q, exps)


def kloosterman_exact(q: KloostermanQuery) -> ExactExponentialSum:
    if q.kind == "classical":
        return classical_sum(q.m, q.n, q.c)
    if q.kind == "twisted":
        return twisted_sum(q.character, q.m, q.n, q.c)
    return eta_sum(q.m, q.n, q.c, q.kind)


# ---------------------------------------------------------------------------
# bulk numeric evaluation
# ---------------------------------------------------------------------------


def set_threads(threads: int | None) -> int:
    """Clamp and apply a numba thread count; returns the value used."""
    import numba

    if threads is None:
        return numba.get_num_threads()
    threads = max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(threads)
    return threads


def sum_values_block(
    pairs: list[tuple[int, int]],
    c_lo: int,
    c_hi: int,
    kind: str = "eta",
    threads: int | None = None,
) -> np.ndarray:
    """S(m, n, c) for each pair and c in [c_lo, c_hi]; shape (npairs, nc).

    All pairs are swept in a single pass so the per-c enumeration work
    is shared.
    """
    if c_lo < 1 or c_hi < c_lo:
        raise ValueError(f"bad c range [{c_lo}, {c_hi}]")
    set_threads(threads)
    spf = _spf_table(c_hi)
    if kind == "classical":
        ms = np.array([p[0] for p in pairs], dtype=np.int64)
        ns = np.array([p[1] for p in pairs], dtype=np.int64)
        return _kernels.classical_sum_block(c_lo, c_hi, ms, ns, spf)
    if kind in ("eta", "eta-conjugate"):
        kms, kns = [], []
        for m, n in pairs:
            km, kn = _index_factors(m, n, kind)
            kms.append(km)
            kns.append(kn)
        conj = np.full(len(pairs), kind == "eta-conjugate", dtype=np.bool_)
        return _kernels.eta_sum_block(
            c_lo, c_hi, np.array(kms, dtype=np.int64), np.array(kns, dtype=np.int64), conj, spf
        )
    raise ValueError(f"bulk evaluation not supported for kind {kind!r}")


def sum_value(m: int, n: int, c: int, kind: str = "eta") -> complex:
    """Single numeric S(m, n, c) via the kernel path."""
    return complex(sum_values_block([(m, n)], c, c, kind)[0, 0])


def weil_ratio(m: int, n: int, c: int, kind: str = "classical") -> float:
    """|S| / (tau(c) gcd(M, N, c)^(1/2) c^(1/2)) with the kind's index pair."""
    if kind == "classical":
        M, N = m, n
        s = abs(sum_value(m, n, c, "classical"))
    elif kind in ("eta", "eta-conjugate"):
        M, N = _index_factors(m, n, kind)
        s = abs(sum_value(m, n, c, kind))
    elif kind == "twisted":
        M, N = m, n
        s = abs(twisted_sum("chi12", m, n, c).evaluate())
    else:
        raise ValueError(kind)
    g = math.gcd(math.gcd(abs(M), abs(N)), c)
    return s / (divisor_count(c) * math.sqrt(g) * math.sqrt(c))


def weil_ratios_block(
    pairs: list[tuple[int, int]], c_max: int, kind: str, threads: int | None = None
) -> np.ndarray:
    """Max-over-c profile: ratios array of shape (npairs, c_max)."""
    vals = sum_values_block(pairs, 1, c_max, kind, threads)
    cs = np.arange(1, c_max + 1)
    taus = np.array([divisor_count(int(c)) for c in cs], dtype=np.float64)
    out = np.empty_like(vals, dtype=np.float64)
    for i, (m, n) in enumerate(pairs):
        M, N = (m, n) if kind == "classical" else _index_factors(m, n, kind)
        g0 = math.gcd(abs(M), abs(N))
        gs = np.array([math.gcd(g0, int(c)) for c in cs], dtype=np.float64)
        out[i] = np.abs(vals[i]) / (taus * np.sqrt(gs) * np.sqrt(cs))
    return out


# ---------------------------------------------------------------------------
# compensated partial sums with checkpoints
# ---------------------------------------------------------------------------


def _kahan_add(s: float, comp: float, x: float) -> tuple[float, float]:
    y = x - comp
    t = s + y
    comp = (t - s) - y
    return t, comp


@dataclass
class PartialSumSeries:
    """Checkpointed accumulation of sum_{c <= x_i} S(m, n, c, chi)/c."""

    m: int
    n: int
    kind: str
    checkpoints: np.ndarray  # ascending x_i
    values: np.ndarray  # complex, per checkpoint
    compensation: np.ndarray  # complex Kahan residual state per checkpoint
    terms: np.ndarray  # number of c summed per checkpoint

    def checkpoint_bytes(self) -> bytes:
        """Canonical little-endian encoding, used for determinism checks."""
        out = [struct.pack("<q", len(self.checkpoints))]
        for x, v, comp, t in zip(self.checkpoints, self.values, self.compensation, self.terms):
            out.append(
                struct.pack("<ddddd", float(x), v.real, v.imag, comp.real, comp.imag)
                + struct.pack("<q", int(t))
            )
        return b"".join(out)

    def to_csv(self, f) -> None:
        w = csv.writer(f)
        w.writerow(["x", "re", "im", "abs", "terms"])
        for x, v, t in zip(self.checkpoints, self.values, self.terms):
            w.writerow([repr(float(x)), repr(v.real), repr(v.imag), repr(abs(v)), int(t)])

    def to_rows(self) -> list[dict]:
        return [
            {"x": float(x), "re": v.real, "im": v.imag, "abs": abs(v), "terms": int(t)}
            for x, v, t in zip(self.checkpoints, self.values, self.terms)
        ]


def log_checkpoints(x_min: float, x_max: float, count: int) -> np.ndarray:
    if count < 2:
        raise ValueError("need at least 2 checkpoints")
    return np.geomspace(x_min, x_max, count)


def dyadic_checkpoints(x_min: float, x_max: float) -> np.ndarray:
    pts = []
    x = x_min
    while x <= x_max:
        pts.append(x)
        x *= 2.0
    if not pts or pts[-1] < x_max:
        pts.append(x_max)
    return np.array(pts)


def _term_values(
    m: int, n: int, c_lo: int, c_hi: int, kind: str, threads, cache_dir
) -> np.ndarray:
    """S(m, n, c) for c in [c_lo, c_hi], via the cache when available."""
    if cache_dir is None:
        return sum_values_block([(m, n)], c_lo, c_hi, kind, threads)[0]
    path = cache_path(cache_dir, m, n, kind)
    cached = load_cache(path) if os.path.exists(path) else np.empty(0, np.complex128)
    if len(cached) < c_hi:
        fresh = sum_values_block([(m, n)], len(cached) + 1, c_hi, kind, threads)[0]
        cached = np.concatenate([cached, fresh])
        save_cache(path, m, n, kind, cached)
    return cached[c_lo - 1 : c_hi]


def partial_sum(
    m: int,
    n: int,
    x_max: float,
    checkpoints=None,
    kind: str = "eta",
    threads: int | None = None,
    cache_dir: str | None = None,
) -> PartialSumSeries:
    """sum_{c <= x} S(m, n, c, chi)/c at the requested checkpoints.

    Terms are computed by a parallel map over c; the reduction is a
    single sequential compensated pass in ascending c, so the result is
    identical for every thread count.
    """
    C = int(math.floor(x_max))
    if checkpoints is None:
        checkpoints = np.array([x_max])
    cps = np.asarray(sorted(float(x) for x in checkpoints))
    if C < 1:
        z = np.zeros(len(cps), dtype=np.complex128)
        return PartialSumSeries(m, n, kind, cps, z, z.copy(), np.zeros(len(cps), dtype=np.int64))
    svals = _term_values(m, n, 1, C, kind, threads, cache_dir)
    vals = np.empty(len(cps), dtype=np.complex128)
    comps = np.empty(len(cps), dtype=np.complex128)
    terms = np.empty(len(cps), dtype=np.int64)
    sr = si = cr = ci_ = 0.0
    idx = 0
    for c in range(1, C + 1):
        while idx < len(cps) and cps[idx] < c:
            vals[idx] = complex(sr, si)
            comps[idx] = complex(cr, ci_)
            terms[idx] = c - 1
            idx += 1
        t = svals[c - 1] / c
        sr, cr = _kahan_add(sr, cr, t.real)
        si, ci_ = _kahan_add(si, ci_, t.imag)
    while idx < len(cps):
        vals[idx] = complex(sr, si)
        comps[idx] = complex(cr, ci_)
        terms[idx] = C
        idx += 1
    return PartialSumSeries(m, n, kind, cps, vals, comps, terms)


def windowed_sum(m: int, n: int, x: float, kind: str = "eta", threads=None) -> complex:
    """sum over x <= c <= 2x of S(m, n, c, chi)/c."""
    c_lo = int(math.ceil(x))
    c_hi = int(math.floor(2 * x))
    if c_hi < c_lo or c_hi < 1:
        return 0j
    c_lo = max(c_lo, 1)
    svals = sum_values_block([(m, n)], c_lo, c_hi, kind, threads)[0]
    sr = si = cr = ci_ = 0.0
    for i, c in enumerate(range(c_lo, c_hi + 1)):
        t = svals[i] / c
        sr, cr = _kahan_add(sr, cr, t.real)
        si, ci_ = _kahan_add(si, ci_, t.imag)
    return complex(sr, si)


def smoothed_sum(m: int, n: int, params, kind: str = "eta", threads=None) -> complex:
    """sum over c of S(m, n, c, chi)/c * phi(a/c) for the bump phi.

    phi's support pins the c-window to (x - T, 2x + 2T); outside it the
    weight vanishes exactly, so the sum is finite.
    """
    c_lo = max(1, int(math.ceil(params.x - params.T)))
    c_hi = int(math.floor(2 * params.x + 2 * params.T))
    if c_hi < c_lo:
        return 0j
    svals = sum_values_block([(m, n)], c_lo, c_hi, kind, threads)[0]
    cs = np.arange(c_lo, c_hi + 1, dtype=np.float64)
    wts = params.phi(params.a / cs)
    sr = si = cr = ci_ = 0.0
    for i, c in enumerate(range(c_lo, c_hi + 1)):
        if wts[i] == 0.0:
            continue
        t = svals[i] * (wts[i] / c)
        sr, cr = _kahan_add(sr, cr, t.real)
        si, ci_ = _kahan_add(si, ci_, t.imag)
    return complex(sr, si)


def shifted_index_scale(m: int, n: int) -> float:
    """a = 4 pi sqrt(|m - 23/24| * |n - 23/24|), the natural bump scale."""
    mt = m - 23.0 / 24.0
    nt = n - 23.0 / 24.0
    return 4.0 * math.pi * math.sqrt(abs(mt) * abs(nt))


# ---------------------------------------------------------------------------
# binary cache: magic "KLSM", version u16, m i64, n i64, kind u8,
# then records (c u64, re f64, im f64) in ascending c
# ---------------------------------------------------------------------------


def cache_path(cache_dir: str, m: int, n: int, kind: str) -> str:
    return os.path.join(cache_dir, f"klsm_{kind}_m{m}_n{n}.bin")


def save_cache(path: str, m: int, n: int, kind: str, values: np.ndarray) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "wb") as f:
        f.write(CACHE_MAGIC)
        f.write(struct.pack("<HqqB", CACHE_VERSION, m, n, _KIND_CODE[kind]))
        for i, v in enumerate(values):
            f.write(struct.pack("<Qdd", i + 1, v.real, v.imag))


def load_cache(path: str) -> np.ndarray:
    """Bit-exact reload of the cached S values (index c-1)."""
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:4] != CACHE_MAGIC:
        raise CacheCorrupt(f"{path}: bad magic")
    ver, m, n, kindcode = struct.unpack_from("<HqqB", blob, 4)
    if ver != CACHE_VERSION:
        raise CacheCorrupt(f"{path}: unsupported version {ver}")
    off = 4 + 19
    rec = struct.calcsize("<Qdd")
    count = (len(blob) - off) // rec
    out = np.empty(count, dtype=np.complex128)
    prev_c = 0
    for i in range(count):
        c, re, im = struct.unpack_from("<Qdd", blob, off + i * rec)
        if c != prev_c + 1:
            raise CacheCorrupt(f"{path}: non-contiguous record at c={c}", c=c)
        prev_c = c
        out[i] = complex(re, im)
    return out


def cache_header(path: str) -> tuple[int, int, str]:
    with open(path, "rb") as f:
        head = f.read(4 + 19)
    if head[:4] != CACHE_MAGIC:
        raise CacheCorrupt(f"{path}: bad magic")
    ver, m, n, kindcode = struct.unpack_from("<HqqB", head, 4)
    return m, n, KINDS[kindcode]


def verify_cache(path: str, limit: int | None = None, threads=None) -> None:
    """Recompute every cached record and require bit-exact agreement.

    Raises CacheCorrupt naming the first offending c.
    """
    m, n, kind = cache_header(path)
    vals = load_cache(path)
    hi = len(vals) if limit is None else min(limit, len(vals))
    if hi == 0:
        return
    fresh = sum_values_block([(m, n)], 1, hi, kind, threads)[0]
    for i in range(hi):
        if vals[i] != fresh[i]:
            raise CacheCorrupt(
                f"{path}: record c={i + 1} disagrees with recomputation "
                f"(cached {vals[i]}, got {fresh[i]})",
                c=i + 1,
            )


# ---------------------------------------------------------------------------
# slope fitting for cancellation scans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    r_squared: float
    window: tuple[float, float]


def fit_exponent(series: PartialSumSeries, upper_half: bool = True) -> ExponentFit:
    """Least squares of log10 |value| against log10 x, with |value|
    floored at 1e-15; by default only the upper half of the checkpoints
    is used, to dodge small-x transients."""
    xs = np.asarray(series.checkpoints, dtype=float)
    ys = np.maximum(np.abs(series.values), 1e-15)
    if upper_half:
        k = len(xs) // 2
        xs, ys = xs[k:], ys[k:]
    if len(xs) < 2:
        raise ValueError("need at least 2 checkpoints to fit")
    lx, ly = np.log10(xs), np.log10(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - (np.sum(resid**2) / ss_tot if ss_tot > 0 else 0.0)
    return ExponentFit(float(slope), float(intercept), float(r2), (float(xs[0]), float(xs[-1])))
