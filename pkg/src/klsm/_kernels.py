"""Numba kernels for bulk Kloosterman-sum evaluation.

One sweep over a c-range computes the sums for several (m, n) pairs at
once: the expensive per-c work (unit sieve, batched modular inverses,
Kronecker symbols, multiplier exponents) is shared, and only the cheap
exponential accumulation is per-pair.  Every c is processed by exactly
one thread with a fixed instruction sequence, so results are
bit-identical for any thread count.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

_TWO_PI = 2.0 * np.pi
_RESYNC = 4096  # steps between fresh sincos evaluations in phase recurrences


@njit(cache=True)
def _jacobi_odd(a, n):
    """Jacobi symbol (a/n) for odd n >= 1 and a >= 0."""
    a = a % n
    result = 1
    while a != 0:
        while a & 1 == 0:
            a >>= 1
            r = n & 7
            if r == 3 or r == 5:
                result = -result
        t = a
        a = n
        n = t
        if (a & 3) == 3 and (n & 3) == 3:
            result = -result
        a = a % n
    if n == 1:
        return result
    return 0


@njit(cache=True)
def _inverse_mod(a, c):
    """Inverse of a mod c for gcd(a, c) = 1, c >= 1."""
    if c == 1:
        return 0
    old_r, r = a % c, c
    old_x, x = 1, 0
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
    return old_x % c


@njit(cache=True)
def _chi_exp24(a, b, c, d):
    """Exponent k of the eta multiplier chi = e(k/24) for c > 0."""
    cm = c % 24
    am = a % 24
    bm = b % 24
    dm = d % 24
    if c & 1:
        t = (am + dm) * cm - bm * dm * ((cm * cm - 1) % 24) - 3 * cm
        s = _jacobi_odd(d, c)
    else:
        t = (am + dm) * cm - bm * dm * ((cm * cm - 1) % 24) + 3 * dm - 3 - 3 * cm * dm
        s = _jacobi_odd(c, d)
    e = t % 24
    if s == -1:
        e = (e + 12) % 24
    return e


@njit(cache=True)
def _units_and_inverses(c, spf):
    """Units mod c (ascending) and their inverses, via one batched
    modular inversion (prefix-product trick)."""
    is_unit = np.ones(c, np.uint8)
    is_unit[0] = 0
    n = c
    while n > 1:
        p = spf[n]
        for k in range(0, c, p):
            is_unit[k] = 0
        while n % p == 0:
            n //= p
    phi = 0
    for aa in range(1, c):
        phi += is_unit[aa]
    us = np.empty(phi, np.int64)
    pref = np.empty(phi, np.int64)
    k = 0
    run = 1
    for aa in range(1, c):
        if is_unit[aa]:
            us[k] = aa
            run = (run * aa) % c
            pref[k] = run
            k += 1
    ds = np.empty(phi, np.int64)
    suf = _inverse_mod(pref[phi - 1], c)
    for i in range(phi - 1, -1, -1):
        if i > 0:
            ds[i] = (suf * pref[i - 1]) % c
        else:
            ds[i] = suf % c
        suf = (suf * us[i]) % c
    return us, ds


@njit(cache=True)
def _phase_table(k, c, Q):
    """tab[d] = e(k*d/Q) for d in [0, c), by recurrence with resyncs."""
    tab = np.empty(c, np.complex128)
    step = np.exp(1j * (_TWO_PI * k / Q))
    w = 1.0 + 0.0j
    for dd in range(c):
        if dd % _RESYNC == 0:
            w = np.exp(1j * (_TWO_PI * ((k * dd) % Q) / Q))
        tab[dd] = w
        w = w * step
    return tab


@njit(cache=True)
def _eta_sums_at_c(c, Kms, Kns, conjs, spf, out, ci):
    """Fill out[:, ci] with the generalized Kloosterman sums at this c.

    Kms/Kns carry the shifted index factors (24m-23 for the eta kind,
    24m-1 for its conjugate); conjs selects which of chi-bar / chi
    multiplies each term.
    """
    npairs = Kms.shape[0]
    Q = 24 * c
    if c == 1:
        # single matrix (0, -1; 1, 0); chi has exponent 21, chi-bar 3
        for p in range(npairs):
            j = 21 if conjs[p] else 3
            ang = _TWO_PI * j / 24.0
            out[p, ci] = complex(np.cos(ang), np.sin(ang))
        return
    us, ds = _units_and_inverses(c, spf)
    phi = us.shape[0]

    vtab = np.empty((npairs, c), np.complex128)
    for p in range(npairs):
        vtab[p, :] = _phase_table(Kns[p] % Q, c, Q)

    kms = np.empty(npairs, np.int64)
    gap_pow = np.empty((npairs, 17), np.complex128)
    for p in range(npairs):
        km = Kms[p] % Q
        kms[p] = km
        gap_pow[p, 0] = 1.0 + 0.0j
        sa = np.exp(1j * (_TWO_PI * km / Q))
        for g in range(1, 17):
            gap_pow[p, g] = gap_pow[p, g - 1] * sa

    jtab = np.empty(24, np.complex128)
    for j in range(24):
        jtab[j] = np.exp(1j * (_TWO_PI * j / 24.0))

    accs = np.zeros(npairs, np.complex128)
    was = np.ones(npairs, np.complex128)
    prev_a = 0
    for i in range(phi):
        aa = us[i]
        dd = ds[i]
        gap = aa - prev_a
        resync = (i % _RESYNC == 0) or gap > 16
        if resync:
            for p in range(npairs):
                was[p] = np.exp(1j * (_TWO_PI * ((kms[p] * aa) % Q) / Q))
        else:
            for p in range(npairs):
                was[p] = was[p] * gap_pow[p, gap]
        prev_a = aa
        b = (aa * dd - 1) // c
        e = _chi_exp24(aa, b, c, dd)
        for p in range(npairs):
            j = e if conjs[p] else (24 - e) % 24
            accs[p] = accs[p] + jtab[j] * was[p] * vtab[p, dd]
    for p in range(npairs):
        out[p, ci] = accs[p]


@njit(cache=True, parallel=True)
def eta_sum_block(c_lo, c_hi, Kms, Kns, conjs, spf):
    """S values for each index pair over c in [c_lo, c_hi] (inclusive)."""
    ncs = c_hi - c_lo + 1
    out = np.empty((Kms.shape[0], ncs), np.complex128)
    for ci in prange(ncs):
        _eta_sums_at_c(c_lo + ci, Kms, Kns, conjs, spf, out, ci)
    return out


@njit(cache=True)
def _classical_sums_at_c(c, ms, ns, spf, out, ci):
    npairs = ms.shape[0]
    if c == 1:
        for p in range(npairs):
            out[p, ci] = 1.0 + 0.0j
        return
    us, ds = _units_and_inverses(c, spf)
    phi = us.shape[0]
    vtab = np.empty((npairs, c), np.complex128)
    for p in range(npairs):
        vtab[p, :] = _phase_table(ns[p] % c, c, c)
    mms = np.empty(npairs, np.int64)
    gap_pow = np.empty((npairs, 17), np.complex128)
    for p in range(npairs):
        mm = ms[p] % c
        mms[p] = mm
        gap_pow[p, 0] = 1.0 + 0.0j
        sa = np.exp(1j * (_TWO_PI * mm / c))
        for g in range(1, 17):
            gap_pow[p, g] = gap_pow[p, g - 1] * sa
    accs = np.zeros(npairs, np.complex128)
    was = np.ones(npairs, np.complex128)
    prev_a = 0
    for i in range(phi):
        aa = us[i]
        dd = ds[i]
        gap = aa - prev_a
        resync = (i % _RESYNC == 0) or gap > 16
        if resync:
            for p in range(npairs):
                was[p] = np.exp(1j * (_TWO_PI * ((mms[p] * aa) % c) / c))
        else:
            for p in range(npairs):
                was[p] = was[p] * gap_pow[p, gap]
        prev_a = aa
        for p in range(npairs):
            accs[p] = accs[p] + was[p] * vtab[p, dd]
    for p in range(npairs):
        out[p, ci] = accs[p]


@njit(cache=True, parallel=True)
def classical_sum_block(c_lo, c_hi, ms, ns, spf):
    ncs = c_hi - c_lo + 1
    out = np.empty((ms.shape[0], ncs), np.complex128)
    for ci in prange(ncs):
        _classical_sums_at_c(c_lo + ci, ms, ns, spf, out, ci)
    return out
