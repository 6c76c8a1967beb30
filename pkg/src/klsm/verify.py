"""Self-check suites behind the `verify` CLI subcommand.

Each suite runs a module's invariants at smoke scale (the pytest
acceptance suite runs the full-scale versions) and reports the measured
extremal value next to its threshold.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import arith, hecke, kloosterman, multiplier, rademacher, special

DEFAULT_SEED = 20821


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    extremal: float
    threshold: str


def _check(suite, name, passed, extremal, threshold) -> CheckResult:
    return CheckResult(suite, name, bool(passed), float(extremal), threshold)


def run_arith(seed: int = DEFAULT_SEED) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    worst = 0
    for _ in range(4000):
        a, b, n = (int(v) for v in rng.integers(-200, 201, size=3))
        bad = arith.kronecker(a, n) * arith.kronecker(b, n) != arith.kronecker(a * b, n)
        worst += bad
    out.append(_check("arith", "kronecker multiplicative (top)", worst == 0, worst, "0 failures"))
    worst = 0
    for N in range(1, 20001):
        dec = arith.squarefree_decompose(N)
        c = dec.core
        ok = dec.root**2 * c == N and all(c % (p * p) for p in range(2, int(math.isqrt(c)) + 1))
        worst += not ok
    out.append(_check("arith", "squarefree round-trip", worst == 0, worst, "0 failures"))
    worst = 0
    for c in range(1, 500):
        for a in range(c):
            if math.gcd(a, c) == 1:
                inv = arith.mod_inverse(a, c)
                if c > 1 and arith.mod_inverse(inv, c) != a % c:
                    worst += 1
    out.append(_check("arith", "mod_inverse involution", worst == 0, worst, "0 failures"))
    brute = {
        (abs(k) * (3 * abs(k) - 1) // 2) if k >= 0 else (abs(k) * (3 * abs(k) + 1) // 2)
        for k in range(-30, 31)
    }
    got = {v for v in range(1001) if arith.is_generalized_pentagonal(v)}
    want = {v for v in brute if v <= 1000}
    out.append(
        _check("arith", "pentagonal set vs enumeration", got == want, len(got ^ want), "sets equal")
    )
    return out


def run_multiplier(seed: int = DEFAULT_SEED, pairs: int = 2000) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    worst = 0.0
    tau = 1j
    for _ in range(pairs):
        g1 = multiplier.random_sl2(rng, 1000)
        g2 = multiplier.random_sl2(rng, 1000)
        worst = max(worst, multiplier.cocycle_defect(multiplier.ETA, g1, g2, tau))
    out.append(_check("multiplier", "eta cocycle defect", worst <= 1e-10, worst, "<= 1e-10"))
    worst = 0.0
    tau = 1 + 2j
    for _ in range(pairs):
        g1 = multiplier.random_gamma0(rng, 4, 1000)
        g2 = multiplier.random_gamma0(rng, 4, 1000)
        worst = max(worst, multiplier.cocycle_defect(multiplier.THETA, g1, g2, tau))
    out.append(_check("multiplier", "theta cocycle defect", worst <= 1e-10, worst, "<= 1e-10"))
    worst = 0.0
    for _ in range(50):
        g = multiplier.random_sl2(rng, 50)
        worst = max(worst, multiplier.eta_transform_residual(g, 1j))
    out.append(_check("multiplier", "eta transformation residual", worst <= 1e-10, worst, "<= 1e-10"))
    worst = 0.0
    for _ in range(50):
        g = multiplier.random_gamma0(rng, 4, 50)
        worst = max(worst, multiplier.theta_transform_residual(g, 1j))
    out.append(
        _check("multiplier", "theta transformation residual", worst <= 1e-10, worst, "<= 1e-10")
    )
    bad = sum(
        1
        for b in range(-100, 101)
        if multiplier.eta_chi(multiplier.UnimodularMatrix(1, b, 0, 1)).exponent != b % 24
    )
    out.append(_check("multiplier", "chi on translations", bad == 0, bad, "exact"))
    bad = 0
    for n in range(-100, 101):
        lhs = multiplier.ETA_CONJUGATE.shifted_index(n)
        rhs = -(multiplier.ETA.shifted_index(1 - n))
        bad += lhs != rhs
    out.append(_check("multiplier", "conjugate index law", bad == 0, bad, "exact"))
    return out


def run_kloosterman(
    seed: int = DEFAULT_SEED, cache_dir: str | None = None
) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    # optimized vs brute force, smoke scale
    worst = 0
    for c in list(range(1, 40)):
        for m, n in [(1, 1), (4, -3)]:
            opt = kloosterman.eta_sum(m, n, c)
            brute = _brute_eta_sum(m, n, c)
            worst += opt != brute
    out.append(_check("kloosterman", "optimized = brute multisets", worst == 0, worst, "exact"))
    # conjugation identity
    worst = 0
    for c in range(1, 80):
        for _ in range(3):
            m, n = (int(v) for v in rng.integers(-200, 201, size=2))
            lhs = kloosterman.eta_sum(m, n, c).conjugate()
            rhs = kloosterman.eta_sum(1 - m, 1 - n, c, kind="eta-conjugate")
            worst += lhs != rhs
    out.append(_check("kloosterman", "conjugation identity", worst == 0, worst, "exact"))
    # periodicity
    worst = 0
    for c in range(1, 40):
        m, n = (int(v) for v in rng.integers(-50, 51, size=2))
        worst += kloosterman.eta_sum(m + c, n, c) != kloosterman.eta_sum(m, n, c)
        worst += kloosterman.eta_sum(m, n + c, c) != kloosterman.eta_sum(m, n, c)
    out.append(_check("kloosterman", "periodicity in m, n", worst == 0, worst, "exact"))
    # classical Weil bound
    ratios = kloosterman.weil_ratios_block([(1, 1), (2, 3)], 500, "classical")
    worst = float(ratios.max())
    out.append(_check("kloosterman", "classical Weil ratio", worst <= 1.0 + 1e-9, worst, "<= 1"))
    # eta-kind empirical Weil-shaped ratio
    ratios = kloosterman.weil_ratios_block([(1, 1), (3, -2)], 500, "eta")
    worst = float(ratios.max())
    out.append(_check("kloosterman", "eta Weil-shaped ratio", worst <= 1.0 + 1e-9, worst, "<= 1"))
    # determinism across thread counts
    cps = kloosterman.log_checkpoints(10, 2000, 8)
    blobs = set()
    for th in (1, 4, 8):
        s = kloosterman.partial_sum(2, 3, 2000, cps, threads=th)
        blobs.add(s.checkpoint_bytes())
    out.append(
        _check("kloosterman", "thread-count determinism", len(blobs) == 1, len(blobs), "1 blob")
    )
    # cache integrity
    if cache_dir is not None:
        try:
            n_checked = 0
            for name in sorted(os.listdir(cache_dir)):
                if name.endswith(".bin"):
                    kloosterman.verify_cache(os.path.join(cache_dir, name))
                    n_checked += 1
            out.append(_check("kloosterman", "cache bit-exact reload", True, n_checked, "all files"))
        except kloosterman.CacheCorrupt as e:
            out.append(_check("kloosterman", f"cache bit-exact reload ({e})", False, e.c or -1, "exact"))
    return out


def _brute_eta_sum(m: int, n: int, c: int):
    """Independent oracle: enumerate all (a, d) in [0, c)^2 with
    ad = 1 (mod c), build the matrix, ask the multiplier module for
    chi, and collect exact exponents."""
    from .exactsum import ExactExponentialSum

    Q = 24 * c
    exps = []
    for a in range(c):
        for d in range(c):
            if (a * d - 1) % c == 0:
                b = (a * d - 1) // c
                e = multiplier.eta_chi_exponent(a, b, c, d)
                j = (-e) % 24
                exps.append((j * c + (24 * m - 23) * a + (24 * n - 23) * d) % Q)
    return ExactExponentialSum.from_exponents(Q, exps)


def run_transforms(seed: int = DEFAULT_SEED) -> list[CheckResult]:
    out = []
    p = special.TestFunctionParams(a=10.0, x=100.0, T=21.0)
    # plateau/support exactness
    pl = p.plateau
    sup = p.support
    ok = (
        p.phi(np.array([(pl[0] + pl[1]) / 2]))[0] == 1.0
        and p.phi(np.array([sup[0] * 0.9]))[0] == 0.0
        and p.phi(np.array([sup[1] * 1.1]))[0] == 0.0
    )
    out.append(_check("transforms", "bump plateau/support exact", ok, 0 if ok else 1, "exact"))
    # derivative bound
    ts = np.linspace(sup[0], sup[1], 20001)
    dphi = np.gradient(p.phi(ts), ts)
    bound = 10.0 * p.x**2 / (p.a * p.T)
    worst = float(np.max(np.abs(dphi)))
    out.append(_check("transforms", "bump derivative bound", worst <= bound, worst, f"<= {bound:.3g}"))
    # Laplace-transform oracle at r = 2
    tv = special.transform_check(
        p, 2.0, weight=lambda y: y * np.exp(-y), bounds=(0.0, 60.0), tol=1e-12
    )
    target = (math.sqrt(2) - 1.0) / math.sqrt(2)
    err = abs(tv.value - target)
    out.append(_check("transforms", "J-kernel Laplace oracle", err <= 1e-8, err, "<= 1e-8"))
    # K_0 integral oracle
    tv = special.transform_Phi(p, 0.0, weight=lambda y: y, bounds=(1e-12, 60.0), tol=1e-12)
    err = abs(tv.value - math.pi / 2)
    out.append(_check("transforms", "K-kernel integral oracle", err <= 1e-8, err, "<= 1e-8"))
    # hat-form vs con-form agreement
    worst = 0.0
    for r in (0.5, 1.0, 2.0, 5.0, 10.0, 50.0):
        va = special.transform_hat(p, r, form="con").value
        vb = special.transform_hat(p, r, form="hat").value
        worst = max(worst, abs(va - vb))
    out.append(_check("transforms", "hat/con kernel agreement", worst <= 1e-10, worst, "<= 1e-10"))
    # quadrature halving
    f = lambda ys: np.sin(3 * ys) * np.exp(-ys)
    _, e0 = special.integrate(f, 0.0, 3.0, tol=np.inf, level=0)
    _, e1 = special.integrate(f, 0.0, 3.0, tol=np.inf, level=1)
    ok = e1 <= e0 / 2
    out.append(_check("transforms", "refinement halves error", ok, e1 / max(e0, 1e-300), "<= 0.5"))
    return out


def run_hecke(seed: int = DEFAULT_SEED) -> list[CheckResult]:
    out = []
    ed = hecke.eta_delta_series(2000)
    chi12 = hecke.character("chi12")
    Lf = hecke.dilate_L(ed)
    p = 5
    lhs = hecke.dilate_L(hecke.hecke_Tp2_half(ed, p, 12, chi12))
    rhs = hecke.hecke_Tp2_half(Lf, p, 12, chi12)
    n_cmp = min(lhs.length, rhs.length)
    bad = sum(1 for i in range(1, n_cmp + 1) if lhs.coeffs[i] != rhs.coeffs[i])
    out.append(_check("hecke", "dilation commutes with T_25 (p=5)", bad == 0, bad, "exact"))
    # h * h^-1 = delta, holomorphic factor
    h = hecke.holomorphic_weight_factor(1, 1)
    hv = h.values(1000)
    hinv = hecke.dirichlet_inverse(h, 1000)
    conv = hecke.dirichlet_convolve(hv, hinv, 1000)
    bad = (conv[1] != 1) + sum(1 for n in range(2, 1001) if conv[n] != 0)
    out.append(_check("hecke", "h * h^-1 = delta (exact)", bad == 0, bad, "exact"))
    worst = max(abs(hinv[u]) / u ** (2 * 1 - 1) for u in range(1, 1001))
    out.append(_check("hecke", "|h^-1(u)| <= u^(2l-1)", worst <= 1.0, worst, "<= 1"))
    # weight-0 synthetic eigenvector
    N = 500
    rho = [0.0] + [arith.divisor_count(n) / math.sqrt(n) for n in range(1, N + 1)]
    t5 = hecke.hecke_Tp_weight0(rho, 5)
    worst = max(abs(t5[n] - 2.0 * rho[n]) for n in range(1, len(t5)))
    out.append(_check("hecke", "divisor sequence is an eigenvector", worst <= 1e-9, worst, "<= 1e-9"))
    return out


def run_rademacher(seed: int = DEFAULT_SEED, n_max: int = 200) -> list[CheckResult]:
    out = []
    bad = 0
    worst_resid = 0.0
    for n in range(1, n_max + 1):
        N = math.ceil(3 * math.sqrt(n))
        res = rademacher.partition_rademacher(n, N)
        worst_resid = max(worst_resid, res.residual)
        if round(res.estimate) != res.exact:
            bad += 1
    out.append(
        _check("rademacher", f"series rounds to p(n), n <= {n_max}", bad == 0, worst_resid, "< 0.5")
    )
    worst = 0.0
    for c in range(1, 120):
        for n in (1, 7, 19):
            worst = max(worst, abs(rademacher.rademacher_Ac_complex(n, c).imag))
    out.append(_check("rademacher", "A_c(n) real", worst <= 1e-10, worst, "<= 1e-10"))
    bad = 0
    for c in range(1, 150):
        for d in range(c):
            if math.gcd(d, c) == 1:
                if rademacher.dedekind_sum(d, c) != rademacher.dedekind_sum_direct(d, c):
                    bad += 1
    out.append(_check("rademacher", "dedekind recursion = direct", bad == 0, bad, "exact"))
    return out


SUITES = {
    "arith": run_arith,
    "multiplier": run_multiplier,
    "kloosterman": run_kloosterman,
    "transforms": run_transforms,
    "hecke": run_hecke,
    "rademacher": run_rademacher,
}


class UnknownSuite(ValueError):
    pass


def run_suite(name: str, seed: int = DEFAULT_SEED, cache_dir=None) -> list[CheckResult]:
    if name == "all":
        out = []
        for key in SUITES:
            out.extend(run_suite(key, seed, cache_dir))
        return out
    if name not in SUITES:
        raise UnknownSuite(f"unknown suite {name!r}; choose from {sorted(SUITES)} or 'all'")
    if name == "kloosterman":
        return SUITES[name](seed, cache_dir)
    return SUITES[name](seed)
