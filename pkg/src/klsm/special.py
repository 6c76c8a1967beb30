"""Special functions, the smooth test bump phi_{a,x,T}, and its three
Bessel-kernel integral transforms with Gauss-Kronrod quadrature.

Stability notes.  The same-sign transform needs J of pure imaginary
order 2ir; we work with the scaled kernel e^(-pi r) J_{2ir}(y), whose
power series has O(1) coefficients for every r (the 1/Gamma factor is
folded in through log-gamma).  The mixed-sign transform needs
cosh(pi r) K_{2ir}(y); for y below the turning point the scaled
I-Bessel series is used, above it the cosh-integral representation,
and mpmath at boosted precision covers the (rare) region where both
double-precision routes lose too many digits.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import mpmath
import numpy as np
import scipy.special as sc


class PoleAtNonPositiveInteger(ValueError):
    """Gamma evaluated at a pole."""


class InadmissibleParams(ValueError):
    """Test-function parameters violate the shape constraints."""


class QuadratureFailure(RuntimeError):
    """Adaptive refinement stalled above the requested tolerance."""


# ---------------------------------------------------------------------------
# Gauss-Kronrod 15/7 panels (QUADPACK abscissae)
# ---------------------------------------------------------------------------

_XGK = np.array(
    [
        0.9914553711208126,
        0.9491079123427585,
        0.8648644233597691,
        0.7415311855993944,
        0.5860872354676911,
        0.4058451513773972,
        0.2077849550078985,
    ]
)
_WGK = np.array(
    [
        0.0229353220105292,
        0.0630920926299786,
        0.1047900103222502,
        0.1406532597155259,
        0.1690047266392679,
        0.1903505780647854,
        0.2044329400752989,
    ]
)
_WGK0 = 0.2094821410847278
_WG = np.array([0.1294849661688697, 0.2797053914892767, 0.3818300505051189])
_WG0 = 0.4179591836734694

_NODES = np.concatenate([-_XGK, [0.0], _XGK[::-1]])
_WK = np.concatenate([_WGK, [_WGK0], _WGK[::-1]])
_WGAUSS = np.zeros(15)
_WGAUSS[[1, 3, 5]] = _WG
_WGAUSS[7] = _WG0
_WGAUSS[[9, 11, 13]] = _WG[::-1]


def _gk15_vec(f, lefts: np.ndarray, rights: np.ndarray):
    """Kronrod-15 values and |K15 - G7| error estimates per panel."""
    mids = 0.5 * (lefts + rights)
    halfs = 0.5 * (rights - lefts)
    ys = mids[:, None] + halfs[:, None] * _NODES[None, :]
    fv = np.asarray(f(ys.ravel()), dtype=np.complex128).reshape(ys.shape)
    ik = (fv * _WK).sum(axis=1) * halfs
    ig = (fv * _WGAUSS).sum(axis=1) * halfs
    return ik, np.abs(ik - ig)


def integrate(
    f,
    lo: float,
    hi: float,
    *,
    edges=(),
    tol: float = 1e-12,
    max_width: float | None = None,
    level: int = 0,
    max_panels: int = 262144,
):
    """Adaptive composite GK15 of a vectorized integrand on [lo, hi].

    Initial panels split at `edges` (plus a `max_width` cap for
    oscillatory kernels); panels with the largest error estimates are
    bisected until the summed estimate is below tol.  Panel results are
    combined in ascending-interval order, so the value is independent
    of evaluation scheduling.  `level` adds uniform dyadic refinement
    before adaptivity (used by convergence sanity checks).
    """
    if hi <= lo:
        return 0.0 + 0.0j, 0.0
    pts = [lo] + sorted(p for p in set(edges) if lo < p < hi) + [hi]
    seg_l, seg_r = [], []
    for left, right in zip(pts, pts[1:]):
        n = 1
        if max_width is not None and max_width > 0:
            n = max(1, int(math.ceil((right - left) / max_width)))
        n *= 1 << level
        w = (right - left) / n
        for i in range(n):
            seg_l.append(left + i * w)
            seg_r.append(left + (i + 1) * w)
    lefts = np.array(seg_l)
    rights = np.array(seg_r)
    vals, errs = _gk15_vec(f, lefts, rights)
    rounds = 0
    while errs.sum() > tol and rounds < 48 and len(lefts) < max_panels:
        cut = max(tol / (2.0 * len(lefts)), errs.max() / 16.0)
        split = errs >= cut
        if not split.any():
            break
        mid = 0.5 * (lefts[split] + rights[split])
        new_l = np.concatenate([lefts[split], mid])
        new_r = np.concatenate([mid, rights[split]])
        new_v, new_e = _gk15_vec(f, new_l, new_r)
        lefts = np.concatenate([lefts[~split], new_l])
        rights = np.concatenate([rights[~split], new_r])
        vals = np.concatenate([vals[~split], new_v])
        errs = np.concatenate([errs[~split], new_e])
        rounds += 1
    err = float(errs.sum())
    if len(lefts) >= max_panels and err > 1e3 * tol:
        raise QuadratureFailure(f"refinement stalled: error {err:.3e} > tol {tol:.3e}")
    order = np.argsort(lefts, kind="stable")
    return complex(vals[order].sum()), err


# ---------------------------------------------------------------------------
# gamma and Bessel functions
# ---------------------------------------------------------------------------


def gamma_complex(z):
    """Gamma(z); raises at non-positive integer poles."""
    zc = complex(z)
    if zc.imag == 0.0 and zc.real <= 0.0 and zc.real == round(zc.real):
        raise PoleAtNonPositiveInteger(f"gamma pole at {z}")
    if isinstance(z, (int, float)):
        return float(sc.gamma(float(z)))
    return complex(sc.gamma(zc))


def bessel_J(nu: float, y):
    """J_nu(y) for real order nu >= -1/2."""
    return sc.jv(nu, y)


def bessel_I(nu: float, y: float) -> float:
    """I_nu(y); order 3/2 uses the closed form
    sqrt(2/(pi y)) (cosh y - sinh y / y)."""
    if y <= 0:
        raise ValueError(f"need y > 0, got {y}")
    if nu == 1.5:
        return math.sqrt(2.0 / (math.pi * y)) * (math.cosh(y) - math.sinh(y) / y)
    return float(sc.iv(nu, y))


def _j2ir_scaled_vec(r: float, ys: np.ndarray) -> np.ndarray:
    """exp(-pi |r|) * J_{2ir}(ys) by the power series with log-gamma
    coefficients; reliable for max(ys) <= ~12 (cancellation grows like
    e^y beyond)."""
    ys = np.asarray(ys, dtype=np.float64)
    if r == 0.0:
        return sc.j0(ys).astype(np.complex128)
    ymax = float(ys.max())
    z = ys * ys / 4.0
    zmax = ymax * ymax / 4.0
    kmax = int(ymax / 2 + 24 + 6 * math.sqrt(max(ymax, 1.0)))
    ks = np.arange(kmax + 1)
    logc = -math.pi * abs(r) - sc.gammaln(ks + 1.0) - sc.loggamma(1.0 + 2j * r + ks)
    coeffs = np.exp(logc) * np.where(ks % 2 == 0, 1.0, -1.0)
    # terms are negligible well before kmax; trim by magnitude at ymax
    mags = np.abs(coeffs) * np.power(zmax, ks, where=zmax > 0, out=np.ones_like(ks, float))
    keep = max(8, int(np.argmax(mags < mags.max() * 1e-22)) or kmax)
    coeffs = coeffs[: keep + 1]
    acc = np.zeros(len(ys), dtype=np.complex128)
    for ck in coeffs[::-1]:
        acc = acc * z + ck
    return np.exp(2j * r * np.log(ys / 2.0)) * acc


def bessel_J_imaginary_order(r: float, y: float) -> complex:
    """J_{2ir}(y) for real r; J_{-2ir}(y) is its conjugate.

    Power series with complex log-gamma for y <= 12; mpmath
    continuation for larger y.  Raises OverflowError when the unscaled
    value exceeds double range (pi |r| > ~705); use the scaled kernel
    inside transforms instead.
    """
    if y <= 0:
        raise ValueError(f"need y > 0, got {y}")
    if r == 0.0:
        return complex(sc.j0(y))
    if math.pi * abs(r) > 705.0:
        raise OverflowError("unscaled J_{2ir} exceeds double range; use the scaled kernel")
    if y <= 12.0:
        val = _j2ir_scaled_vec(r, np.array([y]))[0]
        return complex(val * math.exp(math.pi * abs(r)))
    with mpmath.workdps(30 + int(0.5 * y)):
        v = mpmath.besselj(2j * r, y)
        return complex(v)


def _k_cosh_integral_vec(r: float, ys: np.ndarray) -> np.ndarray:
    """K_{2ir}(ys) = integral of exp(-y cosh t) cos(2 r t) dt, by a
    fixed composite GK15 grid shared across the y batch."""
    ymin = float(ys.min())
    tmax = math.acosh(1.0 + 50.0 / ymin)
    width = min(math.pi / (4.0 * abs(r) + 2.0), 0.25)
    n = max(4, int(math.ceil(tmax / width)))
    bounds = np.linspace(0.0, tmax, n + 1)
    mids = 0.5 * (bounds[:-1] + bounds[1:])
    halfs = 0.5 * (bounds[1:] - bounds[:-1])
    ts = (mids[:, None] + halfs[:, None] * _NODES[None, :]).ravel()
    wts = (halfs[:, None] * _WK[None, :]).ravel()
    ker = np.exp(-ys[:, None] * np.cosh(ts)[None, :]) * np.cos(2.0 * r * ts)[None, :]
    return ker @ wts


def _chK_loss_nats(r: float, y: float) -> tuple[float, float]:
    """(series, integral) precision-loss estimates in nats."""
    if r <= 0:
        return 0.0, 0.0
    loss_series = math.inf
    if y <= 2.4 * r:
        loss_series = y * y / (8.0 * r) + 0.5 * math.log(max(r, 1.0))
    loss_int = math.inf
    z = y / (2.0 * r)
    if z > 1.0:
        xi = math.sqrt(z * z - 1.0) - math.acos(1.0 / z)
        loss_int = math.pi * r + 2.0 * r * xi - y
    return loss_series, loss_int


_CHK_MAX_LOSS = 12.0  # nats; ~5 digits, keeps absolute error near 1e-11


def cosh_weighted_K(r: float, ys) -> np.ndarray:
    """cosh(pi r) K_{2ir}(ys), real-valued, stable for all regimes."""
    ys = np.atleast_1d(np.asarray(ys, dtype=np.float64))
    if np.any(ys <= 0):
        raise ValueError("need y > 0")
    if r == 0.0:
        return sc.k0(ys)
    out = np.empty(len(ys), dtype=np.float64)
    route = np.empty(len(ys), dtype=np.int8)  # 0 series, 1 integral, 2 mpmath
    for i, y in enumerate(ys):
        ls, li = _chK_loss_nats(r, float(y))
        if ls <= _CHK_MAX_LOSS and ls <= li:
            route[i] = 0
        elif li <= _CHK_MAX_LOSS and math.pi * r <= 690.0:
            route[i] = 1
        else:
            route[i] = 2
    sel = route == 0
    if sel.any():
        out[sel] = _chK_series_vec(r, ys[sel])
    sel = route == 1
    if sel.any():
        vals = _k_cosh_integral_vec(r, ys[sel])
        out[sel] = np.cosh(math.pi * r) * vals
    sel = route == 2
    if sel.any():
        for i in np.nonzero(sel)[0]:
            out[i] = _chK_mpmath(r, float(ys[i]))
    return out


def _chK_series_vec(r: float, ys: np.ndarray) -> np.ndarray:
    """cosh(pi r) K_{2ir}(y) = -pi Im(e^{-pi r} I_{2ir}(y)) / (1 - e^{-2 pi r})."""
    ymax = float(ys.max())
    z = ys * ys / 4.0
    zmax = ymax * ymax / 4.0
    # terms (z^k / (k! |Gamma(1+2ir+k)|)) decay once k sqrt(k^2+4r^2) > z
    kmax = int(max(24.0, zmax / (2.0 * r) + 18.0 + 6.0 * math.sqrt(zmax / (2.0 * r) + 1.0), ymax / 2 + 24))
    ks = np.arange(kmax + 1)
    logc = -math.pi * r - sc.gammaln(ks + 1.0) - sc.loggamma(1.0 + 2j * r + ks)
    coeffs = np.exp(logc)
    acc = np.zeros(len(ys), dtype=np.complex128)
    for ck in coeffs[::-1]:
        acc = acc * z + ck
    scaled_I = np.exp(2j * r * np.log(ys / 2.0)) * acc
    return -math.pi * scaled_I.imag / (1.0 - math.exp(-2.0 * math.pi * r))


def _chK_mpmath(r: float, y: float) -> float:
    ls, li = _chK_loss_nats(r, y)
    extra = min(ls, li)
    if not math.isfinite(extra):
        extra = max(y * y / (8.0 * max(r, 1e-9)), y)
    with mpmath.workdps(25 + int(extra * 0.4343)):
        v = mpmath.cosh(mpmath.pi * r) * mpmath.besselk(2j * r, y)
        return float(mpmath.re(v))


def bessel_K_imaginary_order(r, y: float) -> float:
    """K_{2ir}(y) for real r (real-valued); pure-imaginary r = i*s is
    routed to the real order 2s (so r = i/4 gives K_{1/2}, r = i/8
    gives K_{1/4})."""
    if y <= 0:
        raise ValueError(f"need y > 0, got {y}")
    if isinstance(r, complex):
        if r.real != 0.0:
            raise ValueError("spectral parameter must be real or purely imaginary")
        return float(sc.kv(2.0 * abs(r.imag), y))
    if r == 0.0:
        return float(sc.k0(y))
    chk = float(cosh_weighted_K(r, np.array([y]))[0])
    # divide out cosh(pi r) in a form that tends to 0 cleanly for large r
    return chk * 2.0 * math.exp(-math.pi * r) / (1.0 + math.exp(-2.0 * math.pi * r))


# ---------------------------------------------------------------------------
# the smooth test bump
# ---------------------------------------------------------------------------


def _ramp9(u: np.ndarray) -> np.ndarray:
    """Degree-9 monotone ramp, 0 -> 1 on [0, 1], C^4 at both ends."""
    return u**5 * (126.0 - 420.0 * u + 540.0 * u**2 - 315.0 * u**3 + 70.0 * u**4)


@dataclass(frozen=True)
class TestFunctionParams:
    """Bump phi equal to 1 on [a/2x, a/x], supported in
    [a/(2x+2T), a/(x-T)], with C^4 polynomial ramps."""

    a: float
    x: float
    T: float
    shape: str = "ramp9"

    def __post_init__(self):
        if min(self.a, self.x, self.T) <= 0:
            raise InadmissibleParams("a, x, T must be positive")
        if self.T > self.x / 3.0:
            raise InadmissibleParams(f"need T <= x/3, got T={self.T}, x={self.x}")
        if self.shape != "ramp9":
            raise InadmissibleParams(f"unknown shape {self.shape!r}")

    @property
    def support(self) -> tuple[float, float]:
        return self.a / (2.0 * self.x + 2.0 * self.T), self.a / (self.x - self.T)

    @property
    def plateau(self) -> tuple[float, float]:
        return self.a / (2.0 * self.x), self.a / self.x

    def phi(self, t):
        t = np.asarray(t, dtype=np.float64)
        s_lo, s_hi = self.support
        p_lo, p_hi = self.plateau
        out = np.zeros_like(t)
        out[(t >= p_lo) & (t <= p_hi)] = 1.0
        up = (t > s_lo) & (t < p_lo)
        if up.any():
            out[up] = _ramp9((t[up] - s_lo) / (p_lo - s_lo))
        down = (t > p_hi) & (t < s_hi)
        if down.any():
            out[down] = _ramp9((s_hi - t[down]) / (s_hi - p_hi))
        return out if out.ndim else float(out)

    def derivative_bound(self) -> float:
        """Provable sup |phi'| from the ramp widths (max |ramp9'| = 630/256)."""
        s_lo, s_hi = self.support
        p_lo, p_hi = self.plateau
        peak = 630.0 / 256.0
        return peak / min(p_lo - s_lo, s_hi - p_hi)


def phi_eval(p: TestFunctionParams, t) -> float:
    return p.phi(t)


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransformValue:
    r: object  # float, or complex i/4 on the mixed-sign side
    value: complex
    quad_error: float


def _weight_and_bounds(params, weight, bounds):
    if weight is None:
        weight = params.phi
    if bounds is None:
        lo, hi = params.support
        edges = params.plateau
    else:
        lo, hi = bounds
        edges = ()
    return weight, lo, hi, edges


def transform_check(
    params: TestFunctionParams,
    r: float,
    *,
    weight=None,
    bounds=None,
    tol: float = 1e-12,
    level: int = 0,
) -> TransformValue:
    """phi-check(r) = integral of J_{r-1}(y) phi(y) dy/y over the
    compact support (adaptive GK15, split at the plateau edges)."""
    w, lo, hi, edges = _weight_and_bounds(params, weight, bounds)
    if hi <= lo:
        return TransformValue(r, 0j, 0.0)

    def f(ys):
        return sc.jv(r - 1.0, ys) * w(ys) / ys

    val, err = integrate(f, lo, hi, edges=edges, tol=tol, max_width=math.pi / 2, level=level)
    return TransformValue(r, val, err)


def transform_check_tail_sum(params: TestFunctionParams, l_max: int = 400) -> float:
    """sum over l >= 1 of (2l - 1/2) |phi-check(1/2 + 2l)|."""
    acc = 0.0
    tiny_streak = 0
    for l in range(1, l_max + 1):
        tv = transform_check(params, 0.5 + 2 * l, tol=1e-13)
        term = (2 * l - 0.5) * abs(tv.value)
        acc += term
        if term < 1e-16 * max(acc, 1e-250) + 1e-250:
            tiny_streak += 1
            if tiny_streak >= 3:
                break
        else:
            tiny_streak = 0
    return acc


def _hat_log_prefactor(r: float) -> float:
    """log of |prefactor| * e^{2 pi r}: combines 1/(sh(pi r) ch(2 pi r))
    and 1/|Gamma(1/4 + ir)|^2 without overflow."""
    e2 = math.exp(-2.0 * math.pi * r)
    e4 = e2 * e2
    rel_gamma = 2.0 * sc.loggamma(0.25 + 1j * r).real
    return (
        math.log(math.pi**2)
        - math.pi * r
        + 2.0 * math.log(2.0)
        - math.log1p(-e2)
        - math.log1p(e4)
        - rel_gamma
    )


def transform_hat(
    params: TestFunctionParams,
    r: float,
    *,
    form: str = "con",
    weight=None,
    bounds=None,
    tol: float = 1e-13,
    level: int = 0,
) -> TransformValue:
    """phi-hat(r): the same-sign spectral transform.

    form="con" integrates the rewritten kernel
      ch(pi r) Im J_{2ir}(y) - sh(pi r) Re J_{2ir}(y)
    (one scaled series); form="hat" evaluates the defining combination
    cos(pi(1/4+ir)) J_{2ir} - cos(pi(1/4-ir)) J_{-2ir} with two
    independent kernel evaluations.  Both are carried with e^{2 pi r}
    scaled out, so any r up to ~500 is safe; the two forms agreeing is
    a cross-check of the kernel algebra.
    """
    if r < 0:
        raise ValueError("need r >= 0")
    w, lo, hi, edges = _weight_and_bounds(params, weight, bounds)
    if hi <= lo:
        return TransformValue(r, 0j, 0.0)
    u_lo, u_hi = math.log(lo), math.log(hi)
    u_edges = tuple(math.log(e) for e in edges if lo < e < hi)

    if r == 0.0:
        pref0 = (math.pi**2) * cmath.exp(3j * math.pi / 4) * 1j * math.sqrt(2.0)
        pref0 /= sc.gamma(0.25) ** 2

        def f0(us):
            ys = np.exp(us)
            return (sc.y0(ys) - sc.j0(ys)) * w(ys)

        val, err = integrate(f0, u_lo, u_hi, edges=u_edges, tol=tol, max_width=0.5, level=level)
        return TransformValue(r, pref0 * val, abs(pref0) * err)

    eps2 = math.exp(-2.0 * math.pi * r)
    cp = (math.sqrt(2.0) / 2.0) * complex(0.5 * (1.0 + eps2), -0.5 * (1.0 - eps2))
    cm = cp.conjugate()

    if form == "con":

        def f(us):
            ys = np.exp(us)
            A = _j2ir_scaled_vec(r, ys)
            base = 1j * math.sqrt(2.0) * (0.5 * (1.0 + eps2) * A.imag - 0.5 * (1.0 - eps2) * A.real)
            return base * w(ys)

    elif form == "hat":

        def f(us):
            ys = np.exp(us)
            Ap = _j2ir_scaled_vec(r, ys)
            Am = _j2ir_scaled_vec(-r, ys)
            return (cp * Ap - cm * Am) * w(ys)

    else:
        raise ValueError(f"unknown form {form!r}")

    pref = cmath.exp(3j * math.pi / 4) * math.exp(_hat_log_prefactor(r))
    width = math.pi / (4.0 * max(r, 1.0))
    val, err = integrate(f, u_lo, u_hi, edges=u_edges, tol=tol, max_width=width, level=level)
    return TransformValue(r, pref * val, abs(pref) * err)


def transform_Phi(
    params: TestFunctionParams,
    r,
    *,
    weight=None,
    bounds=None,
    tol: float = 1e-12,
    level: int = 0,
) -> TransformValue:
    """Phi-check(r) = cosh(pi r) * integral of K_{2ir}(y) phi(y) dy/y.

    r may be real (>= 0) or purely imaginary with |r| <= 1/4, in which
    case the Bessel kernel has real order 2|r| and cosh(pi r) becomes
    cos(pi |r|).
    """
    w, lo, hi, edges = _weight_and_bounds(params, weight, bounds)
    if hi <= lo:
        return TransformValue(r, 0j, 0.0)
    u_lo, u_hi = math.log(lo), math.log(hi)
    u_edges = tuple(math.log(e) for e in edges if lo < e < hi)

    if isinstance(r, complex) and r.imag != 0.0:
        if r.real != 0.0 or abs(r.imag) > 0.25 + 1e-12:
            raise ValueError("imaginary spectral parameter must be i*s with 0 < s <= 1/4")
        s = abs(r.imag)
        pref = math.cos(math.pi * s)

        def f(us):
            ys = np.exp(us)
            return pref * sc.kv(2.0 * s, ys) * w(ys)

        val, err = integrate(f, u_lo, u_hi, edges=u_edges, tol=tol, max_width=0.5, level=level)
        return TransformValue(r, val, err)

    rr = float(r.real if isinstance(r, complex) else r)
    if rr < 0:
        raise ValueError("need r >= 0")

    if rr == 0.0:

        def f(us):
            ys = np.exp(us)
            return sc.k0(ys) * w(ys)

        val, err = integrate(f, u_lo, u_hi, edges=u_edges, tol=tol, max_width=0.5, level=level)
        return TransformValue(r, val, err)

    def f(us):
        ys = np.exp(us)
        return cosh_weighted_K(rr, ys) * w(ys)

    width = math.pi / (4.0 * max(rr, 1.0))
    val, err = integrate(f, u_lo, u_hi, edges=u_edges, tol=tol, max_width=width, level=level)
    return TransformValue(r, val, err)


def decay_slope(rs, vals, floor: float = 1e-300) -> float:
    """Least-squares slope of log|val| against log r."""
    rs = np.asarray(rs, dtype=float)
    ys = np.maximum(np.abs(np.asarray(vals, dtype=float)), floor)
    slope, _ = np.polyfit(np.log(rs), np.log(ys), 1)
    return float(slope)
