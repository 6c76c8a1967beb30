"""Command-line interface.

Subcommands: sum, scan, transform, rademacher, hecke, verify, presets.
Exit codes: 0 success, 1 usage error, 2 verification failure, 3 I/O
error.  Configuration precedence: flags > environment (KLSM_CACHE_DIR,
KLSM_THREADS) > key=value config file.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import hecke, kloosterman, rademacher, special, verify

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


@dataclass
class ScanConfig:
    m: int
    n: int
    x_min: float
    x_max: float
    scheme: str  # "log" or "dyadic"
    count: int
    threads: int | None
    cache_dir: str | None
    fmt: str

    def __post_init__(self):
        if self.x_min < 1:
            raise ValueError("x_min must be >= 1")
        if self.scheme == "log" and self.count < 2:
            raise ValueError("need at least 2 checkpoints for fitting")

    def checkpoints(self) -> np.ndarray:
        if self.scheme == "dyadic":
            return kloosterman.dyadic_checkpoints(self.x_min, self.x_max)
        return kloosterman.log_checkpoints(self.x_min, self.x_max, self.count)


def _load_config_file(path: str | None) -> dict:
    conf = {}
    if path and os.path.exists(path):
        with open(path) as f:
            for line in f:
                line = line.strip()
                if line and not line.startswith("#") and "=" in line:
                    k, v = line.split("=", 1)
                    conf[k.strip()] = v.strip()
    return conf


def _resolve(flag_value, env_key: str, conf: dict, conf_key: str, cast=str):
    if flag_value is not None:
        return flag_value
    if env_key in os.environ:
        return cast(os.environ[env_key])
    if conf_key in conf:
        return cast(conf[conf_key])
    return None


def _open_out(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    try:
        return open(path, "w", newline=""), True
    except OSError as e:
        print(f"error: cannot open {path}: {e}", file=sys.stderr)
        raise SystemExit(EXIT_IO)


def _emit_rows(rows: list[dict], header: list[str], fmt: str, out):
    if fmt == "json":
        json.dump(rows, out, indent=None, separators=(",", ":"))
        out.write("\n")
    else:
        w = csv.writer(out)
        w.writerow(header)
        for row in rows:
            w.writerow([row[h] for h in header])


def cmd_sum(args) -> int:
    q = kloosterman.KloostermanQuery(args.m, args.n, args.c, args.kind, args.character)
    s = kloosterman.kloosterman_exact(q)
    v = s.evaluate()
    nonzero = int(np.count_nonzero(s.multiplicities))
    total = int(np.abs(s.multiplicities).sum())
    print(f"kind={args.kind} m={args.m} n={args.n} c={args.c}")
    print(f"modulus Q={s.modulus}  distinct exponents={nonzero}  terms={total}")
    print(f"value = {v.real:.12f} {'+' if v.imag >= 0 else '-'} {abs(v.imag):.12f}i")
    return EXIT_OK


def cmd_scan(args, conf) -> int:
    threads = _resolve(args.threads, "KLSM_THREADS", conf, "threads", int)
    cache_dir = _resolve(args.cache_dir, "KLSM_CACHE_DIR", conf, "cache_dir", str)
    try:
        cfg = ScanConfig(
            args.m, args.n, args.x_min, args.x_max, args.scheme, args.checkpoints, threads,
            cache_dir, args.format,
        )
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    series = kloosterman.partial_sum(
        cfg.m, cfg.n, cfg.x_max, cfg.checkpoints(), threads=cfg.threads, cache_dir=cfg.cache_dir
    )
    fit = kloosterman.fit_exponent(series)
    if cfg.m > 0 and cfg.n > 0:
        from .arith import is_generalized_pentagonal

        main_term = is_generalized_pentagonal(cfg.m - 1) and is_generalized_pentagonal(cfg.n - 1)
    else:
        main_term = False
    regime = "main-term regime" if main_term else "cancellation regime"
    out, close = _open_out(args.out)
    try:
        _emit_rows(series.to_rows(), ["x", "re", "im", "abs", "terms"], cfg.fmt, out)
    finally:
        if close:
            out.close()
    print(
        f"# fit: slope={fit.slope:.4f} intercept={fit.intercept:.4f} "
        f"r2={fit.r_squared:.4f} window=[{fit.window[0]:.3g},{fit.window[1]:.3g}] ({regime})",
        file=sys.stderr,
    )
    return EXIT_OK


def _parse_rgrid(spec: str) -> list[float]:
    if not spec:
        return []
    if spec.startswith("dyadic:"):
        _, lo, hi = spec.split(":")
        lo, hi = float(lo), float(hi)
        out = []
        r = lo
        while r <= hi * (1 + 1e-12):
            out.append(r)
            r *= 2
        return out
    return [float(tok) for tok in spec.split(",") if tok]


def cmd_transform(args) -> int:
    try:
        params = special.TestFunctionParams(args.a, args.x, args.T)
    except special.InadmissibleParams as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    rs = _parse_rgrid(args.r_grid)
    rows = []
    for r in rs:
        if args.kind == "check":
            tv = special.transform_check(params, r)
        elif args.kind == "hat":
            tv = special.transform_hat(params, r)
        else:
            tv = special.transform_Phi(params, r)
        rows.append(
            {
                "r": r,
                "re": tv.value.real,
                "im": tv.value.imag,
                "abs": abs(tv.value),
                "quad_error": tv.quad_error,
            }
        )
    out, close = _open_out(args.out)
    try:
        _emit_rows(rows, ["r", "re", "im", "abs", "quad_error"], args.format, out)
    finally:
        if close:
            out.close()
    if args.fit and len(rows) >= 2:
        slope = special.decay_slope([row["r"] for row in rows], [row["abs"] for row in rows])
        print(f"# fitted log-log slope: {slope:.4f}", file=sys.stderr)
    return EXIT_OK


def cmd_rademacher(args) -> int:
    rows = []
    for n in range(1, args.n_max + 1):
        N = max(1, math.ceil(args.terms_factor * math.sqrt(n)))
        res = rademacher.partition_rademacher(n, N)
        rows.append(
            {
                "n": n,
                "p_exact": str(res.exact),
                "estimate": res.estimate,
                "N": res.terms_used,
                "residual": res.residual,
            }
        )
    out, close = _open_out(args.out)
    try:
        _emit_rows(rows, ["n", "p_exact", "estimate", "N", "residual"], args.format, out)
    finally:
        if close:
            out.close()
    return EXIT_OK


def cmd_hecke(args) -> int:
    if args.series == "eta":
        s = hecke.eta_qexp(args.length)
    else:
        s = hecke.eta_delta_series(args.length)
    if args.tp2:
        chi12 = hecke.character("chi12")
        s = hecke.hecke_Tp2_half(s, args.tp2, args.weight_k, chi12)
    out, close = _open_out(args.out)
    try:
        hecke.series_to_csv(s, out)
    finally:
        if close:
            out.close()
    return EXIT_OK


def cmd_verify(args, conf) -> int:
    cache_dir = _resolve(args.cache_dir, "KLSM_CACHE_DIR", conf, "cache_dir", str)
    try:
        results = verify.run_suite(args.suite, args.seed, cache_dir)
    except verify.UnknownSuite as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    width = max(len(r.name) for r in results) + 2
    failed = 0
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        failed += not r.passed
        print(f"[{mark}] {r.suite:<12} {r.name:<{width}} extremal={r.extremal:.6g}  ({r.threshold})")
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def cmd_presets(args) -> int:
    m, n = args.m, args.n
    mt = m - 23.0 / 24.0
    nt = n - 23.0 / 24.0
    prod = abs(mt * nt)
    print(f"presets for (m, n) = ({m}, {n}):")
    print(f"  mixed-sign initial-segment cutoff  |mt*nt|^(38/77) = {prod ** (38 / 77):.6g}")
    print(f"  positive-case cutoff               4*pi*sqrt(|mt*nt|) = {4 * math.pi * math.sqrt(prod):.6g}")
    from .arith import squarefree_decompose

    if m > 0 and n > 0:
        s = squarefree_decompose(24 * m - 23).core
        t = squarefree_decompose(24 * n - 23).core
        cutoff = (s * t) ** (1 / 6) * (m * n) ** (1 / 3)
        print(f"  square-free refined cutoff         (st)^(1/6) (mn)^(1/3) = {cutoff:.6g}  [s={s}, t={t}]")
    if args.x:
        print(f"  smoothing width at x={args.x:g}         T = x^(2/3) = {args.x ** (2 / 3):.6g}")
    return EXIT_OK


def build_parser() -> _Parser:
    ap = _Parser(prog="klsm", description=__doc__)
    ap.add_argument("--config", default=None, help="key=value config file")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sum", help="one Kloosterman sum, exact and numeric")
    p.add_argument("--kind", default="eta", choices=kloosterman.KINDS)
    p.add_argument("-m", type=int, required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-c", type=int, required=True)
    p.add_argument("--character", default="trivial", choices=["trivial", "chi12"])

    p = sub.add_parser("scan", help="partial sums over c with slope fit")
    p.add_argument("-m", type=int, required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--x-min", type=float, default=10.0)
    p.add_argument("--x-max", type=float, required=True)
    p.add_argument("--checkpoints", type=int, default=25)
    p.add_argument("--scheme", choices=["log", "dyadic"], default="log")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--cache-dir", default=None)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default=None)

    p = sub.add_parser("transform", help="test-function transform scans")
    p.add_argument("kind", choices=["check", "hat", "Phi"])
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--r-grid", default="dyadic:1:256", help='"dyadic:lo:hi" or comma list')
    p.add_argument("--fit", action="store_true")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default=None)

    p = sub.add_parser("rademacher", help="partition series vs exact p(n)")
    p.add_argument("--n-max", type=int, default=100)
    p.add_argument("--terms-factor", type=float, default=3.0)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default=None)

    p = sub.add_parser("hecke", help="q-expansions and Hecke action, CSV out")
    p.add_argument("--series", choices=["eta", "eta-delta"], default="eta-delta")
    p.add_argument("--length", type=int, default=1000)
    p.add_argument("--tp2", type=int, default=None, help="apply T_{p^2} at this prime")
    p.add_argument("--weight-k", type=int, default=12)
    p.add_argument("--out", default=None)

    p = sub.add_parser("verify", help="run module invariant suites")
    p.add_argument("suite", choices=sorted(verify.SUITES) + ["all"])
    p.add_argument("--seed", type=int, default=verify.DEFAULT_SEED)
    p.add_argument("--cache-dir", default=None)

    p = sub.add_parser("presets", help="named cutoffs for scan configurations")
    p.add_argument("-m", type=int, required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-x", type=float, default=None)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    conf = _load_config_file(args.config or os.environ.get("KLSM_CONFIG"))
    try:
        if args.command == "sum":
            return cmd_sum(args)
        if args.command == "scan":
            return cmd_scan(args, conf)
        if args.command == "transform":
            return cmd_transform(args)
        if args.command == "rademacher":
            return cmd_rademacher(args)
        if args.command == "hecke":
            return cmd_hecke(args)
        if args.command == "verify":
            return cmd_verify(args, conf)
        if args.command == "presets":
            return cmd_presets(args)
        return EXIT_USAGE
    except (ValueError, kloosterman.BadModulus) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
