"""Command line entry point: ``kummerlab {curve,periods,coble,export,verify}``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .curve_model import CurveSpec, default_curve
from .errors import KummerLabError
from .periods import DEFAULT_PRECISION, load_or_compute

DEFAULTS = {"seed": 42, "precision": DEFAULT_PRECISION, "samples": None, "period_cache": None,
            "tolerances": {}, "curve": None}


def load_curve(path) -> CurveSpec:
    """Curve file: {"f": [...7 coefficients, highest degree first...], "eta_index": k}.

    Coefficients are numbers or [re, im] pairs.
    """
    if path is None:
        return default_curve()
    with open(path) as fh:
        data = json.load(fh)
    coeffs = [complex(*c) if isinstance(c, (list, tuple)) else complex(c) for c in data["f"]]
    return CurveSpec(coeffs, data.get("eta_index", 0))


def load_config(args) -> dict:
    """Defaults, then the config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg.update(json.load(fh))
    for key in ("seed", "precision", "samples", "period_cache", "curve"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    tol = dict(cfg.get("tolerances") or {})
    for item in getattr(args, "tol", None) or []:
        name, _, value = item.partition("=")
        tol[name] = float(value)
    cfg["tolerances"] = tol
    return cfg


def _periods(cfg):
    curve = load_curve(cfg["curve"])
    return load_or_compute(curve, cfg["precision"], cfg["period_cache"])


def _cx(v):
    return [[float(z.real), float(z.imag)] for z in np.ravel(v)]


def cmd_curve(args, cfg):
    c = load_curve(cfg["curve"])
    print(f"degree {c.degree}, eta index {c.eta_index} ({'infinity' if c.eta_is_infinite else c.eta_root})")
    for k, r in enumerate(c.roots):
        print(f"  e{k} = {r.real:+.12f} {r.imag:+.12f}i")
    print(f"hash {c.digest()}")
    return 0


def cmd_periods(args, cfg):
    pd = _periods(cfg)
    om = pd.omega
    print("Omega =")
    for row in om:
        print("  " + "  ".join(f"{z.real:+.12f}{z.imag:+.12f}i" for z in row))
    print(f"delta = {pd.delta}   margin = {pd.metadata.get('delta_margin', float('nan')):.3e}")
    print(f"asymmetry = {pd.metadata.get('asymmetry', 0.0):.3e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(pd.to_json(), fh, indent=1)
    return 0


def _coble_json(ctx):
    F = ctx.coble()
    out = F.to_json()
    out["curve_hash"] = ctx.periods.curve.digest()
    return out


def cmd_coble(args, cfg):
    from .coble_duality import EmbeddingContext
    ctx = EmbeddingContext(_periods(cfg), cfg["seed"])
    F = ctx.coble()
    print(f"Coble cubic: {F.coeffs.size} coefficients, nullspace gap {F.meta['gap']:.3e}")
    if args.action == "export":
        if not args.out:
            print("coble export needs --out", file=sys.stderr)
            return 2
        with open(args.out, "w") as fh:
            json.dump(_coble_json(ctx), fh, indent=1)
        print(f"wrote {args.out}")
    return 0


def cmd_export(args, cfg):
    from .coble_duality import EmbeddingContext
    pd = _periods(cfg)
    ctx = EmbeddingContext(pd, cfg["seed"])
    bundle = {"curve": pd.curve.to_json(), "periods": pd.to_json(), "coble": _coble_json(ctx),
              "kummer_quartic": ctx.kummer_quartic().to_json()}
    with open(args.out, "w") as fh:
        json.dump(bundle, fh, indent=1)
    print(f"wrote {args.out}")
    return 0


def cmd_verify(args, cfg):
    from .verify import run_checks

    def log(rec):
        status = "PASS" if rec["pass"] else "FAIL"
        gap = "error" if rec["worst_gap"] is None else f"{rec['worst_gap']:.3e}"
        print(f"{status}  {rec['name']:<36} gap {gap:>10} < {rec['threshold']:.1e}"
              f"  n={rec['samples']}  {rec['wall_time']:.1f}s" + (f"  {rec['error']}" if "error" in rec else ""),
              flush=True)

    pd = _periods(cfg)
    report = run_checks(pd, args.group, cfg["seed"], cfg["samples"], cfg["tolerances"], log=log)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(report, fh, indent=1, sort_keys=True)
    failed = [r["name"] for r in report["records"] if not r["pass"]]
    if failed:
        print(f"{len(failed)} check(s) failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    print(f"all {len(report['records'])} checks passed")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="kummerlab", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--curve", help="JSON curve file (default y^2 = x^5 - x)")
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int)
    common.add_argument("--precision", type=float)
    common.add_argument("--period-cache", dest="period_cache", help="JSON file caching the period matrix")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("curve", parents=[common], help="show the curve and its branch points")
    sp = sub.add_parser("periods", parents=[common], help="compute the period matrix")
    sp.add_argument("--json", help="write the period data here")
    sc = sub.add_parser("coble", parents=[common], help="fit the Coble cubic")
    sc.add_argument("action", nargs="?", choices=["show", "export"], default="show")
    sc.add_argument("--out")
    se = sub.add_parser("export", parents=[common], help="write periods and fitted forms")
    se.add_argument("--out", required=True)
    sv = sub.add_parser("verify", parents=[common], help="run numerical checks")
    sv.add_argument("group", choices=["all", "foundations", "theoremA", "theoremB", "theoremC",
                                      "kummerK3", "appendix", "weddle"])
    sv.add_argument("--samples", type=int, help="override every check's sample count")
    sv.add_argument("--json", help="write the report here")
    sv.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override a threshold")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(args)
        handler = {"curve": cmd_curve, "periods": cmd_periods, "coble": cmd_coble,
                   "export": cmd_export, "verify": cmd_verify}[args.command]
        return handler(args, cfg)
    except KummerLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
