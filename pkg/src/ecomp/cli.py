"""Command-line interface.

Subcommands: pmf, moments, dispersion, gamma, sample, simulate, catalog.
Distributions are addressed either by flags (--phi/--rho/...) or by a JSON
spec file (--spec); every JSON output echoes the spec it ran from, so piping
an output spec back in reproduces the run.  Exit codes: 0 success, 2 for
usage and malformed-spec errors, 1 for numeric failures (divergent series,
failed convergence, domain violations).

Floats in JSON keep full double precision (round-trips exactly); tables and
CSV are printed to 6 significant digits unless they hold integers.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .bernstein_gamma import get_evaluator
from .dispersion import full_report
from .distribution import EComPoisson
from .errors import ConfigError, EcompError
from .extended import ExtendedDist
from .phi import catalog_entries, parse_phi
from .queueing import QueueScenario, compare_to_theory, simulate


def _fmt6(x) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _roundtrip_floats(obj):
    """Normalize floats so the emitted JSON parses back to the same doubles."""
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return float(f"{obj:.17g}")
    if isinstance(obj, dict):
        return {k: _roundtrip_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_roundtrip_floats(v) for v in obj]
    return obj


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _emit_json(payload: dict, out: str | None) -> None:
    _emit(json.dumps(_roundtrip_floats(payload), indent=2), out)


def _emit_rows(header, rows, fmt: str, out: str | None) -> None:
    if fmt == "csv":
        lines = [",".join(header)]
        lines += [",".join(_fmt6(c) for c in r) for r in rows]
        _emit("\n".join(lines), out)
    else:
        widths = [
            max(len(h), *(len(_fmt6(r[i])) for r in rows)) if rows else len(h)
            for i, h in enumerate(header)
        ]
        lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
        for r in rows:
            lines.append(
                "  ".join(_fmt6(c).ljust(w) for c, w in zip(r, widths))
            )
        _emit("\n".join(lines), out)


def _parse_int_list(text: str) -> list[int]:
    """Accepts '3', '1,2,5', and 'a..b' inclusive ranges, mixed freely."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo_s, hi_s = part.split("..", 1)
            lo, hi = int(lo_s), int(hi_s)
            if hi < lo:
                raise ConfigError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ConfigError("no indices given")
    return out


def _parse_float_list(text: str) -> list[float]:
    vals = [float(p) for p in text.split(",") if p.strip()]
    if not vals:
        raise ConfigError("no values given")
    return vals


def _load_spec(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read spec {path}: {exc}") from None


def _dist_from_args(args, allow_extended: bool = True):
    if args.spec:
        spec = _load_spec(args.spec)
        if any(k in spec for k in ("alpha", "beta", "gamma")):
            if not allow_extended:
                raise ConfigError(
                    "this command supports only the two-parameter family"
                )
            return ExtendedDist.from_spec(spec)
        return EComPoisson.from_spec(spec)
    if args.phi is None or args.rho is None:
        raise ConfigError("either --spec or both --phi and --rho are required")
    cap = math.inf if args.lambda_cap in (None, "inf") else float(args.lambda_cap)
    kw = {}
    if args.tol is not None:
        kw["tol"] = args.tol
    return EComPoisson(args.rho, parse_phi(args.phi), lambda_cap=cap, **kw)


def _add_dist_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--phi", help="catalog id, e.g. ratio:1.0 or inv:logshift:2.0")
    p.add_argument("--rho", type=float, help="rate ratio lambda/mu")
    p.add_argument("--lambda-cap", dest="lambda_cap", default=None,
                   help="support cap (naturals strictly below it), or 'inf'")
    p.add_argument("--tol", type=float, default=None,
                   help="relative series tolerance")
    p.add_argument("--spec", help="JSON distribution spec file")


def _add_output_flags(p: argparse.ArgumentParser, formats=("json", "csv", "table")) -> None:
    p.add_argument("--format", choices=formats, default=formats[0])
    p.add_argument("--out", help="write output to this path instead of stdout")


# -- subcommand handlers ------------------------------------------------------


def _cmd_pmf(args) -> int:
    d = _dist_from_args(args)
    ns = _parse_int_list(args.n)
    ps = [d.pmf(n) for n in ns]
    if args.format == "json":
        payload = {"spec": d.to_spec(), "z": d.z_value, "n": ns, "pmf": ps}
        if isinstance(d, EComPoisson):
            payload["n_trunc"] = d.n_trunc
            payload["tail_bound"] = d.tail_bound
        _emit_json(payload, args.out)
    else:
        _emit_rows(("n", "pmf"), list(zip(ns, ps)), args.format, args.out)
    return 0


def _cmd_moments(args) -> int:
    d = _dist_from_args(args)
    orders = _parse_int_list(args.orders)
    moments = [d.moment(s) for s in orders]
    fact = [d.factorial_moment(s) for s in orders]
    if args.format == "json":
        _emit_json({
            "spec": d.to_spec(),
            "orders": orders,
            "moments": moments,
            "factorial_moments": fact,
            "mean": d.mean(),
            "variance": d.variance(),
            "dispersion_index": d.dispersion_index(),
        }, args.out)
    else:
        rows = list(zip(orders, moments, fact))
        _emit_rows(("s", "moment", "factorial_moment"), rows, args.format,
                   args.out)
    return 0


def _cmd_dispersion(args) -> int:
    phi = parse_phi(args.phi) if args.phi else None
    if phi is None:
        raise ConfigError("--phi is required")
    rep = full_report(phi, rho=args.rho)
    if args.format == "json":
        _emit_json(rep, args.out)
    else:
        lines = [f"phi: {rep['phi']}"]
        for key in ("by_flags", "by_d", "by_derivative", "numeric"):
            sub = rep[key]
            if sub is None:
                lines.append(f"{key}: n/a")
                continue
            extra = ""
            if sub.get("numeric_index") is not None:
                extra = f"  index={_fmt6(sub['numeric_index'])}"
            lines.append(f"{key}: {sub['classification']}{extra}")
        _emit("\n".join(lines), args.out)
    return 0


def _cmd_gamma(args) -> int:
    phi = parse_phi(args.phi)
    ev = get_evaluator(phi)
    xs = _parse_float_list(args.x)
    fn = {
        "w": ev.w_real,
        "logw": ev.log_w_real,
        "psi": ev.psi,
        "psiprime": ev.psi_prime,
    }[args.quantity]
    vals = [fn(x) for x in xs]
    if args.format == "json":
        _emit_json({
            "phi": phi.spec_id,
            "quantity": args.quantity,
            "x": xs,
            "values": vals,
        }, args.out)
    else:
        _emit_rows(("x", args.quantity), list(zip(xs, vals)), args.format,
                   args.out)
    return 0


def _cmd_sample(args) -> int:
    d = _dist_from_args(args, allow_extended=False)
    draws = d.sample(args.count, args.seed)
    if args.format == "json":
        _emit_json({
            "spec": d.to_spec(),
            "seed": args.seed,
            "count": args.count,
            "samples": [int(v) for v in draws],
        }, args.out)
    else:
        _emit_rows(("sample",), [(int(v),) for v in draws], args.format,
                   args.out)
    return 0


def _cmd_simulate(args) -> int:
    if args.spec:
        sc = QueueScenario.from_spec(_load_spec(args.spec))
        if args.seed is not None:
            sc = QueueScenario(
                lam=sc.lam, mu=sc.mu, phi=sc.phi, lambda_cap=sc.lambda_cap,
                horizon=sc.horizon, burn_in=sc.burn_in, seed=args.seed,
            )
    else:
        if args.phi is None or args.lam is None or args.mu is None:
            raise ConfigError(
                "either --spec or --phi, --lambda and --mu are required"
            )
        cap = math.inf if args.lambda_cap in (None, "inf") \
            else float(args.lambda_cap)
        sc = QueueScenario(
            lam=args.lam, mu=args.mu, phi=parse_phi(args.phi),
            lambda_cap=cap, horizon=args.horizon, burn_in=args.burn_in,
            seed=0 if args.seed is None else args.seed,
        )
    res = simulate(sc, replicates=args.replicates, kernel=args.kernel)
    if args.format == "csv":
        rows = [(n, f) for n, f in enumerate(res.occupancy)]
        _emit_rows(("state", "fraction"), rows, "csv", args.out)
        return 0
    payload = {"scenario": sc.to_spec(), "result": res.to_dict()}
    if args.compare:
        comp = compare_to_theory(res, sc.distribution())
        payload["comparison"] = {
            "tv_distance": comp.tv_distance,
            "mean_gap": comp.mean_gap,
        }
    _emit_json(payload, args.out)
    return 0


def _cmd_catalog(args) -> int:
    rows = []
    for entry in catalog_entries():
        phi = parse_phi(entry.example)
        rows.append({
            "kind": entry.kind,
            "signature": entry.signature,
            "summary": entry.summary,
            "example": entry.example,
            "flags": sorted(phi.flags),
            "domain_sup": phi.domain_sup,
            "limit": phi.limit,
            "nondecreasing": phi.nondecreasing,
        })
    if args.format == "json":
        _emit_json({"catalog": rows}, args.out)
    else:
        table = [
            (r["signature"], ",".join(r["flags"]) or "-",
             _fmt6(r["limit"]), r["summary"])
            for r in rows
        ]
        _emit_rows(("id", "flags", "limit", "summary"), table, args.format,
                   args.out)
    return 0


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ecomp",
        description="Count distributions driven by Bernstein-type rate "
                    "functions: pmf tables, moments, dispersion reports, "
                    "gamma-analogue evaluation, sampling, queue simulation.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pmf", help="tabulate pmf values")
    _add_dist_flags(p)
    p.add_argument("--n", default="0..10", help="indices: '0..10', '1,3,5'")
    _add_output_flags(p, ("table", "json", "csv"))
    p.set_defaults(fn=_cmd_pmf)

    p = sub.add_parser("moments", help="raw and factorial moments")
    _add_dist_flags(p)
    p.add_argument("--orders", default="1,2", help="moment orders, e.g. 1,2,3")
    _add_output_flags(p, ("table", "json", "csv"))
    p.set_defaults(fn=_cmd_moments)

    p = sub.add_parser("dispersion", help="over/under/equi classification")
    p.add_argument("--phi", required=True)
    p.add_argument("--rho", type=float, default=None,
                   help="also compute the numeric index Var/Mean")
    _add_output_flags(p, ("table", "json"))
    p.set_defaults(fn=_cmd_dispersion)

    p = sub.add_parser("gamma", help="running-product interpolation W and psi")
    p.add_argument("--phi", required=True)
    p.add_argument("--x", required=True, help="evaluation points, e.g. 0.5,1.5")
    p.add_argument("--quantity", choices=("w", "logw", "psi", "psiprime"),
                   default="w")
    _add_output_flags(p, ("table", "json", "csv"))
    p.set_defaults(fn=_cmd_gamma)

    p = sub.add_parser("sample", help="draw from the distribution")
    _add_dist_flags(p)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    _add_output_flags(p, ("json", "csv", "table"))
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("simulate", help="run the birth-death queue")
    p.add_argument("--phi")
    p.add_argument("--lambda", dest="lam", type=float, help="arrival rate")
    p.add_argument("--mu", type=float, help="base service rate")
    p.add_argument("--lambda-cap", dest="lambda_cap", default=None)
    p.add_argument("--horizon", type=float, default=1e6)
    p.add_argument("--burn-in", dest="burn_in", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--kernel", choices=("python", "compiled"), default=None)
    p.add_argument("--compare", action="store_true",
                   help="also report distance to the stationary law")
    p.add_argument("--spec", help="JSON scenario spec file")
    _add_output_flags(p, ("json", "csv"))
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("catalog", help="list rate functions and class flags")
    _add_output_flags(p, ("table", "json"))
    p.set_defaults(fn=_cmd_catalog)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2
    except EcompError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
