"""``horoxt`` command line: densities, orbit simulation and verification suites.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 capacity or
horizon error.  Every output embeds the version, the full configuration and
the seed; reruns with the same flags produce identical bytes.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__, dist, mc, suites
from .errors import CapacityError, DomainError, HorizonError, HoroxtError
from .section import OrbitSpec, direct_crossing_oracle, hit_arrays, sup_excursion
from .sl2core import GroupElement

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAPACITY = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    return "%.17g" % x


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(config: dict, seed, header: list[str], rows, footer: list[str] = ()) -> str:
    lines = [f"# horoxt {__version__}",
             "# config: " + json.dumps(config, sort_keys=True),
             f"# seed: {seed}",
             ",".join(header)]
    for row in rows:
        lines.append(",".join(str(v) if isinstance(v, (int, np.integer)) else _fmt(v) for v in row))
    lines += [f"# {f}" for f in footer]
    return "\n".join(lines) + "\n"


def _json(config: dict, seed, body: dict) -> str:
    record = {"version": __version__, "config": config, "seed": seed}
    record.update(body)
    return json.dumps(record, indent=2, sort_keys=True) + "\n"


# -- density ----------------------------------------------------------------------

def _grid(args) -> np.ndarray:
    if args.at is not None:
        return np.array(args.at, dtype=float)
    if None in (args.start, args.stop, args.step):
        raise UsageError("give either --at or all of --from, --to, --step")
    if not args.step > 0 or args.stop < args.start:
        raise UsageError("grid needs --step > 0 and --to >= --from")
    k = int(round((args.stop - args.start) / args.step))
    return args.start + args.step * np.arange(k + 1)


def cmd_density(args) -> int:
    x = _grid(args)
    if args.name == "psi":
        vals = dist.hall_psi(x)
    elif args.name == "rho":
        vals = dist.rho(x)
    elif args.name == "omega":
        vals = dist.omega_y(x, args.ell)
    else:
        vals = dist.hall_psi_rt(x, args.t)
    vals = np.atleast_1d(vals)
    config = {"command": "density", "name": args.name, "grid": x.size,
              "from": float(x[0]), "to": float(x[-1]), "ell": args.ell, "t": args.t}
    if args.format == "json":
        text = _json(config, None, {"x": x.tolist(), "value": vals.tolist()})
    else:
        text = _csv(config, None, ["x", "value"], zip(x, vals))
    _emit(text, args.out)
    return EXIT_OK


# -- simulate -----------------------------------------------------------------------

def _g0(args) -> GroupElement:
    if args.g0:
        try:
            a, b, c, d = (float(v) for v in args.g0.split(","))
        except ValueError as exc:
            raise UsageError("--g0 takes four comma-separated numbers a,b,c,d") from exc
        return GroupElement(a, b, c, d)
    if args.seed is None:
        return GroupElement.identity()
    return mc.sample_initial(mc.SamplerSpec(seed=args.seed), args.index)


def cmd_simulate(args) -> int:
    g0 = _g0(args)
    spec = OrbitSpec(g0, args.R, args.T)
    config = {"command": "simulate", "what": args.what, "g0": [g0.a, g0.b, g0.c, g0.d],
              "T": args.T, "R": args.R, "index": args.index, "oracle": args.oracle}
    status = EXIT_OK
    if args.what == "sup":
        height, when = sup_excursion(spec)
        body = {"sup_height": height, "argmax_time": when}
        if args.format == "csv":
            text = _csv(config, args.seed, ["sup_height", "argmax_time"], [(height, when)])
        else:
            text = _json(config, args.seed, body)
        _emit(text, args.out)
        return status
    h = hit_arrays(g0, args.R, args.T)
    cols = ["xi", "s", "t", "xi_entry", "delta"]
    rows = [(j + 1, *(h[k][j] for k in cols), int(h["c"][j]), int(h["d"][j]))
            for j in range(len(h["xi"]))]
    report = None
    if args.oracle:
        o = direct_crossing_oracle(spec)
        same = len(o) == len(rows)
        dxi = max((abs(e.xi - r[1]) for e, r in zip(o, rows)), default=0.0) if same else math.inf
        dt = max((abs(e.t - r[3]) for e, r in zip(o, rows)), default=0.0) if same else math.inf
        ok = same and dxi <= 1e-7 and dt <= 1e-7
        report = {"oracle_hits": len(o), "hits": len(rows), "max_dxi": float(dxi),
                  "max_dt": float(dt), "match": bool(ok)}
        status = EXIT_OK if ok else EXIT_FAIL
    header = ["j", "xi", "s", "t", "xi_entry", "delta", "c", "d"]
    if args.format == "json":
        body = {"hits": [dict(zip(header, r)) for r in rows]}
        if report:
            body["oracle"] = report
        text = _json(config, args.seed, body)
    else:
        footer = []
        if report:
            footer = ["oracle: " + json.dumps(report, sort_keys=True)]
        text = _csv(config, args.seed, header, rows, footer)
    _emit(text, args.out)
    return status


# -- verify -----------------------------------------------------------------------------

def cmd_verify(args) -> int:
    name = args.suite
    kw = {}
    if name in ("oracle", "scaling", "siegel", "extreme", "firsthit", "kac", "indicator"):
        kw["seed"] = args.seed if args.seed is not None else 0
    if args.n is not None:
        if name in ("constants", "farey"):
            raise UsageError(f"suite {name!r} takes no --n")
        kw["n"] = args.n
    if args.Q is not None:
        if name != "farey":
            raise UsageError("--Q applies to the farey suite only")
        kw["Q"] = args.Q
    if args.T is not None:
        if name not in ("oracle", "scaling", "extreme"):
            raise UsageError(f"suite {name!r} takes no --T")
        kw["T"] = args.T
    if args.R is not None:
        if name not in ("oracle", "firsthit"):
            raise UsageError(f"suite {name!r} takes no --R")
        kw["R"] = args.R
    checks = suites.SUITES[name](**kw)
    passed = suites.suite_passed(checks)
    config = {"command": "verify", "suite": name, **{k: v for k, v in kw.items() if k != "seed"}}
    body = {"suite": name, "passed": passed, "checks": [c.as_dict() for c in checks]}
    _emit(_json(config, kw.get("seed"), body), args.out)
    for c in checks:
        print(c.line(), file=sys.stderr)
    return EXIT_OK if passed else EXIT_FAIL


# -- parser -----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="horoxt", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"horoxt {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, formats=("csv", "json"), default="csv"):
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--format", choices=formats, default=default)

    d = sub.add_parser("density", help="tabulate a limit density")
    d.add_argument("name", choices=["psi", "rho", "omega", "psi_rt"])
    d.add_argument("--from", dest="start", type=float)
    d.add_argument("--to", dest="stop", type=float)
    d.add_argument("--step", type=float)
    d.add_argument("--at", type=float, nargs="+")
    d.add_argument("--ell", type=float, default=0.0, help="shift for omega")
    d.add_argument("--t", type=float, default=0.0, help="impact height for psi_rt")
    common(d)
    d.set_defaults(func=cmd_density)

    s = sub.add_parser("simulate", help="hit process or sup height of one orbit")
    s.add_argument("what", choices=["hits", "sup"])
    s.add_argument("--g0", help="initial matrix a,b,c,d (default identity)")
    s.add_argument("--seed", type=int, help="draw g0 from Haar measure with this seed")
    s.add_argument("--index", type=int, default=0, help="sample index for --seed")
    s.add_argument("--T", type=float, default=1.0)
    s.add_argument("--R", type=float, default=0.0)
    s.add_argument("--oracle", action="store_true", help="cross-check with the direct oracle")
    common(s)
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=sorted(suites.SUITES))
    v.add_argument("--n", type=int)
    v.add_argument("--seed", type=int)
    v.add_argument("--Q", type=int)
    v.add_argument("--T", type=float)
    v.add_argument("--R", type=float)
    common(v, formats=("json",), default="json")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "seed", None) is not None and not 0 <= args.seed < 1 << 64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (CapacityError, HorizonError) as exc:
        print(f"horoxt: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except DomainError as exc:
        print(f"horoxt: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HoroxtError as exc:
        print(f"horoxt: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
