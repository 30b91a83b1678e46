"""Command-line front end: ``blip <command> [flags]``.

Exit codes: 0 success, 1 runtime error, 2 usage error, 3 failed check.
Errors are reported as one ``error: ...`` line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from .dtasep import blip_identity_check, edge_coupling_probe
from .env import alignment_env, format_env, gen_bernoulli_env, gen_word, parse_env
from .lpp import as_fraction, format_fraction, passage_G
from .montecarlo import (
    McConfig,
    mc_alignment_lpp,
    mc_edge_distribution,
    mc_region_profile,
    mc_tw_check,
)
from .parametric import critical_penalties, region_summary
from .seeds import SeedSpec, make_rng

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, EXIT_CHECK = 0, 1, 2, 3

COMMANDS = ("gen-env", "passage", "regions", "dtasep-check", "edge-couple",
            "mc-regions", "mc-edge", "mc-tw", "mc-align", "bounds")


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    def __init__(self, message: str, payload: str):
        super().__init__(message)
        self.payload = payload


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _n_range(text: str) -> tuple[int, int, int]:
    parts = text.split(":")
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad n range {text!r}") from None
    if len(vals) == 1:
        return vals[0], vals[0], 1
    if len(vals) == 2:
        return vals[0], vals[1], 1
    if len(vals) == 3:
        return tuple(vals)
    raise argparse.ArgumentTypeError(f"bad n range {text!r}")


def _s_grid(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad s grid {text!r}") from None


def _rational(text: str) -> Fraction:
    try:
        return as_fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad rational {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--model", choices=("independent", "alignment"), default="independent")
    common.add_argument("--p", type=float, default=None)
    common.add_argument("--alphabet", type=int, default=None)
    common.add_argument("--a", type=float, default=0.5)
    common.add_argument("--x", type=float, default=1.0)
    common.add_argument("--s", type=_s_grid, default=(-2.0, -1.0, 0.0, 1.0),
                        help="comma-separated s values")
    common.add_argument("--alpha", type=_rational, default=Fraction(0))
    common.add_argument("--beta", type=_rational, default=Fraction(0))
    common.add_argument("--n", type=_n_range, default=None, help="n or start:stop:step")
    common.add_argument("--m", type=int, default=None)
    common.add_argument("--N", type=int, default=None)
    common.add_argument("--reps", type=int, default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--env", default=None, help="environment file, '-' for stdin")
    common.add_argument("--out", default=None)
    common.add_argument("--gnuplot", action="store_true",
                        help="write CSV to --out and print a gnuplot script")
    common.add_argument("--check", action="store_true",
                        help="exit 3 when the command's consistency check fails")
    parser = _Parser(prog="blip", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


# --- helpers ------------------------------------------------------------------

def _single_n(args) -> int:
    if args.n is None:
        raise UsageError("--n is required")
    start, stop, _ = args.n
    if start != stop:
        raise UsageError("this command takes a single --n")
    return start


def _load_env(args):
    if args.env in (None, "-"):
        text = sys.stdin.read()
    else:
        with open(args.env) as fh:
            text = fh.read()
    return parse_env(text)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, default=_json_default) + "\n"


def _json_default(v):
    if isinstance(v, Fraction):
        return format_fraction(v)
    raise TypeError(f"cannot serialise {type(v).__name__}")


def _rational_json(v: Fraction):
    return int(v) if v.denominator == 1 else format_fraction(v)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format_fraction(c) if isinstance(c, Fraction) else
                    repr(c) if isinstance(c, float) else c for c in r])
    return buf.getvalue()


def _mc_config(args) -> McConfig:
    if args.n is None:
        raise UsageError("--n is required")
    start, stop, step = args.n
    p = args.p
    if args.model == "independent" and p is None:
        p = 0.5
    return McConfig(
        model=args.model, p=p if args.model == "independent" else None,
        alphabet=args.alphabet, a=args.a, x=args.x,
        n_start=start, n_stop=stop, n_step=step,
        reps=25 if args.reps is None else args.reps,
        seed=args.seed, workers=args.workers,
        beta=format_fraction(args.beta), s_grid=args.s,
    )


# --- commands -----------------------------------------------------------------

def cmd_gen_env(args) -> str:
    n = _single_n(args)
    if args.m is None:
        raise UsageError("--m is required")
    seed = SeedSpec(args.seed, "gen-env")
    if args.model == "independent":
        env = gen_bernoulli_env(args.m, n, 0.5 if args.p is None else args.p, seed)
    else:
        if args.alphabet is None:
            raise UsageError("--alphabet is required for the alignment model")
        env = alignment_env(gen_word(args.m, args.alphabet, seed.child("wx")),
                            gen_word(n, args.alphabet, seed.child("wy")))
    if args.format == "json":
        tag = env.provenance.tag
        return _dumps({"m": env.m, "n": env.n, "provenance": tag, "seed": args.seed,
                       "env": format_env(env)})
    if args.format == "csv":
        return _csv(["j", "row"], [(j + 1, r) for j, r in enumerate(env.rows())])
    return format_env(env)


def cmd_passage(args) -> str:
    env = _load_env(args)
    g = passage_G(env, (args.alpha, args.beta))
    if args.format == "csv":
        return _csv(["m", "n", "alpha", "beta", "G"], [(env.m, env.n, args.alpha, args.beta, g)])
    return json.dumps(_rational_json(g)) + "\n"


def cmd_regions(args) -> str:
    env = _load_env(args)
    dec = critical_penalties(env)
    if args.format == "csv":
        return dec.to_csv()
    starts = (Fraction(0),) + dec.breakpoints
    return _dumps({
        "m": env.m, "n": env.n,
        "breakpoints": [format_fraction(b) for b in dec.breakpoints],
        "num_breakpoints": dec.num_breakpoints,
        "regions": dec.num_regions,
        "lines": [{"from_beta": format_fraction(b), "x": st.x, "y": st.y, "z": st.z}
                  for b, st in zip(starts, dec.stats())],
    })


def cmd_bounds(args) -> str:
    env = _load_env(args)
    summary = region_summary(env)
    summary["breakpoints"] = [format_fraction(b) for b in summary["breakpoints"]]
    if args.format == "csv":
        keys = [k for k in sorted(summary) if not isinstance(summary[k], list)]
        return _csv(keys, [[summary[k] for k in keys]])
    summary["lines"] = [list(t) for t in summary["lines"]]
    return _dumps(summary)


def cmd_dtasep_check(args) -> str:
    trials = 10 ** 4 if args.reps is None else args.reps
    if trials < 1:
        raise ValueError("reps must be >= 1")
    ps = (0.1, 0.5, 0.9) if args.p is None else (args.p,)
    fixed_n = _single_n(args) if args.n is not None else None
    checked, failures = 0, []
    for t in range(trials):
        spec = SeedSpec(args.seed, "dtasep-check", (t,))
        rng = make_rng(spec.child("size"))
        m = args.m if args.m is not None else int(rng.integers(1, 31))
        n = fixed_n if fixed_n is not None else int(rng.integers(1, 31))
        p = ps[t % len(ps)]
        res = blip_identity_check(gen_bernoulli_env(m, n, p, spec.child("env")),
                                  spec.child("field"))
        checked += 1
        if not res.match:
            failures.append({"trial": t, "m": m, "n": n, "p": p, "lhs": res.lhs, "rhs": res.rhs})
    if args.format == "csv":
        payload = _csv(["trials", "mismatches"], [(checked, len(failures))])
    else:
        payload = _dumps({"trials": checked, "mismatches": len(failures),
                          "seed": args.seed, "failures": failures})
    if failures:
        raise CheckFailed(f"{len(failures)} of {checked} identity checks failed", payload)
    return payload


def cmd_edge_couple(args) -> str:
    n = _single_n(args)
    if args.m is None or args.N is None:
        raise UsageError("--m and --N are required")
    reps = 10 ** 5 if args.reps is None else args.reps
    p = 0.5 if args.p is None else args.p
    probe = edge_coupling_probe(args.m, n, args.N, reps, SeedSpec(args.seed, "edge-couple"), p)
    diff = probe.p_left - probe.p_right
    ok = abs(diff) <= 3 * probe.se
    row = {"m": args.m, "n": n, "N": args.N, "p": p, "reps": reps,
           "p_left": probe.p_left, "p_right": probe.p_right, "se": probe.se,
           "diff": diff, "within_3se": ok}
    if args.format == "csv":
        keys = list(row)
        payload = _csv(keys, [[row[k] for k in keys]])
    else:
        payload = _dumps(row)
    if args.check and not ok:
        raise CheckFailed(f"|p_left - p_right| = {abs(diff)!r} exceeds 3 SE", payload)
    return payload


_MC = {
    "mc-regions": mc_region_profile,
    "mc-edge": mc_edge_distribution,
    "mc-tw": mc_tw_check,
    "mc-align": mc_alignment_lpp,
}


def cmd_mc(args) -> str:
    report = _MC[args.command](_mc_config(args))
    if args.gnuplot:
        if not args.out:
            raise UsageError("--gnuplot needs --out for the CSV data")
        with open(args.out, "w") as fh:
            fh.write(report.to_csv())
        return report.gnuplot_script(args.out)
    if args.format == "csv":
        return report.to_csv()
    return report.to_json() + "\n"


_DISPATCH = {
    "gen-env": cmd_gen_env,
    "passage": cmd_passage,
    "regions": cmd_regions,
    "bounds": cmd_bounds,
    "dtasep-check": cmd_dtasep_check,
    "edge-couple": cmd_edge_couple,
    **{name: cmd_mc for name in _MC},
}


def _emit(payload: str, args) -> None:
    if args.out and not args.gnuplot:
        with open(args.out, "w") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def _fail(message: str) -> None:
    print("error: " + " ".join(str(message).split()), file=sys.stderr)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.gnuplot and not args.command.startswith("mc-"):
            raise UsageError("--gnuplot applies to mc-* commands only")
        _emit(_DISPATCH[args.command](args), args)
    except UsageError as e:
        _fail(f"usage: {e}")
        return EXIT_USAGE
    except CheckFailed as e:
        _emit(e.payload, args)
        _fail(f"check: {e}")
        return EXIT_CHECK
    except (ValueError, ArithmeticError, OSError, KeyError, TypeError) as e:
        _fail(e)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
