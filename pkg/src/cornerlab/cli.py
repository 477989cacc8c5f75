"""Command-line entry point: ``cornerlab <command> [options]``.

Exit codes: 0 success, 1 a structural violation was found, 2 usage error.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, montecarlo as mc, render, xor
from .builders import cycle_from_pair_hikers, cycle_from_pair_trace
from .contours import _centered_ranges, all_cycles, cycle_of_origin, level_set_census, marginals
from .errors import BudgetExceeded, CornerLabError, RenderRefused
from .excursions import DOWN, UP, sample_pair
from .lattice import WindowSpec, height_map, height_map_by_path, make_window
from .rng import stream
from .series import L_sequence, fit_exponent

# built-in values of the global flags; None on the parser means "not given"
GLOBAL_DEFAULTS = {"seed": 0, "bias": 0.5, "samples": None, "out": None, "format": "json",
                   "max_window": 1 << 14, "threads": 1, "mode": "signs"}

ESTIMATE_NAMES = ("P", "diam_tail", "closure", "L_mc", "T_mc", "length_by_diameter",
                  "level0_total", "crossing", "torus", "sweep")
VARIANT_NAMES = ("2xor", "trixor", "4xor")


class UsageError(Exception):
    pass


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    g.add_argument("--bias", type=float, default=None, help="probability of a + sign (default 0.5)")
    g.add_argument("--samples", type=int, default=None, help="sample count")
    g.add_argument("--out", default=None, help="output file (default stdout)")
    g.add_argument("--format", choices=("json", "csv", "svg"), default=None)
    g.add_argument("--max-window", type=int, default=None, help="largest window side (default 16384)")
    g.add_argument("--threads", type=int, default=None,
                   help="worker processes; CORNERLAB_THREADS overrides")
    g.add_argument("--mode", choices=("signs", "steps"), default=None,
                   help="bias the signs or the walk steps")
    g.add_argument("--config", default=None, help="JSON file with option values")
    g.add_argument("--timing", action="store_true", help="keep wall times in reports")

    p = argparse.ArgumentParser(prog="cornerlab", description="Corner percolation laboratory.")
    p.add_argument("--version", action="version", version=f"cornerlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", parents=[common], help="generate and draw a window")
    s.add_argument("--size", type=int, default=64)
    s.add_argument("--heights", action="store_true", help="draw the height map instead of edges")
    s.add_argument("--scale", type=int, default=8)

    s = sub.add_parser("cycle", parents=[common], help="cycle through the origin")
    s.add_argument("--scale", type=int, default=16)

    s = sub.add_parser("exact-l", parents=[common], help="exact L(h) sequence and exponent fit")
    s.add_argument("--hmax", type=int, default=1024)
    s.add_argument("--exact-cutoff", type=int, default=64)
    s.add_argument("--h-lo", type=int, default=64)

    s = sub.add_parser("estimate", parents=[common], help="Monte Carlo estimators")
    s.add_argument("name", choices=ESTIMATE_NAMES)
    s.add_argument("--h", type=int, default=2, help="height for L_mc / T_mc")
    s.add_argument("--n", type=int, default=64, help="square side (crossing) or torus half-period")
    s.add_argument("--values", type=_int_list, default=None,
                   help="comma-separated h, n or N values for fitted estimators")
    s.add_argument("--bias-values", type=_float_list, default=None, help="for sweep")
    s.add_argument("--estimator", default="closure", help="estimator run by sweep")

    s = sub.add_parser("variant", parents=[common], help="xor variants")
    s.add_argument("name", choices=VARIANT_NAMES)
    s.add_argument("--size", type=int, default=256)
    s.add_argument("--include-field", action="store_true",
                   help="embed the first field, run-length encoded")

    sub.add_parser("verify", parents=[common], help="run the structural property suite")
    return p


def resolve(args):
    """Fill global options: flag, then config file, then built-in default."""
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
    for k, v in GLOBAL_DEFAULTS.items():
        if getattr(args, k, None) is None:
            setattr(args, k, cfg.get(k, v))
    for k, v in cfg.items():
        if not hasattr(args, k):
            setattr(args, k, v)
    env = os.environ.get("CORNERLAB_THREADS")
    if env:
        args.threads = int(env)
    return args


def _need(args, fmts):
    if args.format not in fmts:
        raise UsageError(f"{args.command} supports --format {', '.join(fmts)}, not {args.format}")


# ---- commands -------------------------------------------------------------------

def cmd_sample(args):
    spec = WindowSpec.centered(args.seed, args.size, args.bias, args.mode)
    w = make_window(spec)
    if args.format == "svg":
        if args.heights:
            return render.render_height_svg(w, args.scale), 0
        return render.render_window_svg(w, args.scale), 0
    cycles = sorted(all_cycles(w), key=lambda c: tuple(c.vertices[0]))
    if args.format == "csv":
        rows = [[c.length, c.level, c.direction, c.diameter, *c.rect.as_list()] for c in cycles]
        return render.rows_csv(["length", "level", "direction", "diameter", "a", "c", "b", "d"], rows), 0
    payload = {"command": "sample", "window": json.loads(spec.to_json()), "n_cycles": len(cycles),
               "cycles": [c.to_dict() for c in cycles]}
    return render.report_json(payload), 0


def cmd_cycle(args):
    spec = WindowSpec(args.seed, (0, 0), (0, 0), args.bias, args.bias, args.mode)
    try:
        c = cycle_of_origin(spec, 32, args.max_window)
    except BudgetExceeded as e:
        t = e.partial
        if args.format == "svg":
            raise UsageError("origin component did not close; nothing to draw") from None
        payload = {"command": "cycle", "seed": args.seed, "closed": False,
                   "max_window": args.max_window, "walked_length": t.length,
                   "bbox": list(t.bbox), "height_lower": t.height_lower}
        if args.format == "csv":
            return render.rows_csv(["closed", "walked_length", "height_lower"],
                                   [[0, t.length, t.height_lower]]), 0
        return render.report_json(payload), 0
    c.seed = args.seed
    if args.format == "svg":
        return render.render_cycle_svg(c, args.scale), 0
    if args.format == "csv":
        return render.rows_csv(["x", "y"], c.vertices.tolist()), 0
    payload = {"command": "cycle", "closed": True, **c.to_dict(include_vertices=True)}
    return render.report_json(payload), 0


def cmd_exact_l(args):
    _need(args, ("json", "csv"))
    series = L_sequence(args.hmax, args.exact_cutoff)
    if args.format == "csv":
        return series.to_csv(), 0
    payload = {"command": "exact-l", "hmax": args.hmax, "exact_cutoff": args.exact_cutoff,
               "max_relative_error": series.max_relative_error(),
               "L": [float(series.L_float[h]) for h in range(1, args.hmax + 1)]}
    if args.hmax >= 2 * args.h_lo:
        fit = fit_exponent(series, h_lo=args.h_lo)
        payload["fit"] = fit.to_dict()
    return render.report_json(payload), 0


def _report_out(args, rep):
    if args.format == "csv":
        if isinstance(rep, mc.FitReport):
            return rep.to_csv()
        return render.rows_csv(["name", "samples", "estimate", "stderr", "ci_lo", "ci_hi", "seed"],
                               [[rep.name, rep.samples, repr(rep.estimate), repr(rep.stderr),
                                 repr(rep.ci[0]), repr(rep.ci[1]), rep.seed]])
    return render.report_json(rep.to_dict(), args.timing)


def cmd_estimate(args):
    _need(args, ("json", "csv"))
    n, kw = args.name, {"seed": args.seed, "threads": args.threads}
    if args.samples is not None:
        kw["samples"] = args.samples
    vals = args.values
    if n == "P":
        rep = mc.estimate_P(vals or (4, 8, 16, 32, 64), bias=args.bias, mode=args.mode,
                            max_window=args.max_window, **kw)
    elif n == "diam_tail":
        rep = mc.estimate_diam_tail(vals or (4, 16, 64, 256, 1024), bias=args.bias, mode=args.mode,
                                    max_window=args.max_window, **kw)
    elif n == "closure":
        rep = mc.estimate_closure(bias=args.bias, mode=args.mode, max_window=args.max_window, **kw)
    elif n == "L_mc":
        rep = mc.estimate_L_mc(args.h, **kw)
    elif n == "T_mc":
        rep = mc.estimate_T_mc(args.h, **kw)
    elif n == "length_by_diameter":
        rep = mc.estimate_length_by_diameter(**kw)
    elif n == "level0_total":
        rep = mc.estimate_level0_total(vals or (64, 128, 256, 512), bias=args.bias, mode=args.mode, **kw)
    elif n == "crossing":
        rep = mc.estimate_crossing(args.n, bias=args.bias, mode=args.mode, **kw)
    elif n == "torus":
        rep = mc.estimate_torus(args.n, bias=args.bias, **kw)
    else:
        if args.format != "json":
            raise UsageError("sweep writes JSON only")
        params = dict(kw)
        if args.estimator in ("closure", "P", "diam_tail"):
            params["max_window"] = args.max_window
        if args.estimator == "crossing":
            params["n"] = args.n
        reps = mc.biased_sweep(args.bias_values or (0.5, 0.6), args.estimator, params, args.mode)
        viol = mc.structural_violations(reps)
        payload = {"command": "estimate sweep", "estimator": args.estimator,
                   "reports": [r.to_dict() for r in reps], "violations": viol}
        if not args.timing:
            for r in payload["reports"]:
                r.pop("wall_time", None)
        return render.report_json(payload), int(any(viol.values()))
    return _report_out(args, rep), int(any(rep.violations.values()))


def cmd_variant(args):
    _need(args, ("json", "csv"))
    samples = args.samples or 4
    if args.name == "2xor":
        rows, open_frac = [], []
        for k in range(samples):
            s = mc.sample_seed(args.seed, "2xor", k)
            f = xor.gen_2xor(((0, args.size - 1), (0, args.size - 1)), s)
            open_frac.append(float((f.horizontal.sum() + f.vertical.sum())
                                   / (f.horizontal.size + f.vertical.size)))
            rows.append([k, open_frac[-1]])
        if args.format == "csv":
            return render.rows_csv(["sample", "open_fraction"], rows), 0
        payload = {"command": "variant 2xor", "size": args.size, "samples": samples,
                   "seed": args.seed, "open_fraction": open_frac}
        if args.include_field:
            f = xor.gen_2xor(((0, args.size - 1), (0, args.size - 1)),
                             mc.sample_seed(args.seed, "2xor", 0))
            payload["horizontal"] = render.rle_encode(f.horizontal)
            payload["vertical"] = render.rle_encode(f.vertical)
        return render.report_json(payload), 0
    out = xor.variant_study(args.name, args.size, samples, args.seed)
    code = int(bool(out.get("even_violations")))
    if args.format == "csv":
        return render.rows_csv(["n", "P_tail"], list(zip(out["tail_n"], out["tail_P"]))), code
    if args.include_field:
        s = int(stream(args.seed, args.name, 0).integers(1 << 62))
        f = (xor.gen_trixor(args.size, s) if args.name == "trixor"
             else xor.gen_kxor(4, xor.FOURXOR_FAMILIES, (args.size, args.size), s))
        out["field"] = render.rle_encode(f.states)
    out["command"] = f"variant {args.name}"
    return render.report_json(out), code


def verify_suite(seed=0, samples=100, size=64, max_window=1 << 12):
    """Structural checks; every counter in the result must be zero.

    ``samples`` windows of side ``size`` are checked for degree, height and
    bijection properties, and as many compatible pairs for builder
    agreement.  Crossing, torus and trixor constraints get one small run each.
    """
    cnt = {"degree": 0, "height": 0, "bijection": 0, "trichotomy": 0, "builders": 0,
           "both_crossings": 0, "avoid_unbalanced": 0, "trixor_even": 0}
    checked = {"windows": 0, "cycles": 0, "pairs": 0}
    for k in range(samples):
        w = make_window(WindowSpec(mc.sample_seed(seed, "verify", k), *_centered_ranges(size)))
        checked["windows"] += 1
        if not np.array_equal(height_map(w), height_map_by_path(w)):
            cnt["height"] += 1
        try:
            census = level_set_census(w)
        except CornerLabError:
            cnt["degree"] += 1
            continue
        cnt["trichotomy"] += census.violations
        for c in census.cycles:
            checked["cycles"] += 1
            try:
                marginals(w, c)
            except CornerLabError:
                cnt["bijection"] += 1
        rng = stream(seed, "verify-pair", k)
        h = int(rng.integers(1, 13))
        pair = sample_pair(h, rng, UP if k % 2 == 0 else DOWN)
        checked["pairs"] += 1
        try:
            if cycle_from_pair_hikers(pair) != cycle_from_pair_trace(pair):
                cnt["builders"] += 1
        except CornerLabError:
            cnt["builders"] += 1
    small = max(10, samples // 10)
    cnt["both_crossings"] += mc.estimate_crossing(32, small, seed).violations["both_crossings"]
    cnt["avoid_unbalanced"] += mc.estimate_torus(4, small, seed).violations["avoid_unbalanced"]
    for k in range(small):
        cnt["trixor_even"] += xor.even_zero_violations(
            xor.gen_trixor(32, mc.sample_seed(seed, "verify-trixor", k)).states)
    return cnt, checked


def cmd_verify(args):
    _need(args, ("json",))
    cnt, checked = verify_suite(args.seed, args.samples or 100)
    payload = {"command": "verify", "seed": args.seed, "violations": cnt, "checked": checked}
    return render.report_json(payload), int(any(cnt.values()))


COMMANDS = {"sample": cmd_sample, "cycle": cmd_cycle, "exact-l": cmd_exact_l,
            "estimate": cmd_estimate, "variant": cmd_variant, "verify": cmd_verify}


def main(argv=None):
    """Run the CLI and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        args = resolve(args)
        text, code = COMMANDS[args.command](args)
    except (UsageError, RenderRefused, ValueError) as e:
        print(f"cornerlab: error: {e}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader closed early (e.g. piped into head)
            sys.stdout = open(os.devnull, "w")
    return code


if __name__ == "__main__":
    sys.exit(main())
