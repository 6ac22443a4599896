"""Command-line front end.

Exit codes: 0 success or accept, 1 reject (certify) or a failed reproduction,
2 on any error.  Reports go to stdout as JSON, diagnostics to stderr.
"""

import argparse
import csv
import io
import json
import sys

import numpy as np

from .classify import classify
from .errors import FrameforgeError, UnknownScenario
from .linalg import DEFAULT_TOL
from .reduction import DELTA_MIN, GAMMA_MARGIN, angle_profile, certify, scan_generic
from .scenarios import parse_matrix, resolve
from .sweep import grid_data
from .torus import SamplingGrid

DEFAULT_GRID = 256


def _json_default(x):
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def dump(doc, out):
    out.write(json.dumps(doc, indent=2, default=_json_default))
    out.write("\n")


def _grid(scenario, n):
    return SamplingGrid(scenario.field.dimension, n)


def cmd_classify(args, out):
    sc = resolve(args.scenario)
    report = classify(sc.field, _grid(sc, args.grid), DEFAULT_TOL)
    dump({"scenario": sc.name, **report.to_dict()}, out)
    return 0


def cmd_certify(args, out):
    sc = resolve(args.scenario)
    A = parse_matrix(args.matrix, "--matrix")
    cert = certify(A, sc.field, _grid(sc, args.grid), DEFAULT_TOL, args.method,
                   args.delta_min, args.gamma_margin)
    dump({"scenario": sc.name, "method": args.method, "accepted": cert.accepted, **cert.to_dict()}, out)
    return 0 if cert.accepted else 1


def cmd_scan(args, out):
    sc = resolve(args.scenario)
    rep = scan_generic(sc.field, args.ell, args.trials, args.seed, _grid(sc, args.grid), DEFAULT_TOL)
    dump({"scenario": sc.name, "ell": args.ell, "grid": args.grid, **rep.to_dict()}, out)
    return 0


def profile_rows(field, grid, A=None, tol=DEFAULT_TOL):
    """Header and rows of the per-point profile, lexicographic in omega."""
    data = grid_data(field, grid, tol)
    d, m = field.dimension, field.size
    header = [f"omega_{i + 1}" for i in range(d)] + [f"eig_{i + 1}" for i in range(m)] + ["rank"]
    sines = None
    if A is not None:
        header.append("sine")
        sines = [s for _, s in angle_profile(A, field, grid, tol)]
    rows = []
    for i in range(data.size):
        row = [repr(float(x)) for x in data.points[i]]
        row += [repr(float(x)) for x in data.eigenvalues[i]]
        row.append(str(int(data.ranks[i])))
        if sines is not None:
            row.append(repr(sines[i]))
        rows.append(row)
    return header, rows, sines


def cmd_profile(args, out):
    sc = resolve(args.scenario)
    grid = _grid(sc, args.grid)
    A = parse_matrix(args.matrix, "--matrix") if args.matrix is not None else None
    header, rows, sines = profile_rows(sc.field, grid, A)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    if args.csv is None:
        out.write(buf.getvalue())
        return 0
    with open(args.csv, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
    summary = {"scenario": sc.name, "grid": args.grid, "rows": len(rows), "csv": args.csv}
    if sines is not None:
        i = int(np.argmin(sines))
        summary["minSine"] = sines[i]
        summary["minSineOmega"] = [float(x) for x in rows[i][: sc.field.dimension]]
    dump(summary, out)
    return 0


def cmd_reproduce(args, out):
    from .reproduce import CRITERIA, run

    results = run(args.name)
    dump({
        "criteria": [r.to_dict() for r in results],
        "passed": all(r.passed for r in results),
        "known": list(CRITERIA),
    }, out)
    return 0 if all(r.passed for r in results) else 1


def build_parser():
    p = argparse.ArgumentParser(prog="frameforge", description="Frames of translates and their reductions.")
    sub = p.add_subparsers(dest="command", required=True)

    def with_grid(sp):
        sp.add_argument("scenario", help="built-in name or scenario JSON file")
        sp.add_argument("--grid", type=int, default=DEFAULT_GRID, help="points per axis")
        return sp

    sp = with_grid(sub.add_parser("classify", help="classify the system of translates"))
    sp.set_defaults(func=cmd_classify)

    sp = with_grid(sub.add_parser("certify", help="certify that A Phi generates a frame"))
    sp.add_argument("--matrix", required=True, help="JSON matrix, entries numbers or [re, im]")
    sp.add_argument("--method", choices=("geometric", "analytic", "both"), default="both")
    sp.add_argument("--delta-min", type=float, default=DELTA_MIN)
    sp.add_argument("--gamma-margin", type=float, default=GAMMA_MARGIN)
    sp.set_defaults(func=cmd_certify)

    sp = with_grid(sub.add_parser("scan", help="genericity scan over random matrices"))
    sp.add_argument("--ell", type=int, required=True)
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_scan)

    sp = with_grid(sub.add_parser("profile", help="per-point spectra (and sines) as CSV"))
    sp.add_argument("--matrix", default=None)
    sp.add_argument("--csv", default=None, help="write CSV here instead of stdout")
    sp.set_defaults(func=cmd_profile)

    sp = sub.add_parser("reproduce-paper", help="run the acceptance checks")
    sp.add_argument("name", nargs="?", default="all")
    sp.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if getattr(args, "trials", 0) < 0:
        print("frameforge: error: --trials must be >= 0", file=sys.stderr)
        return 2
    try:
        return args.func(args, out)
    except (FrameforgeError, UnknownScenario, OSError) as exc:
        where = getattr(args, "scenario", None)
        prefix = f"{where}: " if where else ""
        print(f"frameforge: error: {prefix}{exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
