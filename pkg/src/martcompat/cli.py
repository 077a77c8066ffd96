"""Batch command line: junction tables, parameter curves, scans, feasibility.

Four subcommands. `table1` summarizes every partner plate of the base plate:
incompatibility angles under both lattice-parameter conventions, junction
existence, shear magnitude ranges and stability. `curves` sweeps a lambda
grid and emits CSV for the shear amounts, the rigidity indicator, the
dislocation density norm, or the separation margins. `scan` runs the full
slip-pair search at one lambda and emits a JSON report. `twowell` reads a
JSON problem file and prints the corner feasibility verdict.

Exit codes: 0 on success, 2 for configuration problems, 3 when a numerical
hypothesis needed by the requested computation fails. Errors are reported
as a single JSON object on stderr.
"""

import argparse
import dataclasses
import json
import sys

import numpy as np

from .compat import incompatibility_angle
from .errors import (DegenerateDenominator, HypothesisFailed,
                     MiddleEigenvalueError, NoBranch, NoTwinAxis,
                     OrderingFailed, OrthogonalityFailed)
from .crystal import habit_plate_map
from .junction import (SQRT2, case_junction, dislocation_density_norm,
                       eta_xi, local_rigidity, scan_junctions,
                       separation_margin, stability_check)
from .linalg import DEFAULT_TOLERANCES, Tolerances
from .twowell import two_well_bc_feasible

# measured lattice parameters of the reference alloy; the unit-determinant
# convention replaces d by 1/lam
EXPERIMENTAL_LAM = 1.0331
EXPERIMENTAL_D = 0.9661

TABLE_LAM_LO = 1.033
TABLE_LAM_HI = 1.035


class ConfigError(Exception):
    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _fmt(x):
    return "%.12g" % x


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_csv(header, rows, out_path):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            _fmt(c) if isinstance(c, float) else str(c) for c in row))
    _emit("\n".join(lines) + "\n", out_path)


def _emit_json(obj, out_path):
    _emit(json.dumps(obj, indent=2) + "\n", out_path)


def _error_json(kind, message, detail=None):
    payload = {"error": kind, "message": message}
    if detail:
        payload["detail"] = detail
    sys.stderr.write(json.dumps(payload) + "\n")


def _parse_base(text):
    parts = text.split(",")
    if len(parts) != 2 or parts[1] not in ("+", "-"):
        raise ConfigError("--base must look like I,SIGMA with SIGMA in {+,-}")
    try:
        idx = int(parts[0])
    except ValueError:
        raise ConfigError("--base variant index must be an integer")
    if not 1 <= idx <= 6:
        raise ConfigError("--base variant index must be between 1 and 6")
    return idx, parts[1]


def _parse_partners(text):
    if text.strip() == "":
        return []
    return [_parse_base(chunk) for chunk in text.split(";")]


def _parse_lambda_range(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError("--lambda-range must look like LO:HI:STEP")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError:
        raise ConfigError("--lambda-range parts must be numbers")
    if step <= 0.0 or not lo < hi:
        raise ConfigError("--lambda-range needs LO < HI and STEP > 0")
    return lo, hi, step


def _lambda_grid(lo, hi, step):
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + k * step for k in range(count)]


def _parse_tolerances(overrides):
    if not overrides:
        return DEFAULT_TOLERANCES
    names = {f.name for f in dataclasses.fields(Tolerances)}
    values = {}
    for item in overrides:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError("--tol-override must look like KEY=VAL")
        if key not in names:
            raise ConfigError("unknown tolerance %r (known: %s)"
                              % (key, ", ".join(sorted(names))))
        try:
            values[key] = float(val)
        except ValueError:
            raise ConfigError("tolerance %s must be a number" % key)
    try:
        return dataclasses.replace(DEFAULT_TOLERANCES, **values)
    except ValueError as exc:
        raise ConfigError(str(exc))


def _resolve_format(args, default, allowed):
    fmt = args.format or default
    if fmt not in allowed:
        raise ConfigError("%s output supports only %s"
                          % (args.command, "/".join(sorted(allowed))))
    return fmt


def _slip_record(slip):
    return {"direction": [int(round(x)) for x in slip.direction],
            "plane": [int(round(x)) for x in slip.plane_normal],
            "family": int(slip.family)}


def _junction_record(j, tol):
    record = {
        "partner": [j.plate2.variant, j.plate2.sign],
        "slip1": _slip_record(j.slip1),
        "slip2": _slip_record(j.slip2),
        "t1": j.t1,
        "t2": j.t2,
        "b": [float(x) for x in j.b],
        "m": [float(x) for x in j.m],
        "residual": j.residual,
        "curl_norm": dislocation_density_norm(j),
    }
    try:
        rig = local_rigidity(j, tol)
        record["rigidity"] = {"rigid": rig.rigid, "f_value": rig.f_value,
                              "f_normalized": rig.f_normalized}
    except HypothesisFailed as exc:
        record["rigidity"] = {"rigid": False, "error": str(exc)}
    margins = {}
    for side, plate, slip in ((1, j.plate1, j.slip1), (2, j.plate2, j.slip2)):
        rep = separation_margin(j.sheared_gradient(side), plate.variant,
                                slip, j.lam, j.d, tol)
        margins["side%d" % side] = rep.margin
    record["separation"] = margins
    verdict = stability_check(j, j.plate1.n, j.plate2.n, tol)
    record["stability"] = {"stable": verdict.stable,
                           "reasons": verdict.reasons}
    return record


def cmd_table1(args):
    tol = _parse_tolerances(args.tol_override)
    fmt = _resolve_format(args, "csv", {"csv", "json"})
    base_key = _parse_base(args.base)
    lam = args.lam if args.lam is not None else EXPERIMENTAL_LAM
    plates_exp = habit_plate_map(EXPERIMENTAL_LAM, EXPERIMENTAL_D)
    plates_det = habit_plate_map(lam, 1.0 / lam)

    def by_partner(scan_lam):
        grouped = {}
        for j in scan_junctions(scan_lam, None, base_key, None, tol):
            grouped.setdefault(j.plate2.key, []).append(j)
        return grouped

    lo_groups = by_partner(TABLE_LAM_LO)
    hi_groups = by_partner(TABLE_LAM_HI)

    rows = []
    for key in sorted(k for k in plates_det if k != base_key):
        angle_exp = incompatibility_angle(
            plates_exp[base_key].gradient, plates_exp[key].gradient, tol)
        angle_det = incompatibility_angle(
            plates_det[base_key].gradient, plates_det[key].gradient, tol)
        lo, hi = lo_groups.get(key, []), hi_groups.get(key, [])
        row = {"partner": list(key),
               "angle_deg_experimental": angle_exp.degrees,
               "angle_deg_unit_det": angle_det.degrees}
        if lo and hi:
            mags_lo = sorted(abs(t) for j in lo for t in (j.t1, j.t2))
            mags_hi = sorted(abs(t) for j in hi for t in (j.t1, j.t2))
            verdict = stability_check(lo[0], lo[0].plate1.n,
                                      lo[0].plate2.n, tol)
            row.update({"verdict": "V_II",
                        "shear_small_low": mags_lo[0],
                        "shear_small_high": mags_hi[0],
                        "shear_big_low": mags_lo[-1],
                        "shear_big_high": mags_hi[-1],
                        "stable": "yes" if verdict.stable else "no"})
        else:
            row.update({"verdict": "none", "shear_small_low": "",
                        "shear_small_high": "", "shear_big_low": "",
                        "shear_big_high": "", "stable": ""})
        rows.append(row)

    if fmt == "json":
        _emit_json(rows, args.out)
        return 0
    header = ["partner_index", "partner_sign", "angle_deg_experimental",
              "angle_deg_unit_det", "verdict", "shear_small_low",
              "shear_small_high", "shear_big_low", "shear_big_high", "stable"]
    csv_rows = [[row["partner"][0], row["partner"][1],
                 row["angle_deg_experimental"], row["angle_deg_unit_det"],
                 row["verdict"], row["shear_small_low"],
                 row["shear_small_high"], row["shear_big_low"],
                 row["shear_big_high"], row["stable"]] for row in rows]
    _emit_csv(header, csv_rows, args.out)
    return 0


def cmd_curves(args):
    tol = _parse_tolerances(args.tol_override)
    _resolve_format(args, "csv", {"csv"})
    if not args.lambda_range:
        raise ConfigError("curves requires --lambda-range LO:HI:STEP")
    lo, hi, step = _parse_lambda_range(args.lambda_range)
    if not (1.0 < lo and hi < SQRT2):
        raise ConfigError("the lambda range must stay inside (1, sqrt(2))")
    grid = _lambda_grid(lo, hi, step)
    cases = "abcd"
    if args.which == "eta_xi":
        header = ["lambda", "eta1", "eta2", "xi1", "xi2"]
        rows = [[lam, *(float(v) for v in eta_xi(lam))] for lam in grid]
    elif args.which == "rigidity_f":
        header = ["lambda"] + ["f_%s" % c for c in cases]
        rows = [[lam] + [local_rigidity(case_junction(c, 1, lam, tol),
                                        tol).f_normalized
                         for c in cases] for lam in grid]
    elif args.which == "curl":
        header = ["lambda"] + ["curl_%s" % c for c in cases]
        rows = [[lam] + [dislocation_density_norm(case_junction(c, 1, lam, tol))
                         for c in cases] for lam in grid]
    else:
        header = ["lambda"] + ["margin_%s" % c for c in cases]
        rows = []
        for lam in grid:
            row = [lam]
            for c in cases:
                j = case_junction(c, 1, lam, tol)
                row.append(min(
                    separation_margin(j.sheared_gradient(1), j.plate1.variant,
                                      j.slip1, lam, j.d, tol).margin,
                    separation_margin(j.sheared_gradient(2), j.plate2.variant,
                                      j.slip2, lam, j.d, tol).margin))
            rows.append(row)
    _emit_csv(header, rows, args.out)
    return 0


def cmd_scan(args):
    tol = _parse_tolerances(args.tol_override)
    _resolve_format(args, "json", {"json"})
    if args.lam is None:
        raise ConfigError("scan requires --lambda")
    lam = args.lam
    d = args.d if args.d is not None else 1.0 / lam
    base_key = _parse_base(args.base)
    partner_keys = None
    if args.partners is not None:
        partner_keys = _parse_partners(args.partners)
        if base_key in partner_keys:
            raise ConfigError("the base plate cannot be its own partner")
    junctions = scan_junctions(lam, d, base_key, partner_keys, tol)
    records = [_junction_record(j, tol) for j in junctions]
    report = {
        "lambda": lam,
        "d": d,
        "base": list(base_key),
        "junction_count": len(records),
        "stable_count": sum(1 for r in records if r["stability"]["stable"]),
        "junctions": records,
    }
    _emit_json(report, args.out)
    return 0


def _load_matrix(data, key, shape):
    if key not in data:
        raise ConfigError("input file is missing %r" % key)
    arr = np.asarray(data[key], dtype=float)
    if arr.shape != shape:
        raise ConfigError("%r must have shape %s" % (key, (shape,)))
    return arr


def cmd_twowell(args):
    tol = _parse_tolerances(args.tol_override)
    _resolve_format(args, "json", {"json"})
    if not args.input:
        raise ConfigError("twowell requires --input FILE")
    try:
        with open(args.input) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(str(exc))
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            "invalid JSON in %s: %s" % (args.input, exc.msg),
            detail={"line": exc.lineno, "column": exc.colno})
    U1 = _load_matrix(data, "U1", (3, 3))
    U2 = _load_matrix(data, "U2", (3, 3))
    F1 = _load_matrix(data, "F1", (3, 3))
    F2 = _load_matrix(data, "F2", (3, 3))
    n1 = _load_matrix(data, "n1", (3,))
    n2 = _load_matrix(data, "n2", (3,))
    result = two_well_bc_feasible(U1, U2, n1, n2, F1, F2, tol)
    verdict = {
        "hypothesis_ok": bool(result.hypothesis_ok),
        "feasible": bool(result.feasible),
        "d": None if result.d is None else [float(x) for x in result.d],
    }
    _emit_json(verdict, args.out)
    return 0


def _build_parser():
    parser = _Parser(prog="martcompat",
                     description="compatibility structures of martensitic "
                                 "transformations: tables, curves, scans")
    common = _Parser(add_help=False)
    common.add_argument("--lambda", dest="lam", type=float, default=None,
                        help="middle stretch of the orthorhombic variant")
    common.add_argument("--lambda-range", dest="lambda_range", default=None,
                        metavar="LO:HI:STEP", help="lambda sweep grid")
    common.add_argument("--d", dest="d", type=float, default=None,
                        help="smallest stretch (defaults to 1/lambda)")
    common.add_argument("--base", default="1,+", metavar="I,SIGMA",
                        help="base habit plate, e.g. 1,+")
    common.add_argument("--out", default=None, metavar="PATH",
                        help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=None,
                        help="output format where a choice exists")
    common.add_argument("--tol-override", action="append", default=None,
                        metavar="KEY=VAL", help="override one tolerance")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("table1", parents=[common],
                   help="per-partner junction summary table")
    curves = sub.add_parser("curves", parents=[common],
                            help="lambda sweep curves as CSV")
    curves.add_argument("which",
                        choices=("eta_xi", "rigidity_f", "curl", "separation"))
    scan = sub.add_parser("scan", parents=[common],
                          help="full junction scan at one lambda")
    scan.add_argument("--partners", default=None, metavar="LIST",
                      help="semicolon-separated plate keys, e.g. '3,+;4,-'")
    twowell = sub.add_parser("twowell", parents=[common],
                             help="corner feasibility verdict from a JSON "
                                  "input file")
    twowell.add_argument("--input", default=None, metavar="PATH",
                         help="JSON file with U1, U2, F1, F2, n1, n2")
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {"table1": cmd_table1, "curves": cmd_curves,
                   "scan": cmd_scan, "twowell": cmd_twowell}[args.command]
        return handler(args)
    except ConfigError as exc:
        _error_json("config", str(exc), exc.detail)
        return 2
    except (HypothesisFailed, MiddleEigenvalueError, NoTwinAxis,
            DegenerateDenominator, NoBranch, OrderingFailed,
            OrthogonalityFailed, ArithmeticError) as exc:
        _error_json("hypothesis", str(exc))
        return 3
    except ValueError as exc:
        _error_json("config", str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
