"""Command-line front end.

Every subcommand writes machine-readable data: CSV with a ``#`` metadata
line echoing the full configuration, or JSON carrying the same fields.
Numbers are printed with 15 significant digits.

Exit codes: 0 success, 1 usage error, 2 parameter regime error,
3 validation failure.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import collapse, validation
from .ed import convergence_sweep, diagonalize
from .gfunction import g_curve, pole_0, pole_n
from .model import ModelParams, Parity, RegimeError
from .spectrum import (
    NoFirstOrderTransition,
    exceptional_nondegenerate,
    sweep,
)

EXIT_OK, EXIT_USAGE, EXIT_REGIME, EXIT_VALIDATION = 0, 1, 2, 3

COLUMNS = {
    "gcurve": "E,G_plus,G_minus,is_break",
    "spectrum": "g,level_index,E,parity,kind",
    "crossings": "n,g,E,source,ground_state",
    "exceptional": "m,parity,g,E",
    "collapse": "branch,n,E,omega_eff,N_approx",
    "ed": "index,E,parity,photon_number",
    "convergence": "n_tr,level,E",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else f"{float(v):.15g}"
    return str(v)


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        return None if math.isnan(v) else float(f"{float(v):.15g}")
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def _csv_block(columns, rows, config=None):
    buf = io.StringIO()
    if config is not None:
        buf.write("# " + json.dumps(config, sort_keys=True) + "\n")
    buf.write(columns + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _table(columns, rows):
    names = columns.split(",")
    return [{k: _jsonable(v) for k, v in zip(names, row)} for row in rows]


def _emit(args, text, suffix=None):
    if args.out is None or args.out == "-":
        sys.stdout.write(text)
        return
    path = Path(args.out)
    if suffix:
        path = path.with_name(path.stem + suffix)
    path.write_text(text)


def _config(args):
    skip = {"func", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _params(args, require="boa"):
    if args.omega <= 0:
        raise UsageError("--omega must be positive")
    try:
        params = ModelParams(args.delta, getattr(args, "g", 0.0) or 0.0, args.u, args.omega)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if require == "boa" and not params.is_boa_regime:
        raise RegimeError(f"|u/omega| = {abs(params.stark_ratio):g}: this command needs |u| < 2 omega")
    if require == "collapse" and not params.is_collapse_regime:
        raise RegimeError(f"|u/omega| = {abs(params.stark_ratio):g}: collapse needs |u| = 2 omega")
    return params


def _positive(name, value):
    if not value > 0:
        raise UsageError(f"--{name} must be positive")


def cmd_gcurve(args):
    params = _params(args)
    curve = g_curve(args.emin, args.emax, args.samples, params)
    config = _config(args)
    rows = list(curve.rows())
    poles = {"pole0": curve.poles.pole0,
             "poles": [p for p in curve.poles.poles if p <= args.emax],
             "omega_poles": [p for p in curve.poles.omega_poles if p <= args.emax]}
    if args.format == "json":
        _emit(args, json.dumps({"config": config, "columns": COLUMNS["gcurve"].split(","),
                                "rows": _table(COLUMNS["gcurve"], rows), "poles": poles},
                               sort_keys=True, indent=1) + "\n")
    else:
        _emit(args, _csv_block(COLUMNS["gcurve"], rows, config))
        if args.out not in (None, "-"):
            _emit(args, json.dumps(poles, sort_keys=True, indent=1) + "\n", ".poles.json")
    return EXIT_OK


def _g_grid(args):
    if args.gsteps < 1:
        raise UsageError("--gsteps must be at least 1")
    if args.gmax < args.gmin or args.gmin < 0:
        raise UsageError("need 0 <= gmin <= gmax")
    return np.linspace(args.gmin, args.gmax, args.gsteps)


def cmd_spectrum(args):
    params = _params(args)
    grid = _g_grid(args)
    res = sweep(params, grid, (args.emin, args.emax), tol=args.tol, n_general=args.n_general)
    rows = list(res.rows())
    cross = [(c.n, c.g, c.energy, c.source, c.ground_state) for c in res.crossings]
    config = _config(args)
    if args.format == "json":
        doc = {"config": config, "levels": _table(COLUMNS["spectrum"], rows),
               "crossings": _table(COLUMNS["crossings"], cross),
               "transition_g": _jsonable(res.transition_g) if res.transition_g else None}
        _emit(args, json.dumps(doc, sort_keys=True, indent=1) + "\n")
    else:
        _emit(args, _csv_block(COLUMNS["spectrum"], rows, config))
        block = _csv_block(COLUMNS["crossings"], cross, config)
        if args.out in (None, "-"):
            sys.stdout.write("\n" + block)
        else:
            _emit(args, block, ".crossings.csv")
    return EXIT_OK


def cmd_exceptional(args):
    params = _params(args)
    parities = [Parity.EVEN, Parity.ODD] if args.parity == "both" else [Parity.coerce(args.parity)]
    rows = []
    for m in args.m:
        for par in parities:
            for g in exceptional_nondegenerate(m, par, params, (args.gmin, args.gmax)):
                pg = params.with_g(g)
                energy = pole_0(pg) if m == 0 else pole_n(m, pg)
                rows.append((m, par.label, g, energy))
    config = _config(args)
    if args.format == "json":
        _emit(args, json.dumps({"config": config, "rows": _table(COLUMNS["exceptional"], rows)},
                               sort_keys=True, indent=1) + "\n")
    else:
        _emit(args, _csv_block(COLUMNS["exceptional"], rows, config))
    return EXIT_OK


def cmd_collapse(args):
    params = _params(args, require="collapse")
    p = params.normalized()
    rows = []
    try:
        for s in collapse.lower_branch(p.delta, p.g, args.levels, p.u):
            rows.append(("lower", s.n, s.energy * params.omega, s.omega_eff,
                         collapse.photon_number_approx(p.delta, p.g, s.energy, p.u)))
    except collapse.NoLowerBranch:
        pass
    for s in collapse.upper_branch(p.delta, p.g, args.upper_levels, p.u):
        rows.append(("upper", s.n, s.energy * params.omega, s.omega_eff, float("nan")))
    config = _config(args)
    d_eff = collapse.effective_delta(p.delta, p.u)
    extra = {"E_c": collapse.collapse_energy(p.delta, p.g, p.u) * params.omega}
    if d_eff < 1:
        extra["g_c"] = collapse.critical_point(p.delta, p.u)[0] * params.omega
    if args.format == "json":
        _emit(args, json.dumps({"config": config, **extra,
                                "rows": _table(COLUMNS["collapse"], rows)},
                               sort_keys=True, indent=1) + "\n")
    else:
        config = {**config, **{k: float(f"{v:.15g}") for k, v in extra.items()}}
        _emit(args, _csv_block(COLUMNS["collapse"], rows, config))
    return EXIT_OK


def cmd_ed(args):
    params = _params(args, require="any")
    if abs(params.stark_ratio) > 2:
        raise RegimeError("the oracle covers |u| <= 2 omega only")
    config = _config(args)
    parity = None if args.parity == "both" else Parity.coerce(args.parity)
    if args.ntr_list:
        table = convergence_sweep(params, args.ntr_list, args.levels, parity=parity)
        rows = list(table.rows())
        if args.format == "json":
            doc = {"config": config, "rows": _table(COLUMNS["convergence"], rows),
                   "drift": [_jsonable(v) for v in table.drift],
                   "converged": [bool(v) for v in table.converged]}
            _emit(args, json.dumps(doc, sort_keys=True, indent=1) + "\n")
        else:
            _emit(args, _csv_block(COLUMNS["convergence"], rows, config))
        return EXIT_OK
    res = diagonalize(params, args.ntr, parity=parity)
    k = min(args.levels, len(res.eigenvalues))
    if args.format == "json":
        doc = res.to_dict()
        for key in ("eigenvalues", "parities", "photon_numbers"):
            doc[key] = [_jsonable(v) for v in doc[key][:k]]
        doc["config"] = config
        _emit(args, json.dumps(doc, sort_keys=True, indent=1) + "\n")
    else:
        rows = [(i, res.eigenvalues[i], Parity(int(res.parities[i])).label, res.photon_numbers[i])
                for i in range(k)]
        _emit(args, _csv_block(COLUMNS["ed"], rows, config))
    return EXIT_OK


def cmd_validate(args):
    checks = validation.run(args.grid)
    report = "\n".join(c.line() for c in checks) + "\n"
    failed = sum(not c.passed for c in checks)
    report += f"{len(checks) - failed}/{len(checks)} checks passed\n"
    _emit(args, report)
    return EXIT_OK if failed == 0 else EXIT_VALIDATION


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


def build_parser():
    parser = _Parser(prog="rabistark", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, need_g=True):
        sp.add_argument("--delta", type=float, required=True, help="qubit frequency")
        sp.add_argument("--omega", type=float, default=1.0, help="cavity frequency (energy unit)")
        sp.add_argument("--u", type=float, default=0.0, help="Stark coupling")
        if need_g:
            sp.add_argument("--g", type=float, required=True, help="dipole coupling")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--out", default=None, help="output path (default: stdout)")

    sp = sub.add_parser("gcurve", help="sample G_plus / G_minus on an energy grid",
                        description=f"CSV columns: {COLUMNS['gcurve']}. Pole locations go to "
                                    "<out>.poles.json (embedded in JSON output).")
    common(sp)
    sp.add_argument("--emin", type=float, default=-1.0)
    sp.add_argument("--emax", type=float, default=4.0)
    sp.add_argument("--samples", type=int, default=2001)
    sp.set_defaults(func=cmd_gcurve)

    sp = sub.add_parser("spectrum", help="regular spectrum versus g with crossing ladder",
                        description=f"CSV columns: {COLUMNS['spectrum']}; crossing table "
                                    f"({COLUMNS['crossings']}) follows or goes to "
                                    "<out>.crossings.csv.")
    common(sp, need_g=False)
    sp.add_argument("--gmin", type=float, default=0.0)
    sp.add_argument("--gmax", type=float, default=1.2)
    sp.add_argument("--gsteps", type=int, default=121)
    sp.add_argument("--emin", type=float, default=-2.0)
    sp.add_argument("--emax", type=float, default=3.0)
    sp.add_argument("--tol", type=float, default=1e-10, help="root tolerance (energy)")
    sp.add_argument("--n-general", type=int, default=3, dest="n_general",
                    help="highest pole line searched for general Juddian points")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("exceptional", help="nondegenerate exceptional couplings",
                        description=f"CSV columns: {COLUMNS['exceptional']}")
    common(sp, need_g=False)
    sp.add_argument("--m", type=int, nargs="+", default=[0, 1, 2, 3])
    sp.add_argument("--parity", default="both", choices=("both", "+", "-", "even", "odd"))
    sp.add_argument("--gmin", type=float, default=0.01)
    sp.add_argument("--gmax", type=float, default=1.5)
    sp.set_defaults(func=cmd_exceptional)

    sp = sub.add_parser("collapse", help="|u| = 2 omega branch solutions",
                        description=f"CSV columns: {COLUMNS['collapse']}")
    common(sp)
    sp.set_defaults(u=2.0)
    sp.add_argument("--levels", type=int, default=20, help="lower-branch levels")
    sp.add_argument("--upper-levels", type=int, default=3, dest="upper_levels")
    sp.set_defaults(func=cmd_collapse)

    sp = sub.add_parser("ed", help="exact diagonalisation in a truncated Fock space",
                        description=f"CSV columns: {COLUMNS['ed']}; with --ntr-list: "
                                    f"{COLUMNS['convergence']}")
    common(sp)
    sp.add_argument("--ntr", type=int, default=300)
    sp.add_argument("--ntr-list", type=_int_list, default=None, dest="ntr_list",
                    help="comma separated truncations for a convergence table")
    sp.add_argument("--levels", type=int, default=20)
    sp.add_argument("--parity", default="both", choices=("both", "+", "-", "even", "odd"))
    sp.set_defaults(func=cmd_ed)

    sp = sub.add_parser("validate", help="cross-check all solvers against ED")
    sp.add_argument("--grid", choices=sorted(validation.GRIDS), default="standard")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        for name in ("tol",):
            if hasattr(args, name):
                _positive(name, getattr(args, name))
        return args.func(args)
    except UsageError as exc:
        print(f"rabistark: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RegimeError, NoFirstOrderTransition, collapse.NoCollapse) as exc:
        print(f"rabistark: regime error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except OSError as exc:
        print(f"rabistark: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
