"""Command-line front end: ``heunhyp {eval,qroots,boundary,orbit,verify}``.

Exit codes
----------
0 success, 1 verify failure, 2 bad input, 3 no convergence,
4 parameter pole or inapplicable expansion, 5 no termination case,
6 parameters outside the two-term slice.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys

from . import __version__
from .closed_values import ascending_boundary_values, a_orbit, descending_boundary_values
from .core import HeunParams, heun_residual
from .errors import DomainError, HeunError, NoConvergence, PoleError
from .expansions import build_expansion, expansion_defect, sum_expansion, two_term_failures
from .termination import (CaseKind, TerminationCase, build_finite_solution, check_case,
                          detect_termination_cases, eps_case_n1_quadratic, q_roots)
from .verify import run_all

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_NOCONV, EXIT_POLE, EXIT_NOCASE, EXIT_NOT_TWO_TERM = range(7)

EXPANSIONS = {
    "ascending": "ascending",
    "desc-gamma": "descending:gamma",
    "desc-alpha": "descending:alpha",
    "desc-beta": "descending:beta",
}
PARAM_KEYS = ("a", "q", "alpha", "beta", "gamma", "epsilon")

log = logging.getLogger("heunhyp")


class InputError(Exception):
    """Malformed command-line input (exit code 2)."""


# --------------------------------------------------------------------------
# parameter and option handling


def _number(x, name):
    if isinstance(x, list) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise InputError(f"parameter {name!r} must be a number")
    return float(x)


def load_params(args, need_q: bool = True) -> HeunParams:
    if args.params:
        try:
            with open(args.params) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read parameter file: {exc}") from exc
        if not isinstance(raw, dict):
            raise InputError("parameter file must hold a JSON object")
        if "delta" in raw:
            raise InputError("delta is derived from the other parameters; do not supply it")
        unknown = set(raw) - set(PARAM_KEYS)
        if unknown:
            raise InputError(f"unknown parameter keys: {sorted(unknown)}")
        vals = dict(raw)
    else:
        vals = {k: getattr(args, k) for k in PARAM_KEYS if getattr(args, k) is not None}
    if not need_q:
        vals.setdefault("q", 0.0)
    missing = [k for k in PARAM_KEYS if k not in vals]
    if missing:
        raise InputError(f"missing parameters: {', '.join(missing)}")
    nums = {k: _number(vals[k], k) for k in PARAM_KEYS}
    for k, v in nums.items():
        if k != "q" and isinstance(v, complex):
            raise InputError(f"parameter {k!r} must be real")
    try:
        return HeunParams(**nums)
    except DomainError as exc:
        raise InputError(str(exc)) from exc


def parse_z_list(text: str) -> list[float]:
    try:
        zs = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InputError(f"bad z list {text!r}") from exc
    if not zs:
        raise InputError("empty z list")
    for z in zs:
        if not 0.0 <= z < 1.0:
            raise InputError(f"z out of range: {z!r} is not in [0, 1)")
    return zs


def _check_config(args):
    tol = getattr(args, "tol", None)
    if tol is not None and not 0.0 < tol <= 1e-2:
        raise InputError("tolerance must lie in (0, 1e-2]")
    mt = getattr(args, "max_terms", None)
    if mt is not None and mt < 8:
        raise InputError("--max-terms must be at least 8")


def _num_out(x):
    if x is None:
        return None
    if isinstance(x, complex):
        return [x.real, x.imag]
    return float(x)


def _header(p: HeunParams | None) -> dict:
    out = {"version": __version__}
    if p is not None:
        out["params"] = p.as_dict()
    return out


def _emit_json(obj, out):
    out.write(json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n")


def _emit_csv(header: dict, columns, rows, out):
    out.write(f"# heunhyp {header['version']}\n")
    if "params" in header:
        out.write("# params " + json.dumps(header["params"], sort_keys=True) + "\n")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    out.write(buf.getvalue())


def _fmt(x) -> str:
    if x is None:
        return "unavailable"
    if isinstance(x, complex):
        return f"{x.real:.15g}{x.imag:+.15g}j"
    return f"{x:.15g}"


# --------------------------------------------------------------------------
# subcommands


def _eval_one(p, z, choice, tol, max_terms):
    e = build_expansion(p, EXPANSIONS[choice], z, max_terms)
    if e is None:
        return None
    sv = sum_expansion(p, e, z, tol)
    defect = expansion_defect(p, e).value
    return {"z": z, "value": sv.value, "abs_err": sv.abs_error_estimate,
            "terms": sv.terms_used, "converged": sv.converged,
            "regime": e.spec.regime.value, "expansion": choice,
            "terminated": e.terminated, "defect": defect}


def cmd_eval(args, out) -> int:
    p = load_params(args)
    zs = parse_z_list(args.z)
    if p.alpha * p.beta == 0:
        print("error: the expansions are meaningless if alpha*beta = 0 "
              "(basis functions are constants)", file=sys.stderr)
        return EXIT_POLE
    order = list(EXPANSIONS) if args.expansion == "auto" else [args.expansion]
    rows = []
    status = EXIT_OK
    for z in zs:
        res, fallback, poles = None, None, []
        for choice in order:
            try:
                r = _eval_one(p, z, choice, args.tol, args.max_terms)
            except PoleError as exc:
                poles.append(exc)
                continue
            if r is not None and r["converged"]:
                res = r
                break
            fallback = fallback or r
        if len(poles) == len(order):
            print(f"error: {poles[-1]}", file=sys.stderr)
            return EXIT_POLE
        res = res or fallback or {
            "z": z, "value": math.nan, "abs_err": math.inf, "terms": 0, "converged": False,
            "regime": None, "expansion": None, "terminated": False, "defect": math.nan}
        if not res["converged"]:
            status = EXIT_NOCONV
        rows.append(res)
    header = _header(p)
    if args.format == "json":
        _emit_json({**header, "results": [
            {k: _num_out(v) if k in ("value", "abs_err", "defect") else v for k, v in r.items()}
            for r in rows]}, out)
    elif args.format == "csv":
        cols = ["z", "value_re", "value_im", "abs_err", "terms", "regime", "expansion"]
        data = []
        for r in rows:
            v = complex(r["value"])
            data.append([repr(r["z"]), repr(v.real), repr(v.imag), repr(float(r["abs_err"])),
                         r["terms"], r["regime"] or "", r["expansion"] or ""])
        _emit_csv(header, cols, data, out)
    else:
        out.write(f"heunhyp {__version__}\nparams: {json.dumps(p.as_dict(), sort_keys=True)}\n")
        for r in rows:
            flag = "ok" if r["converged"] else "NOT CONVERGED"
            out.write(f"z={r['z']:<8g} u={_fmt(r['value'])}  err={r['abs_err']:.2e}  "
                      f"terms={r['terms']}  {r['regime']}  {r['expansion']}  "
                      f"defect={_fmt(r['defect'])}  [{flag}]\n")
    return status


def _solution_residual(fs, z=0.25):
    e = fs.expansion
    u, du, d2u = (sum_expansion(fs.params, e, z, deriv=d).value for d in range(3))
    return abs(heun_residual(fs.params, u, du, d2u, z))


def cmd_qroots(args, out) -> int:
    p = load_params(args, need_q=False)
    if args.case is not None:
        if args.N is None or args.N < 0:
            raise InputError("--case needs a non-negative --N")
        case = TerminationCase(CaseKind(args.case), args.N)
        try:
            check_case(p, case)
        except DomainError as exc:
            raise InputError(str(exc)) from exc
        cases = [case]
    else:
        cases = detect_termination_cases(p)
    if not cases:
        print("error: no termination case: none of epsilon, epsilon+gamma-alpha, "
              "epsilon+gamma-beta is a non-positive integer", file=sys.stderr)
        return EXIT_NOCASE
    reports = []
    for case in cases:
        rs = q_roots(p, case)
        entries = []
        for i, r in enumerate(rs.roots):
            entry = {"q": r, "residual": rs.residuals[i]}
            if abs(r.imag) == 0:
                fs = build_finite_solution(p, case, i, roots=rs)
                entry["solution_residual_z0.25"] = _solution_residual(fs)
            if case.kind is CaseKind.EPS and case.N == 1:
                entry["quadratic_check"] = abs(eps_case_n1_quadratic(p, r))
            entries.append(entry)
        reports.append({"case": case.kind.value, "N": case.N, "roots": entries})
    header = _header(p.with_q(0.0))
    header["params"].pop("q")
    if args.format == "json":
        _emit_json({**header, "cases": [
            {**c, "roots": [{k: _num_out(v) for k, v in e.items()} for e in c["roots"]]}
            for c in reports]}, out)
    elif args.format == "csv":
        rows = []
        for c in reports:
            for e in c["roots"]:
                rows.append([c["case"], c["N"], repr(e["q"].real), repr(e["q"].imag),
                             repr(e["residual"]), repr(e.get("solution_residual_z0.25", "")),
                             repr(e.get("quadratic_check", ""))])
        _emit_csv(header, ["case", "N", "q_re", "q_im", "residual", "solution_residual",
                           "quadratic_check"], rows, out)
    else:
        out.write(f"heunhyp {__version__}\nparams: {json.dumps(header['params'], sort_keys=True)}\n")
        for c in reports:
            out.write(f"case {c['case']} N={c['N']}\n")
            for e in c["roots"]:
                line = f"  q={_fmt(e['q'])}  |D_N(q)|={e['residual']:.2e}"
                if "solution_residual_z0.25" in e:
                    line += f"  heun residual at 0.25={e['solution_residual_z0.25']:.2e}"
                if "quadratic_check" in e:
                    line += f"  quadratic check={e['quadratic_check']:.2e}"
                out.write(line + "\n")
    return EXIT_OK


def _bv_row(label, fn):
    try:
        bv = fn()
    except PoleError as exc:
        return {"family": label, "error": str(exc)}
    return {"family": label, "u0": bv.u_at_0, "du0": bv.du_at_0, "u1": bv.u_at_1,
            "methods": {k: v.value for k, v in bv.method_tags.items()}}


def cmd_boundary(args, out) -> int:
    p = load_params(args)
    fails = two_term_failures(p)
    if fails:
        conds = {"a = 1/2": "a != 1/2" not in fails,
                 "gamma + delta = 2": "gamma + delta != 2" not in fails,
                 "q = a*alpha*beta + a*(1-delta)*epsilon":
                     "q != a*alpha*beta + a*(1-delta)*epsilon" not in fails}
        for name, ok in conds.items():
            print(f"{'pass' if ok else 'FAIL'}: {name}", file=sys.stderr)
        print("error: not in the two-term regime: " + ", ".join(fails), file=sys.stderr)
        return EXIT_NOT_TWO_TERM
    rows = [_bv_row("ascending", lambda: ascending_boundary_values(p))]
    for name in ("gamma", "alpha", "beta"):
        rows.append(_bv_row(f"desc-{name}", lambda n=name: descending_boundary_values(p, n)))
    if "error" in rows[0]:
        print(f"error: {rows[0]['error']}", file=sys.stderr)
        return EXIT_POLE
    header = _header(p)
    if args.format == "json":
        _emit_json({**header, "families": [
            {k: _num_out(v) if k in ("u0", "du0", "u1") else v for k, v in r.items()}
            for r in rows]}, out)
    elif args.format == "csv":
        data = [[r["family"], repr(r.get("u0", "")), repr(r.get("du0", "")),
                 repr(r.get("u1")), r.get("error", "")] for r in rows]
        _emit_csv(header, ["family", "u0", "du0", "u1", "error"], data, out)
    else:
        out.write(f"heunhyp {__version__}\nparams: {json.dumps(p.as_dict(), sort_keys=True)}\n")
        for r in rows:
            if "error" in r:
                out.write(f"{r['family']:<11} unavailable: {r['error']}\n")
                continue
            out.write(f"{r['family']:<11} u(0)={_fmt(r['u0'])}  u'(0)={_fmt(r['du0'])}  "
                      f"u(1)={_fmt(r['u1'])}  ({r['methods']['u_at_1']})\n")
    return EXIT_OK


def cmd_orbit(args, out) -> int:
    if args.a is None:
        raise InputError("orbit needs --a")
    try:
        vals = a_orbit(args.a)
    except DomainError as exc:
        raise InputError(str(exc)) from exc
    header = {"version": __version__, "a1": args.a}
    if args.format == "json":
        _emit_json({**header, "orbit": list(vals), "contains_half": 0.5 in vals}, out)
    elif args.format == "csv":
        _emit_csv({"version": __version__}, ["a"], [[repr(v)] for v in vals], out)
    else:
        out.write(f"heunhyp {__version__}\na1 = {args.a!r}\norbit: "
                  + ", ".join(f"{v:.15g}" for v in vals) + "\n")
    return EXIT_OK


def cmd_verify(args, out) -> int:
    tol = args.tol if args.tol_given else None
    results = run_all(args.seed, tol)
    if args.format == "json":
        _emit_json({"version": __version__, "seed": args.seed, "suites": [
            {"name": r.name, "passed": r.passed, "failed": r.failed,
             "worst": float(r.worst), "threshold": r.threshold} for r in results]}, out)
    elif args.format == "csv":
        _emit_csv({"version": __version__}, ["suite", "passed", "failed", "worst", "threshold"],
                  [[r.name, r.passed, r.failed, repr(float(r.worst)), repr(r.threshold)]
                   for r in results], out)
    else:
        out.write(f"heunhyp {__version__}  seed={args.seed}\n")
        for r in results:
            out.write(f"{'PASS' if r.ok else 'FAIL'}  {r.name:<11} {r.passed} passed, "
                      f"{r.failed} failed, worst {float(r.worst):.2e} (threshold {r.threshold:.0e})\n")
    return EXIT_OK if all(r.ok for r in results) else EXIT_VERIFY


# --------------------------------------------------------------------------


class _TolAction(argparse.Action):
    # remembers whether --tol was given explicitly
    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, values)
        namespace.tol_given = True


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--params", help="JSON file with a, q, alpha, beta, gamma, epsilon")
    for k in PARAM_KEYS:
        common.add_argument(f"--{k}", type=float)
    common.add_argument("--tol", type=float, default=1e-10, action=_TolAction)
    common.add_argument("--max-terms", type=int, default=1 << 17)
    common.add_argument("--format", choices=("human", "json", "csv"), default="human")
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(
        prog="heunhyp",
        description="Heun equation solutions via Gauss hypergeometric expansions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", parents=[common], help="sum an expansion at points z")
    ev.add_argument("--z", required=True, help="comma-separated points in [0, 1)")
    ev.add_argument("--expansion", choices=[*EXPANSIONS, "auto"], default="auto")
    ev.set_defaults(func=cmd_eval)

    qr = sub.add_parser("qroots", parents=[common], help="accessory-parameter roots")
    qr.add_argument("--case", choices=[k.value for k in CaseKind])
    qr.add_argument("--N", type=int)
    qr.set_defaults(func=cmd_qroots)

    bd = sub.add_parser("boundary", parents=[common], help="two-term boundary values")
    bd.set_defaults(func=cmd_boundary)

    ob = sub.add_parser("orbit", parents=[common], help="orbit of the singular point a")
    ob.set_defaults(func=cmd_orbit)

    vf = sub.add_parser("verify", parents=[common], help="randomized self-check suites")
    vf.set_defaults(func=cmd_verify)
    return parser


def main(argv=None, out=None) -> int:
    if os.environ.get("HEUN_LOG", "").lower() == "debug":
        logging.basicConfig(level=logging.DEBUG, stream=sys.stderr,
                            format="%(name)s %(levelname)s %(message)s")
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "tol_given"):
        args.tol_given = False
    try:
        _check_config(args)
        return args.func(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PoleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_POLE
    except NoConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    except DomainError as exc:
        msg = str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_POLE if "meaningless" in msg else EXIT_INPUT
    except HeunError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_POLE


if __name__ == "__main__":
    sys.exit(main())
