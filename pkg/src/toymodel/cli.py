"""Command-line front end.

Every verb prints JSON (or CSV where noted) on standard output. Exit codes:
0 success, 1 unreadable or malformed input, 2 domain error. Errors are
reported as ``{"error": {"type": ..., "message": ...}}``.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import sys
from pathlib import Path

from . import io
from .bell import BellScenario, sample_chsh, scenario_report
from .errors import FormatError, InvalidStateError, ToyModelError
from .measurements import complement, complement_dist
from .measures import PURE_TOL, is_pure, measure, solve_r
from .multisystem import is_valid_pure_joint
from .optimizer import DEFAULT_GRID, DEFAULT_REFINE, DEFAULT_RESTARTS, sweep_csv, sweep_r
from .render import render
from .states import EpistemicDist, FiducialSet, observables, p_to_q, q_to_p

DEFAULT_SWEEP = [-0.99, -0.9, -0.5, -0.147, 0.0, 1.0, 5.0, 20.0, 50.0]

RENDER_HELP = """Draw a p = 2 state as a 2x2 box.
Rows are x_a (top row x_a = 0), columns are x_b (left column x_b = 0), so
"is X_a = 0?" asks about the upper two compartments. Ontic states show one
'###' cell, canonical pure states two '1/2' cells; anything else shows all
four weights with negatives marked '!'."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise FormatError(message)


def _as_state(args) -> EpistemicDist | FiducialSet:
    return io.load(args.state, "state")


def _want(state, kind: str):
    if kind == "p":
        return state if isinstance(state, EpistemicDist) else q_to_p(state)
    return state if isinstance(state, FiducialSet) else p_to_q(state)


def cmd_observables(args):
    obs = observables(args.p)
    if args.format == "csv":
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "label", "k_a", "k_b"])
        for o in obs:
            w.writerow([o.index, o.label, o.ka.value, o.kb.value])
        return buf.getvalue()
    return {"p": args.p, "observables": [{"index": o.index, "label": o.label, "k_a": o.ka.value, "k_b": o.kb.value}
                                         for o in obs]}


def cmd_measure(args):
    return {"r": args.r, "value": measure(_as_state(args), args.r)}


def cmd_purity(args):
    st = _as_state(args)
    return {"r": args.r, "value": measure(st, args.r), "target": 1.0 / st.p,
            "pure": is_pure(st, args.r, tol=args.tol)}


def cmd_solve_r(args):
    P = _want(_as_state(args), "p")
    target = args.target if args.target is not None else 1.0 / P.p
    return {"target": target, "r": solve_r(P, target)}


def cmd_convert(args):
    st = _as_state(args)
    if args.src and (args.src == "p") != isinstance(st, EpistemicDist):
        raise FormatError(f"state file is not in {args.src.upper()} form")
    return io.state_to_dict(_want(st, args.dst))


def cmd_complement(args):
    st = _as_state(args)
    if isinstance(st, FiducialSet):
        return io.state_to_dict(complement(st))
    return io.state_to_dict(complement_dist(st))


def cmd_bell(args):
    M, Mp = io.load(args.scenario, "scenario", tol=args.tol)
    if M.r != Mp.r:
        raise InvalidStateError(f"S and Sprime use different r ({M.r} vs {Mp.r})")
    scenario = BellScenario(M, Mp)
    out = scenario_report(scenario)
    if args.sample:
        out["sample"] = sample_chsh(scenario, args.sample, args.seed)
    return out


def cmd_sweep(args):
    rs = args.r if args.r else DEFAULT_SWEEP
    pts = sweep_r(rs, args.mode, seed=args.seed, grid=args.grid, refine=DEFAULT_REFINE,
                  restarts=args.restarts)
    if args.format == "csv":
        return sweep_csv(pts)
    return {"mode": args.mode, "points": [
        {"r": pt.r, "b_max": pt.b_max, "S": io.state_to_dict(pt.argmax_S)["Q"],
         "Sprime": io.state_to_dict(pt.argmax_Sprime)["Q"]} for pt in pts]}


def cmd_validate_joint(args):
    J = io.load(args.joint, "joint")
    ok, violations = is_valid_pure_joint(J, args.r, tol=args.tol)
    return {"valid": ok, "violations": [
        {"condition": v.condition, "systems": list(v.systems),
         "measured": [{"system": s, "observable": i, "value": x} for s, i, x in v.measured],
         "value": v.value, "bound": v.bound, "text": str(v)} for v in violations]}


def cmd_render(args):
    return render(_as_state(args))


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="toymodel", description="Extended epistemic toy model tools.")
    ap.add_argument("--out", type=Path, help="write output here instead of stdout")
    sub = ap.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def add(name, func, help_text, **kw):
        p = sub.add_parser(name, help=help_text.splitlines()[0], description=help_text,
                           formatter_class=argparse.RawDescriptionHelpFormatter, **kw)
        p.set_defaults(func=func)
        p.add_argument("--out", type=Path, default=argparse.SUPPRESS, help="output path")
        return p

    p = add("observables", cmd_observables, "List the p + 1 fiducial observables.")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--format", choices=["json", "csv"], default="json")

    for name, func, doc in (("measure", cmd_measure, "M_r of a P state, N_r of a Q state."),
                            ("purity", cmd_purity, "Whether a state sits at the purity level 1/p.")):
        p = add(name, func, doc)
        p.add_argument("--r", type=float, required=True)
        p.add_argument("--state", required=True)
        if name == "purity":
            p.add_argument("--tol", type=float, default=PURE_TOL)

    p = add("solve-r", cmd_solve_r, "The r at which M_r of a state hits a target (default 1/p).")
    p.add_argument("--state", required=True)
    p.add_argument("--target", type=float)

    p = add("convert", cmd_convert, "Convert between P (epistemic) and Q (fiducial) form.")
    p.add_argument("--from", dest="src", choices=["p", "q"])
    p.add_argument("--to", dest="dst", choices=["p", "q"], required=True)
    p.add_argument("--state", required=True)

    p = add("complement", cmd_complement, "Complement a p = 2 state: every Q_i(x) -> 1 - Q_i(x).")
    p.add_argument("--state", required=True)

    p = add("bell", cmd_bell, "CHSH value and correlators for a scenario file.")
    p.add_argument("--scenario", required=True)
    p.add_argument("--tol", type=float, default=1e-6, help="purity tolerance for S and Sprime")
    p.add_argument("--sample", type=int, default=0, help="also estimate B from N samples per setting")
    p.add_argument("--seed", type=int, default=0)

    p = add("sweep", cmd_sweep, "Maximize |B| over pure S, S' for each r.")
    p.add_argument("--r", type=float, nargs="+", action="extend",
                   help=f"r values (default {DEFAULT_SWEEP})")
    p.add_argument("--mode", choices=["nonneg", "extended"], default="nonneg")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID)
    p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    p.add_argument("--seed", type=int, default=0)

    p = add("validate-joint", cmd_validate_joint, "Check the multi-system purity rules on a joint file.")
    p.add_argument("--joint", required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--tol", type=float, default=PURE_TOL)

    p = add("render", cmd_render, RENDER_HELP)
    p.add_argument("--state", required=True)
    return ap


def _error(exc: Exception) -> str:
    return io.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}) + "\n"


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        try:
            out.write_text(text)
        except OSError as exc:
            raise FormatError(f"cannot write {out}: {exc.strerror}") from exc


def main(argv=None) -> int:
    out = None
    try:
        args = build_parser().parse_args(argv)
        out = args.out
        result = args.func(args)
        text = result if isinstance(result, str) else io.dumps(result) + "\n"
        _emit(text, out)
        return 0
    except FormatError as exc:
        sys.stdout.write(_error(exc))
        return 1
    except ToyModelError as exc:
        sys.stdout.write(_error(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
