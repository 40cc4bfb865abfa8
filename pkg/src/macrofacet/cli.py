"""Command-line entry point: compile, verify, select, optimal, simulate.

Exit codes: 0 success, 1 validation failure, 2 infeasible or over a size
limit, 3 internal invariant breach (a bug).  Diagnostics go to stderr as one
JSON object per line.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import warnings
from pathlib import Path

from . import _accel
from .chronicle import chronicle_from_json, compile_chronicle, mset_from_json, mset_to_json
from .errors import (InfeasibleError, InvariantError, LimitExceededError,
                     MacrofacetError, SchemaError, ZeroCostWarning)
from .matroid import (AXIOM_LIMIT, build_quota_tree, constraints_from_json,
                      tree_to_json, verify_matroid_axioms)
from .selection import (approximation_ratio, brute_force_optimal, greedy_select,
                        lazy_greedy_select)
from .simulation import ExperimentConfig, run_experiment
from .utility import (EXHAUSTIVE_LIMIT, ScriptedUtility, utility_from_json,
                      verify_monotone_submodular)

OUT_DIR_ENV = "MACROFACET_OUT_DIR"

EXIT_OK, EXIT_INVALID, EXIT_LIMIT, EXIT_BUG = 0, 1, 2, 3


class Failure(Exception):
    def __init__(self, exit_code, code, text, witness=None):
        super().__init__(text)
        self.exit_code = exit_code
        self.code = code
        self.witness = witness


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def diagnostic(severity, code, text, witness=None):
    print(json.dumps({"severity": severity, "code": code, "text": text, "witness": witness},
                     sort_keys=True), file=sys.stderr)


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise Failure(EXIT_INVALID, "IO_ERROR", f"cannot read {path}: {exc.strerror}", str(path))
    except json.JSONDecodeError as exc:
        raise Failure(EXIT_INVALID, "SCHEMA_ERROR", f"{path}: invalid JSON ({exc.msg})",
                      f"line {exc.lineno} column {exc.colno}")


def emit(args, payload):
    text = dumps(payload)
    if args.out:
        write_atomic(args.out, text)
    elif not args.quiet:
        sys.stdout.write(text)


def say(args, text):
    if not args.quiet:
        print(text)


# -- commands -----------------------------------------------------------------

def cmd_compile(args):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ZeroCostWarning)
        chronicle = chronicle_from_json(load_json(args.input))
    for w in caught:
        diagnostic("warning", "ZERO_COST", str(w.message))
    mset = compile_chronicle(chronicle)
    payload = mset_to_json(mset)
    if args.out:
        write_atomic(args.out, dumps(payload))
    biggest = max((len(m.closure) for m in mset.macro_facets), default=0)
    total = sum(m.cost for m in mset.macro_facets)
    say(args, f"macro-facets: {len(mset)}  max closure: {biggest}  total cost: {total:g}")
    if not args.out and not args.quiet:
        sys.stdout.write(dumps(payload))
    return EXIT_OK


def _load_problem(args, need_utility=True):
    mset = mset_from_json(load_json(args.input))
    tree = build_quota_tree(mset.ids, constraints_from_json(load_json(args.constraints)))
    utility = None
    if args.utility:
        utility = utility_from_json(load_json(args.utility), mset)
    elif need_utility:
        raise Failure(EXIT_INVALID, "SCHEMA_ERROR", "--utility is required")
    return mset, tree, utility


def cmd_verify(args):
    mset = mset_from_json(load_json(args.input))
    report = {"laminar": None, "matroid": None, "utility": None}
    try:
        tree = build_quota_tree(mset.ids, constraints_from_json(load_json(args.constraints)))
    except MacrofacetError as exc:
        report["laminar"] = {"passed": False, "code": exc.code, "text": str(exc),
                             "witness": list(getattr(exc, "witness", ()))}
        emit(args, report)
        raise Failure(EXIT_INVALID, exc.code, str(exc), list(getattr(exc, "witness", ())))
    report["laminar"] = {"passed": True, "tree": tree_to_json(tree)}

    if len(mset) <= AXIOM_LIMIT:
        report["matroid"] = verify_matroid_axioms(tree).as_dict()
    else:
        report["matroid"] = {"passed": None, "skipped": f"more than {AXIOM_LIMIT} macro-facets"}

    if args.utility:
        utility = utility_from_json(load_json(args.utility), mset)
        if isinstance(utility, ScriptedUtility):
            report["utility"] = {"passed": None,
                                 "skipped": "scripted gains do not define a full set function"}
        else:
            sampled = len(utility.ground) > EXHAUSTIVE_LIMIT
            res = verify_monotone_submodular(utility, sample=sampled, seed=args.seed)
            report["utility"] = {**res.as_dict(), "mode": "sampled" if sampled else "exhaustive"}

    emit(args, report)
    for key, code in (("matroid", "MATROID_AXIOM_VIOLATION"), ("utility", "SUBMODULARITY_VIOLATION")):
        part = report[key]
        if part is not None and part.get("passed") is False:
            raise Failure(EXIT_INVALID, code, f"{key} check failed", part.get("witness"))
    if args.out:
        say(args, "verify: all checks passed")
    return EXIT_OK


def _format_trace(result):
    lines = []
    for i, it in enumerate(result.trace.iterations, start=1):
        status = "accept" if it.accepted else f"reject@{it.verdict.violated}"
        lines.append(f"{i:3d}  {it.candidate:<16} gain={it.gain:<12g} {status}")
    lines.append(f"stop: {result.trace.stop_reason}")
    return "\n".join(lines)


def cmd_select(args):
    mset, tree, utility = _load_problem(args)
    algo = args.algo
    if isinstance(utility, ScriptedUtility) and algo == "lazy":
        utility.tolerant = True
    solvers = {"greedy": greedy_select, "lazy": lazy_greedy_select,
               "optimal": brute_force_optimal}
    result = solvers[algo](mset.ids, utility, tree, mset)
    payload = result.as_dict()
    if args.compare:
        opt = result if algo == "optimal" else brute_force_optimal(mset.ids, utility, tree, mset)
        ratio = approximation_ratio(result, opt)
        payload = {"selection": payload, "optimal": opt.as_dict(), "ratio": ratio}
    emit(args, payload)
    if args.trace and not args.quiet:
        # keep stdout parseable when the JSON goes there
        print(_format_trace(result), file=sys.stdout if args.out else sys.stderr)
    if args.out:
        say(args, f"chosen: {' '.join(result.chosen)}  value: {result.value:g}"
            + (f"  ratio: {payload['ratio']:.6f}" if args.compare else ""))
    return EXIT_OK


def cmd_optimal(args):
    args.algo = "optimal"
    return cmd_select(args)


def cmd_simulate(args):
    fields = dict(trials=args.trials, num_macro=args.macro, universe_size=args.universe,
                  num_groups=args.groups, bins=args.bins)
    if args.seed is not None:
        fields["seed"] = args.seed
    try:
        config = ExperimentConfig(**fields)
    except ValueError as exc:
        raise Failure(EXIT_INVALID, "SCHEMA_ERROR", str(exc))
    if config.num_macro > 20:
        raise Failure(EXIT_LIMIT, "LIMIT_EXCEEDED", "num_macro above the brute-force ceiling 20")
    out_dir = Path(args.out_dir or os.environ.get(OUT_DIR_ENV) or "simulation-out")
    report = run_experiment(config, workers=args.workers)
    write_atomic(out_dir / "trials.csv", report.trials_csv())
    write_atomic(out_dir / "histogram.csv", report.histogram_csv())
    write_atomic(out_dir / "report.json", dumps(report.as_dict()))
    s = report.stats
    say(args, f"trials: {s['n']}  mean: {s['mean']:.4f}  95% CI: [{s['ci95'][0]:.4f}, "
              f"{s['ci95'][1]:.4f}]  min: {s['min']:.4f}  p5: {s['p5']:.4f}  "
              f"backend: {_accel.BACKEND}  wall: {report.wall_clock:.1f}s")
    if s["violations_below_half"]:
        raise Failure(EXIT_BUG, "INVARIANT_BREACH", "approximation ratio below 1/2",
                      s["violations_below_half"])
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--out", help="output file (default: stdout)")
    shared.add_argument("--seed", type=int, default=None)
    shared.add_argument("--quiet", action="store_true")

    p = argparse.ArgumentParser(prog="macrofacet", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", parents=[shared], help="condense a chronicle into macro-facets")
    c.add_argument("--in", dest="input", required=True, help="chronicle JSON")
    c.set_defaults(func=cmd_compile)

    def problem(sp, utility_required):
        sp.add_argument("--in", dest="input", required=True, help="compiled macro-facet JSON")
        sp.add_argument("--constraints", required=True, help="constraint JSON")
        sp.add_argument("--utility", required=utility_required, help="utility JSON")

    v = sub.add_parser("verify", parents=[shared], help="laminarity, matroid and utility checks")
    problem(v, False)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("select", parents=[shared], help="select macro-facets")
    problem(s, True)
    s.add_argument("--algo", choices=("greedy", "lazy", "optimal"), default="greedy")
    s.add_argument("--trace", action="store_true", help="print the iteration trace")
    s.add_argument("--compare", action="store_true", help="also solve exactly and report the ratio")
    s.set_defaults(func=cmd_select)

    o = sub.add_parser("optimal", parents=[shared], help="exact selection by enumeration")
    problem(o, True)
    o.add_argument("--trace", action="store_true")
    o.add_argument("--compare", action="store_true")
    o.set_defaults(func=cmd_optimal)

    m = sub.add_parser("simulate", parents=[shared], help="greedy vs. optimum on random instances")
    m.add_argument("--trials", type=int, default=5000)
    m.add_argument("--macro", type=int, default=14)
    m.add_argument("--universe", type=int, default=120)
    m.add_argument("--groups", type=int, default=4)
    m.add_argument("--bins", type=int, default=50)
    m.add_argument("--workers", type=int, default=1)
    m.add_argument("--out-dir", help=f"output directory (default: ${OUT_DIR_ENV} or ./simulation-out)")
    m.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", None) is None and args.command == "verify":
        args.seed = 0
    try:
        return args.func(args)
    except Failure as exc:
        diagnostic("error", exc.code, str(exc), exc.witness)
        return exc.exit_code
    except InvariantError as exc:
        diagnostic("error", exc.code, str(exc))
        return EXIT_BUG
    except (LimitExceededError, InfeasibleError) as exc:
        diagnostic("error", exc.code, str(exc), getattr(exc, "limit", None))
        return EXIT_LIMIT
    except MacrofacetError as exc:
        witness = getattr(exc, "witness", None) or getattr(exc, "ident", None) \
            or getattr(exc, "path", None)
        diagnostic("error", exc.code, str(exc), list(witness) if isinstance(witness, tuple) else witness)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
