"""Command-line interface for the decision pipeline.

One subcommand per pipeline stage: ``decide`` for validity verdicts,
``translate`` for the set-to-integer translation, ``ba-qe`` and ``pa-qe``
for the two quantifier eliminators, ``vcgen`` for schema verification
conditions, and ``oracle`` for brute-force evaluation over small finite
universes.  Verdict-producing commands use the exit code as the answer:
0 valid/true, 1 invalid/false, 2 any error.  Human output goes to stdout
and diagnostics to stderr; ``--stats`` appends one JSON line to stdout
with sizes, quantifier alternation counts and elapsed wall time, so runs
over a corpus can be aggregated with standard line tools.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .alpha import alpha_translate, close_free, decide
from .baqe import ba_eliminate
from .core import BapaError, Formula, measure
from .oracle import oracle, oracle_sweep
from .presburger import pa_qe
from .schema import correctness_vc, parse_schema
from .syntax import parse_formula, print_formula

MODES = ("FiniteUniverse", "InfiniteUniverse", "AllModels")


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit_stats(fin: Formula, fout: Formula, t0: float) -> None:
    m_in, m_out = measure(fin), measure(fout)
    print(json.dumps({
        "input_size": m_in.size,
        "set_vars": m_in.set_vars,
        "alternations_in": m_in.alternations,
        "output_size": m_out.size,
        "alternations_out": m_out.alternations,
        "elapsed_ms": round((time.time() - t0) * 1000),
    }))


def _cmd_decide(args) -> int:
    t0 = time.time()
    f = close_free(parse_formula(_read(args.file)), args.open_as)
    verdict = decide(f, mode=args.mode, strategy=args.strategy,
                     optimize=args.optimize, universe=args.universe)
    print("valid" if verdict else "invalid")
    if args.stats:
        _emit_stats(f, alpha_translate(f, mode=args.mode,
                                       strategy=args.strategy,
                                       optimize=args.optimize), t0)
    return 0 if verdict else 1


def _cmd_translate(args) -> int:
    t0 = time.time()
    f = close_free(parse_formula(_read(args.file)), args.open_as)
    g = alpha_translate(f, mode=args.mode, strategy=args.strategy,
                        optimize=args.optimize)
    print(print_formula(g))
    if args.stats:
        _emit_stats(f, g, t0)
    return 0


def _cmd_ba_qe(args) -> int:
    t0 = time.time()
    f = parse_formula(_read(args.file))
    g = ba_eliminate(f)
    print(print_formula(g))
    if args.stats:
        _emit_stats(f, g, t0)
    return 0


def _cmd_pa_qe(args) -> int:
    t0 = time.time()
    f = parse_formula(_read(args.file))
    g = pa_qe(f)
    print(print_formula(g))
    if args.stats:
        _emit_stats(f, g, t0)
    return 0


def _cmd_vcgen(args) -> int:
    t0 = time.time()
    schema = parse_schema(_read(args.file))
    names = [args.proc] if args.proc else list(schema.procs)
    if args.proc and args.proc not in schema.procs:
        print(f"error: unknown procedure {args.proc!r}", file=sys.stderr)
        return 2
    last = None
    for name in names:
        vc = correctness_vc(schema, name,
                            assume_conjunctive=args.assume_conjunctive)
        prefix = "" if args.proc else f"{name}: "
        print(prefix + print_formula(vc))
        last = vc
    if args.stats and last is not None:
        _emit_stats(last, last, t0)
    return 0


def _cmd_oracle(args) -> int:
    t0 = time.time()
    f = close_free(parse_formula(_read(args.file)), args.open_as)
    if args.universe is not None:
        verdict = oracle(f, args.universe)
        print("true" if verdict else "false")
    else:
        results = oracle_sweep(f, args.sweep)
        for u, b in results:
            print(f"u={u} {'true' if b else 'false'}")
        verdict = all(b for _, b in results)
    if args.stats:
        _emit_stats(f, f, t0)
    return 0 if verdict else 1


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="bapa",
        description="Decide sentences about sets with cardinality "
                    "constraints, or run individual pipeline stages.")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, *, modes=False, open_as=False):
        p.add_argument("file", help="input file")
        if modes:
            p.add_argument("--mode", choices=MODES, default="FiniteUniverse",
                           help="model class (default FiniteUniverse)")
            p.add_argument("--strategy", choices=("alpha", "interleaved"),
                           default="alpha",
                           help="translation strategy (default alpha)")
            p.add_argument("--optimize", action="store_true",
                           help="prune unreachable partition regions")
        if open_as:
            p.add_argument("--open-as", choices=("forall", "exists"),
                           default="forall", dest="open_as",
                           help="how to close free variables")
        p.add_argument("--stats", action="store_true",
                       help="append one JSON line of run statistics")

    p = sub.add_parser("decide", help="validity over the chosen model class")
    common(p, modes=True, open_as=True)
    p.add_argument("--universe", type=int, default=None,
                   help="restrict the check to one finite universe size")
    p.set_defaults(run=_cmd_decide)

    p = sub.add_parser("translate",
                       help="translate to a pure integer sentence")
    common(p, modes=True, open_as=True)
    p.set_defaults(run=_cmd_translate)

    p = sub.add_parser("ba-qe",
                       help="eliminate set quantifiers from a pure set formula")
    common(p)
    p.set_defaults(run=_cmd_ba_qe)

    p = sub.add_parser("pa-qe",
                       help="eliminate quantifiers from an integer formula")
    common(p)
    p.set_defaults(run=_cmd_pa_qe)

    p = sub.add_parser("vcgen",
                       help="verification conditions for an annotated schema")
    common(p)
    p.add_argument("--proc", default=None,
                   help="emit only this procedure's condition")
    p.add_argument("--assume-conjunctive", action="store_true",
                   dest="assume_conjunctive",
                   help="encode 'assume F' as F & skip instead of F => skip")
    p.set_defaults(run=_cmd_vcgen)

    p = sub.add_parser("oracle",
                       help="brute-force evaluation over small universes")
    common(p, open_as=True)
    p.add_argument("--universe", type=int, default=None,
                   help="evaluate at exactly this universe size")
    p.add_argument("--sweep", type=int, default=4,
                   help="without --universe, sweep sizes 0..N (default 4)")
    p.set_defaults(run=_cmd_oracle)
    return top


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.run(args)
    except (BapaError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
