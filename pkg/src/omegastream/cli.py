"""Command-line front end.

Subcommands: check, analyze, annotate, determinize (run), run, convert,
oracle.  Exit status 0 on success, 1 on negative verdicts or inputs outside
a domain, 2 on contract violations or malformed files.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import convert as conv
from . import nft, sst, twoway
from .analysis import AnalysisContext, ContinuityViolation, is_continuous
from .annotator import DivergedError, annotate
from .determinize import Determinizer, InvariantChecker, InvariantError, run_pipeline
from .nft import AmbiguityError, ContractError
from .words import format_upword, parse_upword

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_CONTRACT = 2


def _fmt_word(w) -> str:
    return "".join(map(str, w))


def _add_common(p):
    p.add_argument("--format", choices=["text", "json"], default="text")


def _add_analysis_flags(p):
    p.add_argument("--bound", type=int, default=None,
                   help="override for the loop-length bound")
    p.add_argument("--theta-policy", choices=["lcm", "capped"],
                   default="capped")


def _input_letters(args):
    """Input letters: a UP word expression or stdin, one letter per line."""
    if args.input is not None:
        x = parse_upword(args.input)
        return x, (x.letter_at(i) for i in range(10 ** 9))
    if not args.stdin:
        raise ContractError("provide --input or --stdin")

    def from_stdin():
        for line in sys.stdin:
            tok = line.strip()
            if tok:
                yield tok

    return None, from_stdin()


# -- check --------------------------------------------------------------------


def cmd_check(args) -> int:
    T = nft.load(args.machine)
    verdicts = {
        "trim": nft.is_trim(T),
        "clean": nft.is_clean(T),
        "unambiguous": nft.is_unambiguous(T),
        "productive": nft.is_productive(T),
    }
    ok, witness = is_continuous(T, bound=args.bound)
    if args.format == "json":
        doc = dict(verdicts)
        doc["continuous"] = ok
        if witness is not None:
            doc["witness"] = {
                "u": _fmt_word(witness.u),
                "u_loop": _fmt_word(witness.u_loop),
                "words": [format_upword(w) for w in witness.words],
            }
        print(json.dumps(doc))
    else:
        for k, v in verdicts.items():
            print(f"{k}: {str(v).lower()}")
        if ok:
            print("continuous: true")
        else:
            print(
                f"continuous: false (witness u={_fmt_word(witness.u)}, "
                f"u'={_fmt_word(witness.u_loop)})"
            )
    return EXIT_OK if ok else EXIT_NEGATIVE


# -- analyze --------------------------------------------------------------------


def cmd_analyze(args) -> int:
    T = nft.normalize(nft.load(args.machine))
    ctx = AnalysisContext(T, bound=args.bound, theta_policy=args.theta_policy)
    C0 = frozenset(T.initial)
    rows = []
    for C in ctx.comp_subsets(C0):
        sep = ctx.is_separable(C)
        rows.append(
            {
                "set": sorted(C),
                "separable": sep is not None,
                "unequal_pair": sorted(sep.unequal_pair) if sep else None,
            }
        )
    doc = {
        "states": sorted(T.states),
        "initial": sorted(T.initial),
        "final": sorted(T.final),
        "theta_length": ctx.theta_length(),
        "compatible_subsets_of_initial": rows,
    }
    if args.format == "json":
        print(json.dumps(doc))
    else:
        print(f"states: {len(doc['states'])}")
        print(f"initial: {{{','.join(doc['initial'])}}}")
        print(f"final: {{{','.join(doc['final'])}}}")
        print(f"theta length: {doc['theta_length']}")
        for row in rows:
            tag = "separable" if row["separable"] else "not separable"
            extra = (
                f" (loop lengths differ at {row['unequal_pair']})"
                if row["separable"]
                else ""
            )
            print(f"compatible {{{','.join(row['set'])}}}: {tag}{extra}")
    return EXIT_OK


# -- annotate --------------------------------------------------------------------


def cmd_annotate(args) -> int:
    T = nft.normalize(nft.load(args.machine))
    ctx = AnalysisContext(T, bound=args.bound, theta_policy=args.theta_policy)
    _, stream = _input_letters(args)
    ann = annotate(ctx, stream, max_lookahead=args.max_lookahead)
    C0 = next(ann)

    def show(C):
        return "{" + ",".join(sorted(C)) + "}"

    if args.format == "json":
        print(json.dumps({"C0": sorted(C0)}))
    else:
        print(f"C0 {show(C0)}")
    for i, (a, C) in enumerate(ann, start=1):
        if args.format == "json":
            print(json.dumps({"i": i, "letter": a, "C": sorted(C)}))
        else:
            print(f"{a}\t{show(C)}")
        if args.letters is not None and i >= args.letters:
            break
    return EXIT_OK


# -- determinize run / run ---------------------------------------------------------


def _trace_line(rec) -> str:
    return json.dumps(
        {
            "i": rec.index,
            "letter": rec.letter,
            "mode": rec.mode,
            "C": sorted(rec.C),
            "lag": {q: _fmt_word(w) for q, w in rec.lag.items()},
            "max_lag": _fmt_word(rec.max_lag),
            "nb": {
                name: dict(vals) for name, vals in sorted(rec.nb.items())
            },
            "emitted": _fmt_word(rec.emitted_delta),
        }
    )


def cmd_determinize(args) -> int:
    T = nft.load(args.machine)
    x, stream = _input_letters(args)
    if x is not None:
        if args.letters is None:
            raise ContractError("--letters is required with --input")
        result = run_pipeline(
            T,
            x,
            args.letters,
            check_invariants=args.check_invariants,
            max_lookahead=args.max_lookahead,
            bound=args.bound,
            theta_policy=args.theta_policy,
        )
        if args.trace:
            for rec in result.trace:
                print(_trace_line(rec))
        if args.format == "json":
            print(
                json.dumps(
                    {"steps": result.steps, "emitted": _fmt_word(result.emitted)}
                )
            )
        else:
            print(_fmt_word(result.emitted))
        return EXIT_OK
    # live mode over stdin: no continuity pre-check on the word, stream deltas
    ok, witness = is_continuous(T, bound=args.bound)
    if not ok:
        raise ContinuityViolation(
            f"function is not continuous (witness u={_fmt_word(witness.u)}, "
            f"u'={_fmt_word(witness.u_loop)})"
        )
    Tn = nft.normalize(T)
    ctx = AnalysisContext(Tn, bound=args.bound, theta_policy=args.theta_policy)
    ann = annotate(ctx, stream, max_lookahead=args.max_lookahead)
    det = Determinizer(ctx)
    det.init(next(ann))
    checker = InvariantChecker(det) if args.check_invariants else None
    for a, C in ann:
        delta = det.step(a, C)
        if checker is not None:
            checker.after_step(a, det.trace[-1].pre_step)
        if args.trace:
            print(_trace_line(det.trace[-1]))
        elif delta:
            print(_fmt_word(delta), flush=True)
        if args.letters is not None and det.steps - 1 >= args.letters:
            break
    if not args.trace:
        print(_fmt_word(det.emitted))
    return EXIT_OK


# -- oracle --------------------------------------------------------------------


def cmd_oracle(args) -> int:
    T = nft.load(args.machine)
    x = parse_upword(args.input)
    y = nft.oracle_eval(T, x)
    if y is None:
        print("undefined")
        return EXIT_NEGATIVE
    print(format_upword(y))
    return EXIT_OK


# -- convert --------------------------------------------------------------------


def cmd_convert(args) -> int:
    pair = (args.source, args.target)
    if pair == ("2dt", "sst"):
        machine = conv.twoway_to_sst(twoway.load(args.infile))
        sst.save(machine, args.outfile)
    elif pair == ("sst", "2dt"):
        machine = conv.sst_to_twoway(sst.load(args.infile))
        twoway.save(machine, args.outfile)
    elif pair == ("ksst", "copyless"):
        if args.k is None:
            raise ContractError("--k is required for ksst inputs")
        machine = conv.kbounded_to_copyless(sst.load(args.infile), args.k)
        sst.save(machine, args.outfile)
    else:
        raise ContractError(
            f"unsupported conversion {args.source} -> {args.target}"
        )
    print(f"wrote {args.outfile}")
    return EXIT_OK


# -- argument parsing --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    root = argparse.ArgumentParser(
        prog="omegastream",
        description="Continuity analysis and streaming evaluation of "
        "transducers over infinite words.",
    )
    subs = root.add_subparsers(dest="command", required=True)

    p = subs.add_parser("check", help="structural and continuity verdicts")
    p.add_argument("machine")
    p.add_argument("--bound", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_check)

    p = subs.add_parser("analyze", help="compatible-set analysis")
    p.add_argument("machine")
    _add_analysis_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = subs.add_parser("annotate", help="compatible-set annotations of a stream")
    p.add_argument("machine")
    p.add_argument("--input", default=None, help='UP word, e.g. "001(01)^w"')
    p.add_argument("--stdin", action="store_true",
                   help="read letters from stdin, one per line")
    p.add_argument("--letters", type=int, default=None)
    p.add_argument("--max-lookahead", type=int, default=None)
    _add_analysis_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_annotate)

    def det_parser(name, with_action):
        p = subs.add_parser(
            name, help="stream the deterministic evaluation of a machine"
        )
        if with_action:
            p.add_argument("action", choices=["run"])
        p.add_argument("machine")
        p.add_argument("--input", default=None)
        p.add_argument("--stdin", action="store_true")
        p.add_argument("--letters", type=int, default=None)
        p.add_argument("--max-lookahead", type=int, default=None)
        p.add_argument("--check-invariants", action="store_true")
        p.add_argument("--trace", action="store_true")
        _add_analysis_flags(p)
        _add_common(p)
        p.set_defaults(func=cmd_determinize)

    det_parser("determinize", with_action=True)
    det_parser("run", with_action=False)

    p = subs.add_parser("convert", help="convert between machine models")
    p.add_argument("--from", dest="source", required=True,
                   choices=["2dt", "sst", "ksst"])
    p.add_argument("--to", dest="target", required=True,
                   choices=["sst", "2dt", "copyless"])
    p.add_argument("--k", type=int, default=None,
                   help="copy bound K for ksst inputs")
    p.add_argument("infile")
    p.add_argument("outfile")
    p.set_defaults(func=cmd_convert)

    p = subs.add_parser("oracle", help="exact evaluation on a UP word")
    p.add_argument("machine")
    p.add_argument("input", help='UP word, e.g. "(001)^w"')
    p.set_defaults(func=cmd_oracle)

    return root


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ContinuityViolation, DivergedError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NEGATIVE
    except conv.DomainError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NEGATIVE
    except (
        ContractError,
        AmbiguityError,
        InvariantError,
        conv.ConversionError,
        ValueError,
        KeyError,
        OSError,
    ) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
