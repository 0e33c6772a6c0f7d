"""Command-line driver.

Exit codes: 0 success, 1 parse error (script, manifold or report syntax),
2 precondition violation, 3 a check ran and failed (oracle mismatch or
round-trip difference).
"""

from __future__ import annotations

import argparse
import json
import sys

from .catalog import ManifoldSyntaxError, parse_manifold
from .dsl import ParseError, evaluate, parse, print_script
from .errors import PreconditionViolated, ReebError, StepError
from .exact_algebra import CoefficientRing
from .report import emit_report, load_report, state_from_report

EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_CHECK_FAILED = 0, 1, 2, 3


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _ring(text: str | None) -> CoefficientRing | None:
    if text is None:
        return None
    try:
        return CoefficientRing.parse(text)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def cmd_eval(args) -> int:
    ev = evaluate(parse(_read(args.script)), coeff=_ring(args.coeff))
    text = emit_report(ev.state, ev.verdicts)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"betti {ev.state.betti()}  ring_certified={ev.state.ring_certified}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify_prop3(args) -> int:
    from .oracle import verify_prop3

    ingredients = [parse_manifold(s) for s in args.S]
    ok = verify_prop3(args.n, ingredients if len(ingredients) > 1 else ingredients[0], _ring(args.coeff)
                      or CoefficientRing.Z())
    print(f"verify-prop3 n={args.n} S={' v '.join(args.S)}: {'agree' if ok else 'MISMATCH'}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_distinguish(args) -> int:
    from .distinguisher import distinguish

    states = []
    for path in (args.report_a, args.report_b):
        try:
            states.append(state_from_report(load_report(_read(path))))
        except (ValueError, KeyError) as exc:
            raise ParseError(f"{path}: {exc}") from None
    v = distinguish(*states, closure_bound=args.bound)
    if v:
        print(f"Distinguished by {v.invariant}: {v.detail}")
    else:
        print(f"InvariantsAgree on {', '.join(v.compared)}")
    return EXIT_OK


def cmd_certify(args) -> int:
    from .distinguisher import thm3_certificate

    ev = evaluate(parse(_read(args.script)))
    v = thm3_certificate(ev.state, args.bound)
    if v:
        print(f"Certified: witness {json.dumps(v.witness.describe(ev.state.cohomology), sort_keys=True)}")
    else:
        print(f"NotApplicable: {v.reason}")
    return EXIT_OK


def cmd_roundtrip(args) -> int:
    script = parse(_read(args.script))
    printed = print_script(script)
    sys.stdout.write(printed)
    return EXIT_OK if parse(printed) == script else EXIT_CHECK_FAILED


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors count as parse errors; argparse's own code 2 is reserved."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _ArgumentParser(prog="reebring", description="Homology and cohomology rings of Reeb spaces.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    e = sub.add_parser("eval", help="evaluate a script and print its JSON report")
    e.add_argument("script")
    e.add_argument("--coeff", help="override the coefficient ring: Z, Q or Zmod:N")
    e.add_argument("--json", help="write the report here instead of stdout")
    e.set_defaults(func=cmd_eval)

    o = sub.add_parser("oracle", help="simplicial cross-checks")
    osub = o.add_subparsers(dest="oracle_command", required=True, parser_class=_ArgumentParser)
    v = osub.add_parser("verify-prop3", help="compare a bubble's homology with a simplicial model")
    v.add_argument("--n", type=int, required=True)
    v.add_argument("--S", action="append", required=True, help="ingredient manifold; repeat for a bouquet")
    v.add_argument("--coeff")
    v.set_defaults(func=cmd_verify_prop3)

    d = sub.add_parser("distinguish", help="compare the invariants of two JSON reports")
    d.add_argument("report_a")
    d.add_argument("report_b")
    d.add_argument("--bound", type=int, default=1, help="box bound of the UFG-closure search")
    d.set_defaults(func=cmd_distinguish)

    c = sub.add_parser("certify-thm3", help="run the non-realizability certificate on a script's result")
    c.add_argument("script")
    c.add_argument("--bound", type=int, default=2)
    c.set_defaults(func=cmd_certify)

    r = sub.add_parser("roundtrip", help="print a script canonically and check it reparses identically")
    r.add_argument("script")
    r.set_defaults(func=cmd_roundtrip)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ManifoldSyntaxError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except StepError as exc:
        inner = exc.error
        text = str(inner) if isinstance(inner, PreconditionViolated) else f"{type(inner).__name__}: {inner}"
        print(f"error at step {exc.step_index}: {text}", file=sys.stderr)
        return EXIT_PRECONDITION
    except PreconditionViolated as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ReebError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
