"""Command-line surface.

Commands: classify, correspond, translate, verify, axioms-check, corpus.
Exit codes: 0 ok, 1 error, 2 engine failure, 3 input not skeletal.
All commands are thin wrappers: argument handling and report formatting
only, the logic lives in the library modules.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import alba, corpus
from .axioms import check_schemas
from .classify import (
    OrderType,
    Sign,
    annotate_critical,
    find_order_type,
    inequality_critical_branches,
    inequality_props,
    is_definite,
    is_skeletal_sahlqvist,
    parse_order_type,
    render_tree,
    signed_tree,
)
from .semantics import (
    EnumerationLimits,
    enumerate_frames,
    frame_valid,
    frame_valid_quasi_set,
)
from .syntax import (
    Implies,
    Inequality,
    ParseError,
    parse,
    parse_inequality,
    parse_quasi,
)
from .translate import tr_quasi, tr_quasiset, verify_tr_equivalence

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILURE = 2
EXIT_NOT_SKELETAL = 3


def _parse_input(text: str) -> Inequality:
    if "<=" in text:
        return parse_inequality(text)
    return alba.as_inequality(parse(text))


def _limits(args) -> EnumerationLimits:
    base = EnumerationLimits.from_env()
    max_worlds = getattr(args, "max_worlds", None)
    if max_worlds is not None:
        base = EnumerationLimits(
            max_worlds=max_worlds,
            max_props=base.max_props,
            max_nominals=base.max_nominals,
            max_count=base.max_count,
        )
    return base


def _eps_argument(args, ineq: Inequality) -> OrderType | None:
    if getattr(args, "eps", None) is None:
        return None
    return parse_order_type(args.eps, inequality_props(ineq))


def cmd_classify(args) -> int:
    ineq = _parse_input(args.formula)
    eps = _eps_argument(args, ineq)
    if eps is None:
        eps = find_order_type(ineq)
        skeletal = eps is not None
    else:
        skeletal = is_skeletal_sahlqvist(ineq, eps)
    report = {
        "input": str(ineq),
        "skeletal": skeletal,
        "order_type": eps.to_json() if (eps is not None and skeletal) else None,
        "critical_branches": [],
        "definite": False,
    }
    if skeletal and eps is not None:
        branches = inequality_critical_branches(ineq, eps)
        report["critical_branches"] = [b.node_texts() for b in branches]
        report["definite"] = is_definite(ineq, eps)
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        print(f"input:      {report['input']}")
        print(f"skeletal:   {report['skeletal']}")
        print(f"order type: {report['order_type']}")
        print(f"definite:   {report['definite']}")
        for b in report["critical_branches"]:
            print(f"critical:   {' -> '.join(b)}")
        if eps is not None and skeletal:
            plus = annotate_critical(signed_tree(ineq.lhs, Sign.PLUS), eps)
            minus = annotate_critical(signed_tree(ineq.rhs, Sign.MINUS), eps)
            print("left tree:")
            print(render_tree(plus, "  "))
            print("right tree:")
            print(render_tree(minus, "  "))
    return EXIT_OK if skeletal else EXIT_NOT_SKELETAL


def cmd_correspond(args) -> int:
    ineq = _parse_input(args.formula)
    eps = _eps_argument(args, ineq)
    if args.require_skeletal:
        check = eps if eps is not None else find_order_type(ineq)
        if check is None or not is_skeletal_sahlqvist(ineq, check):
            print("input is not skeletal Sahlqvist", file=sys.stderr)
            return EXIT_NOT_SKELETAL
    result = alba.run(ineq, eps_hint=eps, simplify=args.simplify)
    if args.json:
        print(json.dumps(result.to_json(include_trace=args.trace), indent=2))
    else:
        if result.ok:
            print(f"order type: {result.eps.to_json() if result.eps else None}")
            for q in result.quasis:
                print(f"pure:       {q}")
            print(f"translated: {tr_quasiset(list(result.quasis))}")
        else:
            print(f"failure: {result.reason}")
            for i in result.stuck_system.inequalities if result.stuck_system else []:
                print(f"  stuck: {i}")
        if args.trace:
            for t in result.traces:
                print(f"trace [{t.origin}]")
                for s in t.steps:
                    consumed = " ; ".join(str(i) for i in s.consumed)
                    produced = " ; ".join(str(i) for i in s.produced)
                    print(f"  {s.rule}: {consumed}  ==>  {produced}   [{s.justification}]")
    return EXIT_OK if result.ok else EXIT_FAILURE


def cmd_translate(args) -> int:
    quasi = parse_quasi(args.quasi)
    formula = tr_quasi(quasi)
    if args.json:
        from .syntax import formula_to_json

        print(json.dumps({"text": str(formula), "ast": formula_to_json(formula)}, indent=2))
    else:
        print(str(formula))
    return EXIT_OK


def cmd_verify(args) -> int:
    ineq = _parse_input(args.formula)
    limits = _limits(args)
    result = alba.run(ineq)
    if not result.ok:
        print(f"failure: {result.reason}", file=sys.stderr)
        return EXIT_FAILURE
    as_formula = Implies(ineq.lhs, ineq.rhs)
    agree = 0
    valid_in: list[int] = []
    valid_out: list[int] = []
    counterexamples: list[str] = []
    total = 0
    for idx, fr in enumerate(enumerate_frames(limits.max_worlds, limits)):
        total += 1
        vi = frame_valid(fr, as_formula, limits)
        vo = frame_valid_quasi_set(fr, result.quasis, limits)
        if vi:
            valid_in.append(idx)
        if vo:
            valid_out.append(idx)
        if vi == vo:
            agree += 1
        elif len(counterexamples) < 5:
            counterexamples.append(f"{fr}: input={vi} output={vo}")
    tr_reports = [verify_tr_equivalence(q, samples=100) for q in result.quasis]
    tr_ok = all(r.ok for r in tr_reports)
    report = {
        "input": str(ineq),
        "frames": total,
        "agreements": agree,
        "counterexamples": counterexamples,
        "valid_frames": len(valid_in),
        "translation_equivalence_ok": tr_ok,
    }
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        print(f"input:          {report['input']}")
        print(f"frames checked: {total}")
        print(f"agreements:     {agree}/{total}")
        print(f"valid frames:   {len(valid_in)}")
        print(f"translation ok: {tr_ok}")
        for c in counterexamples:
            print(f"disagreement:   {c}")
    return EXIT_OK if (agree == total and tr_ok) else EXIT_ERROR


def cmd_axioms_check(args) -> int:
    limits = _limits(args)
    checks = check_schemas(limits.max_worlds, limits=limits)
    failures = [c for c in checks if not c.ok]
    if args.json:
        print(
            json.dumps(
                [
                    {"schema": c.name, "instances": c.instances, "failures": c.failures}
                    for c in checks
                ],
                indent=2,
            )
        )
    else:
        for c in checks:
            status = "ok  " if c.ok else "FAIL"
            print(f"{status} {c.name} ({c.instances} instances)")
            for f in c.failures:
                print(f"     {f}")
    return EXIT_OK if not failures else EXIT_ERROR


def cmd_corpus(args) -> int:
    limits = _limits(args)
    if args.action == "run":
        ok, lines = corpus.run_corpus(limits)
    else:
        ok, lines = corpus.bless_corpus(limits=limits)
    for line in lines:
        print(line)
    return EXIT_OK if ok else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridcorr",
        description="Skeletal Sahlqvist classification and pure hybrid correspondents",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, formula: bool = True) -> None:
        if formula:
            p.add_argument("formula", help="formula text, or an inequality 'phi <= psi'")
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("classify", help="decide skeletal-Sahlqvist-hood")
    common(p)
    p.add_argument("--eps", help="order type, e.g. p=1,q=d or positional 1,d")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("correspond", help="compute the pure correspondent")
    common(p)
    p.add_argument("--eps", help="order type override")
    p.add_argument("--trace", action="store_true", help="emit the step log")
    p.add_argument("--simplify", action="store_true", help="fold top/bottom in outputs")
    p.add_argument(
        "--require-skeletal",
        action="store_true",
        help="exit 3 instead of attempting non-skeletal inputs",
    )
    p.set_defaults(func=cmd_correspond)

    p = sub.add_parser("translate", help="translate a quasi-inequality to a formula")
    p.add_argument("quasi", help="text like \"'i <= <>'j => 'i <= ~'j\"")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("verify", help="brute-force frame equivalence of input and output")
    common(p)
    p.add_argument("--max-worlds", type=int, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("axioms-check", help="validate the axiom/derived-theorem schemas")
    p.add_argument("--json", action="store_true")
    p.add_argument("--max-worlds", type=int, default=None)
    p.set_defaults(func=cmd_axioms_check)

    p = sub.add_parser("corpus", help="golden-file regression over the shipped corpus")
    p.add_argument("action", choices=["run", "bless"])
    p.add_argument("--json", action="store_true")
    p.add_argument("--max-worlds", type=int, default=None)
    p.set_defaults(func=cmd_corpus)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, alba.EngineInvariantError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    console_main()
