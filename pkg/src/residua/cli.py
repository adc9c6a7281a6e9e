"""The residua command line.

    residua check <policy>                      static mode analysis
    residua reduce --policy P --log L           one-shot reduction
    residua verdict --policy P --log L --mode safety|cosafety
    residua session new|ingest|iterate|assert|report --dir D ...
    residua serve [--port N] [--root D] [--token T]
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dsl import ParseError, parse_policy
from .formulas import ConfigError, canonical_render, render
from .logio import LogFormatError, load_structure
from .modes import mode_check_formula
from .session import (
    SessionError,
    session_assert,
    session_create,
    session_ingest,
    session_iterate,
    session_load,
    session_report,
)
from .simplify import HypothesisError, ValidationError, check_cosafety, check_safety
from .structures import ConflictError
from .temporal import eventually, globally, translate
from .terms import Time


def _load_policy(path: str):
    text = Path(path).read_text()
    schema, wrapper, formula = parse_policy(text)
    if wrapper == "G":
        residual = globally(schema, formula)
    elif wrapper == "F":
        residual = eventually(schema, formula)
    else:
        residual = translate(schema, Time(0), formula)
    return schema, wrapper, residual


def cmd_check(args: argparse.Namespace) -> int:
    try:
        schema, _, residual = _load_policy(args.policy)
    except (ParseError, ConfigError) as err:
        if args.json:
            print(json.dumps({"ok": False, "diagnostics": [str(err)]}))
        else:
            print(f"parse error: {err}", file=sys.stderr)
        return 1
    report = mode_check_formula(schema.modes, frozenset(), residual)
    if args.json:
        print(json.dumps({
            "ok": report.ok,
            "diagnostics": [
                {"message": d.message, "path": d.path, "span": d.span}
                for d in report.diagnostics
            ],
        }))
    elif report.ok:
        print("well-moded")
    else:
        for d in report.diagnostics:
            print(str(d), file=sys.stderr)
    return 0 if report.ok else 1


def cmd_reduce(args: argparse.Namespace) -> int:
    from .engine import reduce_formula
    from .simplify import simplify
    from .structures import Completeness

    schema, _, residual = _load_policy(args.policy)
    structure = load_structure(schema, args.log)
    report = mode_check_formula(schema.modes, frozenset(), residual)
    if not report.ok:
        for d in report.diagnostics:
            print(str(d), file=sys.stderr)
        return 1
    reduced = reduce_formula(structure, schema.modes, residual)
    elim = structure.completeness.mode is Completeness.OBJECTIVELY_COMPLETE
    out = simplify(reduced, quantifier_elim=elim)
    print(canonical_render(out))
    return 0


def cmd_verdict(args: argparse.Namespace) -> int:
    schema, wrapper, residual = _load_policy(args.policy)
    structure = load_structure(schema, args.log)
    try:
        if args.mode == "safety":
            verdict = check_safety(structure, schema.modes, residual)
        else:
            verdict = check_cosafety(structure, schema.modes, residual)
    except (HypothesisError, ValidationError) as err:
        print(json.dumps({"error": str(err)}))
        return 1
    print(json.dumps(verdict.to_json()))
    return 0


def cmd_session(args: argparse.Namespace) -> int:
    directory = Path(args.dir)
    if args.action == "new":
        schema_text = Path(args.schema).read_text() if args.schema else None
        session = session_create(
            Path(args.policy).read_text(), schema_text, directory=directory
        )
        print(json.dumps({"id": session.id, "dir": str(directory)}))
        return 0
    session = session_load(directory)
    if args.action == "ingest":
        lines = Path(args.log).read_text().splitlines()
        session_ingest(session, lines)
        print(json.dumps({"observed_times": list(session.structure.observed_times)}))
    elif args.action == "iterate":
        session_iterate(session)
        print(session.residual_text())
    elif args.action == "assert":
        session_assert(session, args.atom, args.value, args.justification)
        print(json.dumps({"pending": [render(a) for a in session.pending()]}))
    elif args.action == "report":
        print(json.dumps(session_report(session), indent=2, sort_keys=True))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(root=args.root, token=args.token)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="residua", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="parse and mode-check a policy")
    p_check.add_argument("policy")
    p_check.add_argument("--json", action="store_true")
    p_check.set_defaults(fn=cmd_check)

    p_reduce = sub.add_parser("reduce", help="reduce a policy against a log once")
    p_reduce.add_argument("--policy", required=True)
    p_reduce.add_argument("--log", required=True)
    p_reduce.set_defaults(fn=cmd_reduce)

    p_verdict = sub.add_parser("verdict", help="safety/co-safety verdict on a past-complete log")
    p_verdict.add_argument("--policy", required=True)
    p_verdict.add_argument("--log", required=True)
    p_verdict.add_argument("--mode", choices=["safety", "cosafety"], required=True)
    p_verdict.set_defaults(fn=cmd_verdict)

    p_session = sub.add_parser("session", help="manage a persistent audit session")
    p_session.add_argument("action", choices=["new", "ingest", "iterate", "assert", "report"])
    p_session.add_argument("--dir", required=True)
    p_session.add_argument("--policy")
    p_session.add_argument("--schema")
    p_session.add_argument("--log")
    p_session.add_argument("--atom")
    p_session.add_argument("--value", choices=["tt", "ff"])
    p_session.add_argument("--justification", default="")
    p_session.set_defaults(fn=cmd_session)

    p_serve = sub.add_parser("serve", help="run the HTTP API")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8645)
    p_serve.add_argument("--root", default=None)
    p_serve.add_argument("--token", default=None)
    p_serve.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, ConfigError, LogFormatError, ConflictError, SessionError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
