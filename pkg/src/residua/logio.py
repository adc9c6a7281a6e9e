"""Audit-log files: JSON Lines with fact, timepoint, completeness and schema records."""

from __future__ import annotations

import json
from typing import Iterable

from .formulas import Atom
from .schema import Schema
from .structures import (
    CompletenessClaim,
    Completeness,
    PartialStructure,
    TT,
    FF,
    Truth,
    extend,
)
from .terms import App, Const, Term, Time


class LogFormatError(Exception):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(message + where)


def term_from_json(value) -> Term:
    if isinstance(value, bool):
        raise LogFormatError(f"booleans are not terms: {value!r}")
    if isinstance(value, int):
        return Time(value)
    if isinstance(value, str):
        return Time(float("inf")) if value == "inf" else Const(value)
    if isinstance(value, dict) and "fn" in value:
        return App(value["fn"], tuple(term_from_json(a) for a in value.get("args", [])))
    if isinstance(value, list):
        from .terms import tuple_term

        return tuple_term([term_from_json(v) for v in value])
    raise LogFormatError(f"cannot read term from {value!r}")


def term_to_json(t: Term):
    from .terms import TUPLE_FN

    match t:
        case Time():
            return "inf" if t.is_infinite else t.value
        case Const(name):
            return name
        case App(fn, args) if fn == TUPLE_FN:
            return [term_to_json(a) for a in args]
        case App(fn, args):
            return {"fn": fn, "args": [term_to_json(a) for a in args]}
    raise LogFormatError(f"cannot serialize term {t}")


def _fact_atom(schema: Schema, doc: dict, line: int) -> tuple[Atom, Truth]:
    name = doc.get("pred")
    if not isinstance(name, str):
        raise LogFormatError("fact record needs a 'pred' name", line)
    if not schema.has(name):
        raise LogFormatError(f"undeclared predicate {name!r}", line)
    pred = schema.lookup(name)
    args = [term_from_json(a) for a in doc.get("args", [])]
    if "at" in doc:
        args.append(term_from_json(doc["at"]))
    if len(args) != pred.arity:
        raise LogFormatError(
            f"{name} has arity {pred.arity} but the record carries {len(args)} arguments", line)
    value = doc.get("value", "tt")
    if value not in ("tt", "ff"):
        raise LogFormatError(f"fact value must be tt or ff, got {value!r}", line)
    return Atom(pred, tuple(args)), (TT if value == "tt" else FF)


def read_log_lines(
    schema: Schema, lines: Iterable[str], start_line: int = 1
) -> PartialStructure:
    """Build the structure increment described by JSONL records.

    Facts whose record carries an "at" time also mark that time as observed.
    """
    delta = PartialStructure.empty(schema)
    facts: list[tuple[Atom, Truth]] = []
    times: set[int] = set()
    claim = CompletenessClaim.generic()
    for offset, raw in enumerate(lines):
        line_no = start_line + offset
        raw = raw.strip()
        if not raw or raw.startswith("#"):
            continue
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as err:
            raise LogFormatError(f"invalid JSON: {err.msg}", line_no) from err
        if not isinstance(doc, dict):
            raise LogFormatError("each record must be a JSON object", line_no)
        if "schema" in doc:
            incoming = Schema.from_json(doc["schema"])
            for name, pred in incoming.predicates.items():
                schema.predicates.setdefault(name, pred)
                moding = incoming.modes.get(name)
                if moding is not None and schema.modes.get(name) is None:
                    schema.modes.declare(name, set(moding.inputs), set(moding.outputs))
            schema.closed_world |= incoming.closed_world
        elif "fact" in doc:
            atom, value = _fact_atom(schema, doc["fact"], line_no)
            facts.append((atom, value))
            at = doc["fact"].get("at")
            if isinstance(at, int):
                times.add(at)
        elif "timepoint" in doc:
            tp = doc["timepoint"]
            if not isinstance(tp, int) or tp < 0:
                raise LogFormatError("timepoint must be a nonnegative integer", line_no)
            times.add(tp)
        elif "complete" in doc:
            spec = doc["complete"]
            mode = spec.get("mode")
            if mode == "past":
                claim = claim.merge(CompletenessClaim.past_complete(int(spec["until"])))
            elif mode == "objective":
                claim = claim.merge(CompletenessClaim.objectively_complete())
            else:
                raise LogFormatError(f"unknown completeness mode {mode!r}", line_no)
        else:
            keys = ", ".join(sorted(doc))
            raise LogFormatError(f"unknown record kind with keys: {keys}", line_no)
    delta = PartialStructure(
        schema,
        observed_times=times,
        completeness=claim,
    )
    for atom, value in facts:
        delta._record(atom, value)
    return delta


def structure_to_log_lines(structure: PartialStructure) -> list[str]:
    """Serialize a structure snapshot back to JSONL records."""
    lines = [json.dumps({"schema": structure.schema.to_json()}, sort_keys=True)]
    for tick in structure.observed_times:
        lines.append(json.dumps({"timepoint": tick}))
    for atom, value in structure.facts() + structure.subjective_assertions():
        args = [term_to_json(a) for a in atom.args]
        record = {"fact": {"pred": atom.pred.name, "args": args, "value": value.value}}
        lines.append(json.dumps(record, sort_keys=True))
    claim = structure.completeness
    if claim.mode is Completeness.PAST_COMPLETE:
        assert claim.horizon is not None
        lines.append(json.dumps({"complete": {"mode": "past", "until": int(claim.horizon.value)}}))
    elif claim.mode is Completeness.OBJECTIVELY_COMPLETE:
        lines.append(json.dumps({"complete": {"mode": "objective"}}))
    return lines


def load_structure(schema: Schema, path) -> PartialStructure:
    from pathlib import Path

    text = Path(path).read_text()
    return read_log_lines(schema, text.splitlines())


def ingest_file(structure: PartialStructure, path) -> PartialStructure:
    from pathlib import Path

    text = Path(path).read_text()
    delta = read_log_lines(structure.schema, text.splitlines())
    return extend(structure, delta)
