"""Audit sessions: one policy, an evolving structure, and the residual chain.

A session persists as a diffable directory: the policy source, the schema,
a structure snapshot, an append-only event ledger, and the rendering of the
current residual. Re-running the ledger from the initial policy reproduces
the residual byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .dsl import ParseError, parse_policy, parse_subformula
from .engine import pending_subjective, reduce_formula, split_guard_exclusions
from .formulas import (
    Atom,
    Bot,
    Exists,
    Forall,
    Kind,
    SubFormula,
    Top,
    And,
    Or,
    canonical_render,
    canonicalize,
    ground_atom,
    render,
)
from .logio import read_log_lines, structure_to_log_lines, term_to_json
from .modes import mode_check_formula
from .schema import Schema
from .simplify import Verdict, simplify
from .structures import (
    Completeness,
    ConflictError,
    PartialStructure,
    TT,
    FF,
    UU,
    assert_subjective,
    extend,
)
from .temporal import eventually, globally, translate
from .terms import Time, reset_fresh_counter


class SessionError(Exception):
    pass


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass
class AuditSession:
    id: str
    policy_source: str
    schema: Schema
    structure: PartialStructure
    residual: SubFormula
    history: list[dict] = field(default_factory=list)
    directory: Path | None = None

    # -- derived state -------------------------------------------------------

    def pending(self) -> list[Atom]:
        return pending_subjective(self.structure, self.schema.modes, self.residual)

    def verdict(self) -> Verdict | None:
        if isinstance(self.residual, Top):
            return Verdict("trivially_true")
        if isinstance(self.residual, Bot):
            return Verdict("trivially_false")
        return None

    def residual_text(self) -> str:
        return canonical_render(self.residual)

    def structure_digest(self) -> str:
        return _digest(self.structure.digest_source())

    def residual_digest(self) -> str:
        return _digest(self.residual_text())

    # -- persistence ----------------------------------------------------------

    def save(self) -> None:
        if self.directory is None:
            return
        d = self.directory
        d.mkdir(parents=True, exist_ok=True)
        (d / "policy.txt").write_text(self.policy_source)
        (d / "schema.json").write_text(json.dumps(self.schema.to_json(), indent=2, sort_keys=True))
        (d / "structure.jsonl").write_text("\n".join(structure_to_log_lines(self.structure)) + "\n")
        (d / "residual.txt").write_text(self.residual_text() + "\n")
        from .formulas import atom_key

        pending_keys = {atom_key(a) for a in self.pending()}
        (d / "residual.json").write_text(json.dumps(
            formula_to_json(canonicalize(self.residual), pending_keys),
            indent=2, sort_keys=True) + "\n")
        (d / "history.jsonl").write_text(
            "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.history)
        )
        meta = {
            "id": self.id,
            "residual_digest": self.residual_digest(),
            "structure_digest": self.structure_digest(),
        }
        (d / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True))

    def _log_event(self, event: dict) -> None:
        event = dict(event)
        event.setdefault("at", time.time())
        event["structure_digest"] = self.structure_digest()
        event["residual_digest"] = self.residual_digest()
        self.history.append(event)


def _initial_residual(schema: Schema, wrapper: str, formula) -> SubFormula:
    # Fresh-name numbering restarts per policy so that independently created
    # sessions for the same policy render identically.
    reset_fresh_counter()
    if wrapper == "G":
        return globally(schema, formula)
    if wrapper == "F":
        return eventually(schema, formula)
    return translate(schema, Time(0), formula)


def session_create(
    policy_text: str,
    schema_text: str | None = None,
    directory: Path | str | None = None,
    session_id: str | None = None,
) -> AuditSession:
    """Parse, translate and mode-check a policy; start an empty-log session."""
    schema = Schema.from_json(json.loads(schema_text)) if schema_text else Schema()
    schema, wrapper, formula = parse_policy(policy_text, schema)
    residual = _initial_residual(schema, wrapper, formula)
    report = mode_check_formula(schema.modes, frozenset(), residual)
    if not report.ok:
        raise SessionError(
            "policy is not well-moded: " + "; ".join(str(d) for d in report.diagnostics)
        )
    session = AuditSession(
        id=session_id or uuid.uuid4().hex[:12],
        policy_source=policy_text,
        schema=schema,
        structure=PartialStructure.empty(schema),
        residual=residual,
        directory=Path(directory) if directory else None,
    )
    session._log_event(
        {"event": "create", "policy": policy_text, "schema": schema_text or "", "id": session.id}
    )
    session.save()
    return session


def session_ingest(session: AuditSession, log_lines: list[str]) -> AuditSession:
    """Extend the structure with new log records; the residual waits for iterate."""
    delta = read_log_lines(session.schema, log_lines)
    session.structure = extend(session.structure, delta)
    session._log_event({"event": "ingest", "lines": log_lines})
    session.save()
    return session


def session_iterate(session: AuditSession) -> AuditSession:
    """One reduction pass over the current structure."""
    reduced = reduce_formula(session.structure, session.schema.modes, session.residual)
    elim = session.structure.completeness.mode is Completeness.OBJECTIVELY_COMPLETE
    session.residual = simplify(reduced, quantifier_elim=elim)
    session._log_event({"event": "iterate", "quantifier_elim": elim})
    session.save()
    return session


def session_assert(
    session: AuditSession, atom_text: str, value: str, justification: str
) -> AuditSession:
    """Record a human decision on a pending subjective atom."""
    if not justification.strip():
        raise SessionError("an assertion needs a nonempty justification")
    if value not in ("tt", "ff"):
        raise SessionError(f"assertion value must be tt or ff, got {value!r}")
    try:
        parsed = parse_subformula(atom_text, session.schema)
    except ParseError as err:
        raise SessionError(f"cannot parse atom: {err}") from err
    if not isinstance(parsed, Atom) or not ground_atom(parsed):
        raise SessionError(f"not a ground atom: {atom_text}")
    decided = TT if value == "tt" else FF
    if not any(a == parsed for a in session.pending()):
        if parsed.pred.kind is Kind.SUBJECTIVE:
            current = session.structure.valuation(parsed)
            if current is decided:
                return session  # double-submit of the same decision
            if current is not UU:
                raise ConflictError(
                    [f"{render(parsed)} already decided {current.value}, "
                     f"cannot assert {value}"])
        raise SessionError(f"atom is not pending in this session: {render(parsed)}")
    session.structure = assert_subjective(session.structure, parsed, decided)
    session._log_event(
        {"event": "assert", "atom": render(parsed), "value": value,
         "justification": justification}
    )
    session.save()
    return session


# ---------------------------------------------------------------------------
# Reports.
# ---------------------------------------------------------------------------


def _term_json(t) -> object:
    from .terms import TimeOffset, Var

    match t:
        case Var(name):
            return {"var": name}
        case TimeOffset(base, delta):
            return {"var": base.name, "plus": delta}
        case _:
            return term_to_json(t)


def formula_to_json(f: SubFormula, pending: set[tuple] | None = None) -> dict:
    """A structured AST for clients; never used for engine decisions."""
    from .formulas import atom_key

    match f:
        case Top():
            return {"node": "top"}
        case Bot():
            return {"node": "bot"}
        case Atom(pred, args):
            doc = {
                "node": "atom",
                "pred": pred.name,
                "kind": pred.kind.value,
                "args": [_term_json(a) for a in args],
                "text": render(f),
            }
            if pending is not None:
                doc["pending"] = ground_atom(f) and atom_key(f) in pending
            return doc
        case And(l, r):
            return {"node": "and",
                    "parts": [formula_to_json(l, pending), formula_to_json(r, pending)]}
        case Or(l, r):
            return {"node": "or",
                    "parts": [formula_to_json(l, pending), formula_to_json(r, pending)]}
        case Forall(xs, c, b) | Exists(xs, c, b):
            base_guard, excluded = split_guard_exclusions(xs, c)
            doc = {
                "node": "forall" if isinstance(f, Forall) else "exists",
                "vars": list(xs),
                "guard": formula_to_json(base_guard, pending),
                "body": formula_to_json(b, pending),
                "excluded": [
                    [_term_json(t) for t in tup] for tup in excluded.tuples
                ],
            }
            return doc
    raise TypeError(f"not a formula: {f!r}")


def session_report(session: AuditSession) -> dict:
    """The canonical machine-readable view of a session."""
    from .formulas import atom_key

    pending = session.pending()
    pending_keys = {atom_key(a) for a in pending}
    canonical = canonicalize(session.residual)
    verdict = session.verdict()
    return {
        "session": session.id,
        "residual": {
            "text": session.residual_text(),
            "ast": formula_to_json(canonical, pending_keys),
        },
        "pending": [
            {"atom": render(a), "pred": a.pred.name,
             "args": [_term_json(t) for t in a.args]}
            for a in pending
        ],
        "verdict": verdict.to_json() if verdict else None,
        "history": [
            {
                "event": e["event"],
                "at": e["at"],
                "structure_digest": e["structure_digest"],
                "residual_digest": e["residual_digest"],
            }
            for e in session.history
        ],
    }


# ---------------------------------------------------------------------------
# Loading and replay.
# ---------------------------------------------------------------------------


def session_load(directory: Path | str) -> AuditSession:
    """Rebuild a session by replaying its ledger, verifying recorded digests."""
    d = Path(directory)
    history_path = d / "history.jsonl"
    if not history_path.exists():
        raise SessionError(f"no session ledger at {history_path}")
    events = [json.loads(line) for line in history_path.read_text().splitlines() if line.strip()]
    if not events or events[0]["event"] != "create":
        raise SessionError("session ledger does not start with a create event")
    session = replay(events)
    session.directory = d
    return session


def replay(events: list[dict]) -> AuditSession:
    create = events[0]
    session = session_create(
        create["policy"], create.get("schema") or None, directory=None,
        session_id=create.get("id"),
    )
    session.history = [dict(create)]
    for event in events[1:]:
        kind = event["event"]
        if kind == "ingest":
            delta = read_log_lines(session.schema, event["lines"])
            session.structure = extend(session.structure, delta)
        elif kind == "iterate":
            reduced = reduce_formula(session.structure, session.schema.modes, session.residual)
            elim = session.structure.completeness.mode is Completeness.OBJECTIVELY_COMPLETE
            session.residual = simplify(reduced, quantifier_elim=elim)
        elif kind == "assert":
            parsed = parse_subformula(event["atom"], session.schema)
            assert isinstance(parsed, Atom)
            session.structure = assert_subjective(
                session.structure, parsed, TT if event["value"] == "tt" else FF
            )
        else:
            raise SessionError(f"unknown ledger event {kind!r}")
        recorded = event.get("residual_digest")
        if recorded and recorded != session.residual_digest():
            raise SessionError(
                f"replay diverged at event {kind!r}: residual digest "
                f"{session.residual_digest()} != recorded {recorded}"
            )
        session.history.append(dict(event))
    return session
