"""The policy DSL and the canonical sublogic text format.

One tokenizer serves three readers: schema preambles, temporal policies
(`G`/`F` wrappers, `since`/`until`/`boxpast`/`boxfuture`/`freeze`), and the
canonical rendering of sublogic formulas, which parses back to the formula
it was printed from (round-trip is identity up to bound-variable names).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .formulas import Atom, BOT, Kind, SubFormula, TOP, And, Or, Forall, Exists
from .schema import Schema
from .terms import (
    App,
    Const,
    INFTY,
    Term,
    Time,
    Var,
    fresh_name,
    set_term,
    tuple_term,
)
from .temporal import (
    BoxPast,
    BoxFuture,
    Freeze,
    Since,
    TAnd,
    TAtom,
    TBot,
    TExists,
    TForall,
    TNot,
    TOr,
    TTop,
    TemporalFormula,
    Until,
)


class ParseError(Exception):
    def __init__(self, message: str, span: tuple[int, int] | None = None, line: int | None = None):
        self.span = span
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(message + where)


@dataclass(frozen=True)
class Token:
    kind: str  # ident | number | punct
    text: str
    start: int
    end: int
    line: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<number>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<punct>=>|[()={},.;+~&/])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    pos = 0
    line = 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", (pos, pos + 1), line)
        line += text[m.start():m.end()].count("\n")
        if m.lastgroup != "ws":
            out.append(Token(m.lastgroup or "", m.group(), m.start(), m.end(), line))
        pos = m.end()
    return out


class _Cursor:
    def __init__(self, tokens: list[Token], text: str):
        self.tokens = tokens
        self.text = text
        self.i = 0

    def peek(self) -> Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.text == text

    def take(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input")
        self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok is None or tok.text != text:
            got = tok.text if tok else "end of input"
            span = (tok.start, tok.end) if tok else None
            raise ParseError(f"expected {text!r}, got {got!r}", span, tok.line if tok else None)
        return self.take()

    def done(self) -> bool:
        return self.i >= len(self.tokens)


# ---------------------------------------------------------------------------
# Schema preamble:  subjective contains/4;  objective send/4 mode(...) closed;
# ---------------------------------------------------------------------------


def parse_schema_preamble(cur: _Cursor, schema: Schema) -> None:
    while True:
        tok = cur.peek()
        if tok is None or tok.text not in ("subjective", "objective"):
            return
        keyword = cur.take().text
        name_tok = cur.take()
        if name_tok.kind != "ident":
            raise ParseError("expected a predicate name", (name_tok.start, name_tok.end),
                             name_tok.line)
        cur.expect("/")
        arity_tok = cur.take()
        if arity_tok.kind != "number":
            raise ParseError("expected an arity", (arity_tok.start, arity_tok.end), arity_tok.line)
        arity = int(arity_tok.text)
        if keyword == "subjective":
            schema.declare_subjective(name_tok.text, arity)
        else:
            inputs: set[int] | None = None
            outputs: set[int] | None = None
            closed = False
            if cur.at("mode"):
                cur.take()
                cur.expect("(")
                cur.expect("in")
                cur.expect("=")
                inputs = _parse_position_set(cur)
                cur.expect(",")
                cur.expect("out")
                cur.expect("=")
                outputs = _parse_position_set(cur)
                cur.expect(")")
            if cur.at("closed"):
                cur.take()
                closed = True
            schema.declare_objective(name_tok.text, arity, inputs, outputs, closed_world=closed)
        cur.expect(";")


def _parse_position_set(cur: _Cursor) -> set[int]:
    cur.expect("{")
    out: set[int] = set()
    while not cur.at("}"):
        tok = cur.take()
        if tok.kind != "number":
            raise ParseError("expected an argument position", (tok.start, tok.end), tok.line)
        out.add(int(tok.text))
        if cur.at(","):
            cur.take()
    cur.expect("}")
    return out


# ---------------------------------------------------------------------------
# Terms. Identifiers bound by an enclosing quantifier are variables;
# everything else is a constant.
# ---------------------------------------------------------------------------


class _Scope:
    """Maps source variable names to internal names, renamed apart on shadowing."""

    def __init__(self) -> None:
        self.frames: list[dict[str, str]] = []
        self.ever_bound: set[str] = set()

    def bind(self, names: list[str]) -> tuple[str, ...]:
        frame: dict[str, str] = {}
        bound = []
        for name in names:
            if name in frame:
                raise ParseError(f"duplicate quantified variable {name!r}")
            internal = fresh_name(name) if self.lookup(name) or name in self.ever_bound else name
            frame[name] = internal
            self.ever_bound.add(internal)
            bound.append(internal)
        self.frames.append(frame)
        return tuple(bound)

    def pop(self) -> None:
        self.frames.pop()

    def lookup(self, name: str) -> str | None:
        for frame in reversed(self.frames):
            if name in frame:
                return frame[name]
        return None


def parse_term(cur: _Cursor, scope: _Scope) -> Term:
    tok = cur.take()
    if tok.kind == "number":
        value: Term = Time(int(tok.text))
    elif tok.text == "inf":
        value = INFTY
    elif tok.text == "(":
        items = [parse_term(cur, scope)]
        while cur.at(","):
            cur.take()
            items.append(parse_term(cur, scope))
        cur.expect(")")
        value = tuple_term(items)
    elif tok.text == "{":
        members = []
        while not cur.at("}"):
            members.append(parse_term(cur, scope))
            if cur.at(","):
                cur.take()
        cur.expect("}")
        value = set_term(members)
    elif tok.kind == "ident":
        if cur.at("("):
            cur.take()
            args = []
            while not cur.at(")"):
                args.append(parse_term(cur, scope))
                if cur.at(","):
                    cur.take()
            cur.expect(")")
            value = App(tok.text, tuple(args))
        else:
            bound = scope.lookup(tok.text)
            value = Var(bound) if bound else Const(tok.text)
    else:
        raise ParseError(f"expected a term, got {tok.text!r}", (tok.start, tok.end), tok.line)
    if cur.at("+"):
        cur.take()
        delta_tok = cur.take()
        if delta_tok.kind != "number":
            raise ParseError("expected a tick count after '+'",
                             (delta_tok.start, delta_tok.end), delta_tok.line)
        if not isinstance(value, (Var, Time)):
            raise ParseError("offsets apply to time variables or time literals",
                             (tok.start, delta_tok.end), tok.line)
        from .terms import time_offset

        value = time_offset(value, int(delta_tok.text))
    return value


# ---------------------------------------------------------------------------
# Temporal policies.
# ---------------------------------------------------------------------------

_TEMPORAL_UNARY = {"not": TNot, "boxpast": BoxPast, "boxfuture": BoxFuture}
_TEMPORAL_BINARY = {"and": TAnd, "or": TOr, "since": Since, "until": Until}
_RESERVED = {
    "forall", "exists", "freeze", "and", "or", "not", "top", "bot", "since",
    "until", "boxpast", "boxfuture", "sometimepast", "sometimefuture", "inf",
}


def parse_temporal(cur: _Cursor, scope: _Scope, schema: Schema, guard: bool = False) -> TemporalFormula:
    tok = cur.peek()
    if tok is None:
        raise ParseError("expected a formula")
    text = tok.text
    if text == "top":
        cur.take()
        return TTop()
    if text == "bot":
        cur.take()
        return TBot()
    if text in ("forall", "exists"):
        cur.take()
        names = [_ident(cur)]
        while cur.at(","):
            cur.take()
            names.append(_ident(cur))
        cur.expect(".")
        bound = scope.bind(names)
        cur.expect("(")
        guard_f = parse_temporal(cur, scope, schema, guard=True)
        cur.expect(")")
        if text == "forall":
            if guard:
                raise ParseError("universal quantifiers cannot appear inside a guard",
                                 (tok.start, tok.end), tok.line)
            cur.expect("=>")
            body = parse_temporal(cur, scope, schema, guard=False)
            scope.pop()
            return TForall(bound, guard_f, body)
        cur.expect("&")
        body = parse_temporal(cur, scope, schema, guard=guard)
        scope.pop()
        return TExists(bound, guard_f, body)
    if text == "freeze":
        if guard:
            raise ParseError("temporal operators cannot appear inside a guard",
                             (tok.start, tok.end), tok.line)
        cur.take()
        name = _ident(cur)
        cur.expect(".")
        bound = scope.bind([name])
        body = parse_temporal(cur, scope, schema, guard=False)
        scope.pop()
        return Freeze(bound[0], body)
    if text in _TEMPORAL_UNARY or text in ("sometimepast", "sometimefuture"):
        if guard and text != "and":
            if text in ("not", "boxpast", "boxfuture", "sometimepast", "sometimefuture"):
                raise ParseError(f"{text!r} cannot appear inside a guard",
                                 (tok.start, tok.end), tok.line)
        cur.take()
        cur.expect("(")
        inner = parse_temporal(cur, scope, schema, guard=False)
        cur.expect(")")
        if text == "sometimepast":
            return Since(TTop(), inner)
        if text == "sometimefuture":
            return Until(TTop(), inner)
        return _TEMPORAL_UNARY[text](inner)
    if text in _TEMPORAL_BINARY:
        if guard and text in ("since", "until"):
            raise ParseError(f"{text!r} cannot appear inside a guard",
                             (tok.start, tok.end), tok.line)
        cur.take()
        cur.expect("(")
        left = parse_temporal(cur, scope, schema, guard=guard and text in ("and", "or"))
        cur.expect(",")
        right = parse_temporal(cur, scope, schema, guard=guard and text in ("and", "or"))
        cur.expect(")")
        return _TEMPORAL_BINARY[text](left, right)
    return _parse_temporal_atom(cur, scope, schema, guard)


def _ident(cur: _Cursor) -> str:
    tok = cur.take()
    if tok.kind != "ident" or tok.text in _RESERVED:
        raise ParseError(f"expected a variable name, got {tok.text!r}",
                         (tok.start, tok.end), tok.line)
    return tok.text


def _parse_temporal_atom(cur: _Cursor, scope: _Scope, schema: Schema, guard: bool) -> TAtom:
    start = cur.peek()
    assert start is not None
    dual_marker = False
    if cur.at("~"):
        cur.take()
        dual_marker = True
    name_tok = cur.take()
    if name_tok.kind != "ident":
        raise ParseError(f"expected an atom, got {name_tok.text!r}",
                         (name_tok.start, name_tok.end), name_tok.line)
    name = ("~" if dual_marker else "") + name_tok.text
    args: list[Term] = []
    end = name_tok.end
    if cur.at("("):
        cur.take()
        while not cur.at(")"):
            args.append(parse_term(cur, scope))
            if cur.at(","):
                cur.take()
        end = cur.expect(")").end
    pred = schema.lookup(name)  # raises ConfigError on undeclared predicates
    expected = pred.arity if schema.is_builtin(name) else pred.arity - 1
    if len(args) != expected:
        raise ParseError(
            f"{name} takes {expected} arguments in policies, got {len(args)}",
            (start.start, end), name_tok.line)
    if guard and (pred.kind is Kind.SUBJECTIVE or pred.is_dual):
        raise ParseError(f"guards may only use objective predicates, not {name}",
                         (start.start, end), name_tok.line)
    return TAtom(name, tuple(args), span=(start.start, end))


def parse_policy(text: str, schema: Schema | None = None) -> tuple[Schema, str, TemporalFormula]:
    """Parse an optional schema preamble and a policy.

    Returns the (possibly extended) schema, the wrapper mode 'G', 'F' or '',
    and the temporal formula.
    """
    schema = schema if schema is not None else Schema()
    cur = _Cursor(tokenize(text), text)
    parse_schema_preamble(cur, schema)
    wrapper = ""
    if cur.at("G") or cur.at("F"):
        wrapper = cur.take().text
    if cur.done():
        raise ParseError("empty policy")
    scope = _Scope()
    formula = parse_temporal(cur, scope, schema, guard=False)
    if not cur.done():
        tok = cur.peek()
        assert tok is not None
        raise ParseError(f"trailing input starting at {tok.text!r}",
                         (tok.start, tok.end), tok.line)
    return schema, wrapper, formula


# ---------------------------------------------------------------------------
# Canonical sublogic text (what `render` emits).
# ---------------------------------------------------------------------------


def parse_subformula(text: str, schema: Schema) -> SubFormula:
    cur = _Cursor(tokenize(text), text)
    scope = _Scope()
    f = _parse_sub(cur, scope, schema)
    if not cur.done():
        tok = cur.peek()
        assert tok is not None
        raise ParseError(f"trailing input starting at {tok.text!r}",
                         (tok.start, tok.end), tok.line)
    return f


def _parse_sub(cur: _Cursor, scope: _Scope, schema: Schema) -> SubFormula:
    tok = cur.peek()
    if tok is None:
        raise ParseError("expected a formula")
    text = tok.text
    if text == "top":
        cur.take()
        return TOP
    if text == "bot":
        cur.take()
        return BOT
    if text in ("and", "or"):
        cur.take()
        cur.expect("(")
        left = _parse_sub(cur, scope, schema)
        cur.expect(",")
        right = _parse_sub(cur, scope, schema)
        cur.expect(")")
        return And(left, right) if text == "and" else Or(left, right)
    if text in ("forall", "exists"):
        cur.take()
        names = [_ident(cur)]
        while cur.at(","):
            cur.take()
            names.append(_ident(cur))
        cur.expect(".")
        bound = scope.bind(names)
        cur.expect("(")
        guard_f = _parse_sub(cur, scope, schema)
        cur.expect(")")
        cur.expect("=>" if text == "forall" else "&")
        body = _parse_sub(cur, scope, schema)
        scope.pop()
        return Forall(bound, guard_f, body) if text == "forall" else Exists(bound, guard_f, body)
    return _parse_sub_atom(cur, scope, schema)


def _parse_sub_atom(cur: _Cursor, scope: _Scope, schema: Schema) -> Atom:
    start = cur.peek()
    assert start is not None
    dual_marker = False
    if cur.at("~"):
        cur.take()
        dual_marker = True
    name_tok = cur.take()
    if name_tok.kind != "ident":
        raise ParseError(f"expected an atom, got {name_tok.text!r}",
                         (name_tok.start, name_tok.end), name_tok.line)
    name = ("~" if dual_marker else "") + name_tok.text
    args: list[Term] = []
    end = name_tok.end
    if cur.at("("):
        cur.take()
        while not cur.at(")"):
            args.append(parse_term(cur, scope))
            if cur.at(","):
                cur.take()
        end = cur.expect(")").end
    pred = schema.lookup(name)
    return Atom(pred, tuple(args), span=(start.start, end))
