"""Predicate declarations shared by the parser, the fact store, and mode analysis."""

from __future__ import annotations

from dataclasses import dataclass, field

from .formulas import (
    BUILTIN_NAMES,
    IN,
    NEQ,
    NOTIN_SET,
    ConfigError,
    Kind,
    Predicate,
    dual_name,
    make_predicate,
)


@dataclass(frozen=True, slots=True)
class Moding:
    """Input and output argument positions, 1-based as declared."""

    inputs: frozenset[int]
    outputs: frozenset[int]

    def __post_init__(self) -> None:
        if self.inputs & self.outputs:
            raise ConfigError(f"argument positions cannot be both input and output: "
                              f"{sorted(self.inputs & self.outputs)}")


class ModeTable:
    """Per-predicate modings. Subjective predicates have no entry."""

    def __init__(self) -> None:
        self._modes: dict[str, Moding] = {}
        self._modes[IN] = Moding(frozenset({2, 3}), frozenset({1}))
        self._modes[NEQ] = Moding(frozenset({1, 2}), frozenset())
        self._modes[NOTIN_SET] = Moding(frozenset({1, 2}), frozenset())

    def declare(self, name: str, inputs: set[int], outputs: set[int]) -> None:
        self._modes[name] = Moding(frozenset(inputs), frozenset(outputs))

    def get(self, name: str) -> Moding | None:
        return self._modes.get(name)

    def names(self) -> list[str]:
        return sorted(self._modes)


def _builtin(name: str, arity: int) -> Predicate:
    return make_predicate(name, Kind.OBJECTIVE, arity)


BUILTINS = {
    IN: _builtin(IN, 3),
    NEQ: _builtin(NEQ, 2),
    NOTIN_SET: _builtin(NOTIN_SET, 2),
}


@dataclass
class Schema:
    """Declared predicates with their modings and closed-world flags.

    The builtin time predicates are always present and never closed-world:
    their truth is computed, not stored.
    """

    predicates: dict[str, Predicate] = field(default_factory=dict)
    modes: ModeTable = field(default_factory=ModeTable)
    closed_world: set[str] = field(default_factory=set)

    def __post_init__(self) -> None:
        for p in BUILTINS.values():
            self.predicates.setdefault(p.name, p)

    def declare_objective(
        self,
        name: str,
        arity: int,
        inputs: set[int] | None = None,
        outputs: set[int] | None = None,
        closed_world: bool = False,
    ) -> Predicate:
        pred = make_predicate(name, Kind.OBJECTIVE, arity)
        self._check_positions(name, arity, inputs or set(), outputs or set())
        self.predicates[name] = pred
        if inputs is not None or outputs is not None:
            self.modes.declare(name, inputs or set(), outputs or set())
        if closed_world:
            self.closed_world.add(name)
        return pred

    def declare_subjective(self, name: str, arity: int) -> Predicate:
        pred = make_predicate(name, Kind.SUBJECTIVE, arity)
        self.predicates[name] = pred
        return pred

    @staticmethod
    def _check_positions(name: str, arity: int, inputs: set[int], outputs: set[int]) -> None:
        for pos in inputs | outputs:
            if not 1 <= pos <= arity:
                raise ConfigError(f"{name}/{arity}: argument position {pos} out of range")

    def lookup(self, name: str) -> Predicate:
        base = dual_name(name) if name.startswith("~") else name
        pred = self.predicates.get(base)
        if pred is None:
            raise ConfigError(f"undeclared predicate: {base}")
        return pred.dual() if name.startswith("~") else pred

    def has(self, name: str) -> bool:
        base = dual_name(name) if name.startswith("~") else name
        return base in self.predicates

    def is_builtin(self, name: str) -> bool:
        base = dual_name(name) if name.startswith("~") else name
        return base in BUILTIN_NAMES

    def objective_names(self, include_builtins: bool = False) -> list[str]:
        return sorted(
            n for n, p in self.predicates.items()
            if p.kind is Kind.OBJECTIVE and (include_builtins or n not in BUILTIN_NAMES)
        )

    def subjective_names(self) -> list[str]:
        return sorted(n for n, p in self.predicates.items() if p.kind is Kind.SUBJECTIVE)

    def to_json(self) -> dict:
        preds = []
        for name in sorted(self.predicates):
            if name in BUILTIN_NAMES:
                continue
            p = self.predicates[name]
            entry: dict = {"name": name, "arity": p.arity, "kind": p.kind.value}
            moding = self.modes.get(name)
            if moding is not None:
                entry["in"] = sorted(moding.inputs)
                entry["out"] = sorted(moding.outputs)
            if name in self.closed_world:
                entry["closed_world"] = True
            preds.append(entry)
        return {"predicates": preds}

    @staticmethod
    def from_json(doc: dict) -> "Schema":
        schema = Schema()
        for entry in doc.get("predicates", []):
            name, arity = entry["name"], int(entry["arity"])
            if entry.get("kind") == "subjective":
                schema.declare_subjective(name, arity)
            else:
                inputs = {int(i) for i in entry.get("in", [])} if "in" in entry else None
                outputs = {int(i) for i in entry.get("out", [])} if "out" in entry else None
                schema.declare_objective(
                    name, arity, inputs, outputs, closed_world=bool(entry.get("closed_world"))
                )
        return schema
