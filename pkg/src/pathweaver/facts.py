"""Logic-fact file format (.lpm): parser, model assembly, serialization.

Grammar, loosely::

    file    := { fact | comment }
    fact    := predicate "(" arg { "," arg } ")" "."
    arg     := atom | integer
    atom    := word { word } | quoted string
    comment := "%" to end of line

Words are runs of letters, digits, "_", "+" or "-"; a run of digits on its
own is an integer, accepted only in the second position of min/max.
Unquoted atoms are lowercased, so files may spell names either way; quoted
atoms keep their exact characters.  Parsing is total: a malformed region
yields one error and scanning resumes after the next ".".
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .model import (
    Cardinality,
    Constraint,
    ConstraintKind,
    DefectCode,
    InvalidModelError,
    Item,
    ItemId,
    Kind,
    Model,
    ModelDefect,
    _defect_key,
    normalize_name,
    validate_model,
)

_ARITY = {
    "type": 2,
    "choiceof": 2,
    "min": 2,
    "max": 2,
    "common": 2,
    "requires_option_option": 2,
    "excludes_option_option": 2,
    "requires_option_field": 2,
    "excludes_option_field": 2,
    "requires_field_field": 2,
    "excludes_field_field": 2,
    "select": 1,
    "notselect": 1,
}

_CONSTRAINT_PREDICATES = {k.value: k for k in ConstraintKind}
_SELECTION_PREDICATES = ("select", "notselect")
_TYPE_VALUES = ("field", "option", "studyarea")
_WORD_CHARS = frozenset(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_+-"
)
UNNAMED_STUDY_AREA = "unnamed study area"


class ParseErrorCode(Enum):
    SYNTAX_ERROR = "SyntaxError"
    UNKNOWN_PREDICATE = "UnknownPredicate"
    ARITY_MISMATCH = "ArityMismatch"
    TYPE_MISMATCH = "TypeMismatch"
    SELECT_FACT_IN_MODEL_FILE = "SelectFactInModelFile"
    DERIVED_PREDICATE = "DerivedPredicate"


@dataclass(frozen=True)
class ParseError:
    code: ParseErrorCode
    message: str
    line: int
    column: int


@dataclass(frozen=True)
class Fact:
    """One ground fact; args hold normalized atoms (str) or integers."""

    predicate: str
    args: tuple[str | int, ...]
    line: int
    column: int


class _Halt(Exception):
    """Internal signal: abandon the current fact and resync after a '.'."""

    def __init__(self, error: ParseError):
        self.error = error


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def advance(self) -> str:
        ch = self.text[self.pos]
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return ch

    def skip_blank(self) -> None:
        while not self.at_end():
            ch = self.peek()
            if ch.isspace():
                self.advance()
            elif ch == "%":
                while not self.at_end() and self.peek() != "\n":
                    self.advance()
            else:
                return

    def mark(self) -> tuple[int, int]:
        return (self.line, self.col)

    def resync(self) -> None:
        """Skip forward past the next '.' (comments still honored)."""
        while not self.at_end():
            ch = self.peek()
            if ch == "%":
                while not self.at_end() and self.peek() != "\n":
                    self.advance()
                continue
            self.advance()
            if ch == ".":
                return


def _syntax(message: str, where: tuple[int, int]) -> _Halt:
    return _Halt(ParseError(ParseErrorCode.SYNTAX_ERROR, message, *where))


def _read_word(sc: _Scanner) -> str:
    chars = []
    while not sc.at_end() and sc.peek() in _WORD_CHARS:
        chars.append(sc.advance())
    return "".join(chars)


def _read_quoted(sc: _Scanner) -> str:
    start = sc.mark()
    sc.advance()  # opening quote
    chars = []
    while True:
        if sc.at_end():
            raise _syntax("unterminated quoted atom", start)
        ch = sc.advance()
        if ch == '"':
            return "".join(chars)
        if ch == "\\":
            if sc.at_end():
                raise _syntax("unterminated quoted atom", start)
            chars.append(sc.advance())
        else:
            chars.append(ch)


def _read_arg(sc: _Scanner) -> tuple[str | int, tuple[int, int]]:
    sc.skip_blank()
    where = sc.mark()
    if sc.peek() == '"':
        raw = _read_quoted(sc)
        atom = normalize_name(raw)
        if not atom:
            raise _Halt(
                ParseError(
                    ParseErrorCode.TYPE_MISMATCH, "empty atom", *where
                )
            )
        return atom, where
    if sc.peek() not in _WORD_CHARS:
        raise _syntax(
            f"expected an argument, found {sc.peek()!r}" if sc.peek() else
            "expected an argument, found end of input",
            where,
        )
    first = _read_word(sc)
    if first.isdigit():
        # a bare digit run is an integer token and must end the argument
        sc.skip_blank()
        if sc.peek() in _WORD_CHARS:
            raise _syntax("expected ',' or ')'", sc.mark())
        return int(first), where
    words = [first]
    while True:
        sc.skip_blank()
        if sc.peek() not in _WORD_CHARS:
            break
        nxt_start = sc.mark()
        if _peek_word(sc).isdigit():
            # an integer cannot join an atom; the classic missing-comma
            # typo max(f 3) surfaces here, at the digit
            raise _syntax("expected ',' or ')'", nxt_start)
        words.append(_read_word(sc))
    atom = normalize_name(" ".join(words)).lower()
    return atom, where


def _peek_word(sc: _Scanner) -> str:
    i = sc.pos
    out = []
    while i < len(sc.text) and sc.text[i] in _WORD_CHARS:
        out.append(sc.text[i])
        i += 1
    return "".join(out)


def _shape_error(code: ParseErrorCode, msg: str, where: tuple[int, int]) -> ParseError:
    return ParseError(code, msg, *where)


def parse_facts(
    text: str, *, allow_selection: bool = False
) -> tuple[list[Fact], list[ParseError]]:
    """Parse fact text; returns the well-formed facts plus every error.

    No input raises: malformed regions are skipped fact-by-fact.  With
    ``allow_selection`` false (the model-file mode), select/notselect facts
    are rejected so stored models stay free of baked-in decisions.
    """
    sc = _Scanner(text)
    facts: list[Fact] = []
    errors: list[ParseError] = []
    while True:
        sc.skip_blank()
        if sc.at_end():
            return facts, errors
        start = sc.mark()
        try:
            fact = _parse_one(sc, start)
        except _Halt as halt:
            errors.append(halt.error)
            sc.resync()
            continue
        problem = _check_shape(fact, allow_selection)
        if problem is not None:
            errors.append(problem)
        else:
            facts.append(fact)


def _parse_one(sc: _Scanner, start: tuple[int, int]) -> Fact:
    if sc.peek() not in _WORD_CHARS:
        raise _syntax(f"expected a predicate, found {sc.peek()!r}", start)
    predicate = _read_word(sc).lower()
    sc.skip_blank()
    if sc.peek() != "(":
        raise _syntax(f"expected '(' after '{predicate}'", sc.mark())
    sc.advance()
    args: list[str | int] = []
    while True:
        value, _ = _read_arg(sc)
        args.append(value)
        sc.skip_blank()
        ch = sc.peek()
        if ch == ",":
            sc.advance()
            continue
        if ch == ")":
            sc.advance()
            break
        raise _syntax(
            "expected ',' or ')'" if ch else "expected ',' or ')', found end of input",
            sc.mark(),
        )
    sc.skip_blank()
    if sc.peek() != ".":
        raise _syntax("expected '.' to end the fact", sc.mark())
    sc.advance()
    return Fact(predicate, tuple(args), *start)


def _check_shape(fact: Fact, allow_selection: bool) -> ParseError | None:
    where = (fact.line, fact.column)
    pred = fact.predicate
    if pred == "no-selected":
        return _shape_error(
            ParseErrorCode.DERIVED_PREDICATE,
            "'no-selected' is computed from the selection at runtime "
            "and cannot appear in a file",
            where,
        )
    arity = _ARITY.get(pred)
    if arity is None:
        return _shape_error(
            ParseErrorCode.UNKNOWN_PREDICATE, f"unknown predicate '{pred}'", where
        )
    if len(fact.args) != arity:
        return _shape_error(
            ParseErrorCode.ARITY_MISMATCH,
            f"'{pred}' takes {arity} argument(s), got {len(fact.args)}",
            where,
        )
    if pred in _SELECTION_PREDICATES and not allow_selection:
        return _shape_error(
            ParseErrorCode.SELECT_FACT_IN_MODEL_FILE,
            f"'{pred}' facts are not allowed in a model file",
            where,
        )
    wants_int_at = 1 if pred in ("min", "max") else None
    for i, arg in enumerate(fact.args):
        if i == wants_int_at:
            if not isinstance(arg, int):
                return _shape_error(
                    ParseErrorCode.TYPE_MISMATCH,
                    f"'{pred}' needs an integer in position {i + 1}",
                    where,
                )
        elif isinstance(arg, int):
            return _shape_error(
                ParseErrorCode.TYPE_MISMATCH,
                f"'{pred}' needs a name in position {i + 1}, got an integer",
                where,
            )
    if pred == "type" and fact.args[1] not in _TYPE_VALUES:
        return _shape_error(
            ParseErrorCode.TYPE_MISMATCH,
            f"'type' expects one of {', '.join(_TYPE_VALUES)}; got '{fact.args[1]}'",
            where,
        )
    if pred == "common" and fact.args[1] not in ("yes", "no"):
        return _shape_error(
            ParseErrorCode.TYPE_MISMATCH,
            f"'common' expects yes or no; got '{fact.args[1]}'",
            where,
        )
    return None


# ---------------------------------------------------------------------------
# assembly


class _Draft:
    __slots__ = ("id", "kinds", "parents", "common_votes", "min_votes", "max_votes",
                 "has_children")

    def __init__(self, item_id: ItemId):
        self.id = item_id
        self.kinds: set[str] = set()
        self.parents: list[ItemId] = []
        self.common_votes: list[str] = []
        self.min_votes: list[int] = []
        self.max_votes: list[int] = []
        self.has_children = False


def _resolve_votes(
    votes: list, draft_id: ItemId, what: str, defects: set[ModelDefect]
):
    distinct = sorted(set(votes), key=str)
    if len(distinct) > 1:
        listed = ", ".join(str(v) for v in distinct)
        defects.add(
            ModelDefect(
                DefectCode.CONFLICTING_FACT,
                (draft_id,),
                f"contradictory {what} facts for '{draft_id}': {listed}",
            )
        )
    return distinct[0] if distinct else None


def assemble_model(facts: list[Fact]) -> tuple[Model, list[ModelDefect]]:
    """Fold model facts into a Model; order of facts never changes the result.

    Selection facts must be filtered out by the caller first.  Defects from
    the fold (contradictory facts, missing study area, duplicate parents)
    are merged with the structural defects of the finished model.
    """
    for f in facts:
        if f.predicate in _SELECTION_PREDICATES:
            raise ValueError("selection facts cannot be assembled into a model")

    defects: set[ModelDefect] = set()
    drafts: dict[ItemId, _Draft] = {}

    def draft(item_id: ItemId) -> _Draft:
        return drafts.setdefault(item_id, _Draft(item_id))

    roots: list[str] = []
    for f in facts:
        if f.predicate == "type":
            name, value = f.args
            if value == "studyarea":
                roots.append(name)
            else:
                draft(name).kinds.add(value)
        elif f.predicate == "choiceof":
            parent, child = f.args
            draft(parent).has_children = True
            if parent not in draft(child).parents:
                draft(child).parents.append(parent)

    distinct_roots = sorted(set(roots))
    if not distinct_roots:
        defects.add(
            ModelDefect(
                DefectCode.MISSING_ROOT,
                (),
                "no study area declared (expected a 'type(<name>, studyarea).' fact)",
            )
        )
        study_area = UNNAMED_STUDY_AREA
    else:
        if len(distinct_roots) > 1:
            defects.add(
                ModelDefect(
                    DefectCode.CONFLICTING_FACT,
                    tuple(distinct_roots),
                    "more than one study area declared: " + ", ".join(distinct_roots),
                )
            )
        study_area = distinct_roots[0]

    for f in facts:
        if f.predicate in ("common", "min", "max"):
            name = f.args[0]
            if name not in drafts:
                defects.add(
                    ModelDefect(
                        DefectCode.UNKNOWN_ITEM,
                        (name,),
                        f"'{f.predicate}' refers to undeclared item '{name}'",
                    )
                )
                continue
            d = drafts[name]
            if f.predicate == "common":
                d.common_votes.append(f.args[1])
            elif f.predicate == "min":
                d.min_votes.append(f.args[1])
            else:
                d.max_votes.append(f.args[1])

    # settle commonality before cardinality defaults: the default max counts
    # non-common children only
    commons: dict[ItemId, bool] = {}
    for d in drafts.values():
        vote = _resolve_votes(d.common_votes, d.id, "common", defects)
        commons[d.id] = vote == "yes"

    items: dict[ItemId, Item] = {}
    for d in drafts.values():
        is_option = bool(d.parents) or "option" in d.kinds
        is_field = d.has_children or "field" in d.kinds
        if is_field and is_option:
            kind = Kind.FIELD_AND_OPTION
        elif is_field:
            kind = Kind.FIELD
        else:
            kind = Kind.OPTION
        parent = None
        if d.parents:
            if len(d.parents) > 1:
                chosen = sorted(d.parents)
                defects.add(
                    ModelDefect(
                        DefectCode.DUPLICATE_PARENT,
                        (d.id,) + tuple(chosen),
                        f"'{d.id}' is claimed by more than one field: "
                        + ", ".join(chosen),
                    )
                )
                parent = chosen[0]
            else:
                parent = d.parents[0]
        min_vote = _resolve_votes(d.min_votes, d.id, "min", defects)
        max_vote = _resolve_votes(d.max_votes, d.id, "max", defects)
        cardinality = None
        if is_field or min_vote is not None or max_vote is not None:
            # the default max counts the children this item will actually
            # keep after duplicate-parent resolution
            n_choices = sum(
                1
                for other in drafts.values()
                if other.parents
                and sorted(other.parents)[0] == d.id
                and not commons[other.id]
            )
            cardinality = Cardinality(
                min=min_vote if min_vote is not None else 1,
                max=max_vote if max_vote is not None else n_choices,
            )
        items[d.id] = Item(
            id=d.id,
            kind=kind,
            common=commons[d.id],
            parent=parent,
            cardinality=cardinality,
        )

    constraints: set[Constraint] = set()
    for f in facts:
        kind = _CONSTRAINT_PREDICATES.get(f.predicate)
        if kind is not None:
            constraints.add(Constraint(kind, f.args[0], f.args[1]))

    model = Model(
        study_area=study_area,
        items=items,
        constraints=tuple(
            sorted(constraints, key=lambda c: (c.kind.value, c.source, c.target))
        ),
    )
    all_defects = defects.union(validate_model(model))
    return model, sorted(all_defects, key=_defect_key)


# ---------------------------------------------------------------------------
# serialization


def _render_atom(atom: ItemId) -> str:
    words = atom.split(" ")
    plain = (
        atom != ""
        and all(w and all(ch in _WORD_CHARS for ch in w) for w in words)
        and atom == atom.lower()
        and not any(w.isdigit() for w in words)
    )
    if plain:
        return atom
    escaped = atom.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def serialize_model(model: Model) -> str:
    """Canonical fact text: stable block order, each block sorted by id.

    parse_facts + assemble_model on the output reproduces an equal Model.
    Only defect-free models serialize; anything else raises InvalidModelError.
    """
    defects = validate_model(model)
    if defects:
        raise InvalidModelError(
            f"cannot serialize a model with {len(defects)} defect(s)",
            tuple(defects),
        )
    lines = [f"type({_render_atom(model.study_area)}, studyarea)."]
    ordered = sorted(model.items.values(), key=lambda it: it.id)
    for item in ordered:
        name = _render_atom(item.id)
        if item.kind.is_field:
            lines.append(f"type({name}, field).")
        if item.kind.is_option:
            lines.append(f"type({name}, option).")
    pairs = sorted(
        (it.parent, it.id) for it in model.items.values() if it.parent is not None
    )
    for parent, child in pairs:
        lines.append(f"choiceof({_render_atom(parent)}, {_render_atom(child)}).")
    for item in ordered:
        if item.cardinality is not None:
            lines.append(f"min({_render_atom(item.id)}, {item.cardinality.min}).")
    for item in ordered:
        if item.cardinality is not None:
            lines.append(f"max({_render_atom(item.id)}, {item.cardinality.max}).")
    for item in ordered:
        if item.common:
            lines.append(f"common({_render_atom(item.id)}, yes).")
    for con in sorted(
        model.constraints, key=lambda c: (c.kind.value, c.source, c.target)
    ):
        lines.append(
            f"{con.kind.value}({_render_atom(con.source)}, {_render_atom(con.target)})."
        )
    return "\n".join(lines) + "\n"


def load_model_text(text: str) -> tuple[Model, list[ParseError], list[ModelDefect]]:
    """Parse model-file text and assemble it in one step."""
    facts, errors = parse_facts(text, allow_selection=False)
    model, defects = assemble_model(facts)
    return model, errors, defects


def load_model_file(path: str | Path) -> tuple[Model, list[ParseError], list[ModelDefect]]:
    return load_model_text(Path(path).read_text(encoding="utf-8"))
