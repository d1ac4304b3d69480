"""Selection engine: three-valued states, propagation, completion checks.

Thirteen numbered rules (the tags R1..R13 appear on the wire and in the
UI) govern a selection.  R1-R6 fire the require and exclude constraints,
R7-R10 tie options to their fields, R11 pins common fields, and R12/R13
bound how many non-common options a field may carry.  Exclusion is mutual
in both directions; requirement points one way only.

Propagation is a monotone closure over two mark tables, selected and
not-selected.  Marks are only ever added, so any application order reaches
the same fixpoint; the canonical order exists purely to keep traces
reproducible.  An item holding both marks is a conflict and is reported
with its two derivations, never overwritten.  R13 (the minimum bound) and
the existential part of R8 cannot be decided mid-selection and are checked
at completion time; R8 still propagates when a selected field has exactly
one option left that could satisfy it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from .model import (
    DomainError,
    InvalidModelError,
    Item,
    ItemId,
    Model,
    UnknownItemError,
    normalize_name,
    validate_model,
)


class Decision(Enum):
    SELECTED = "selected"
    NOTSELECTED = "notselected"
    UNDECIDED = "undecided"


class Rule(Enum):
    R1 = "R1"
    R2 = "R2"
    R3 = "R3"
    R4 = "R4"
    R5 = "R5"
    R6 = "R6"
    R7 = "R7"
    R8 = "R8"
    R9 = "R9"
    R10 = "R10"
    R11 = "R11"
    R12 = "R12"
    R13 = "R13"
    USER = "user"
    INIT = "init"
    INCOMPLETE = "incomplete"


_RULE_ORDER = {rule: i for i, rule in enumerate(Rule)}


class AlreadyDecidedError(DomainError):
    code = "AlreadyDecided"


class BlockedByMaxError(DomainError):
    code = "BlockedByMax"


class ExcludesCommonError(DomainError):
    code = "ExcludesCommon"


@dataclass(frozen=True)
class Derivation:
    """Why an item holds a state: the rule that fired and its premises."""

    item: ItemId
    decision: Decision
    rule: Rule
    premises: tuple[ItemId, ...] = ()

    def as_dict(self) -> dict:
        return {
            "item": self.item,
            "state": self.decision.value,
            "rule": self.rule.value,
            "premises": list(self.premises),
        }


@dataclass(frozen=True)
class Conflict:
    """Two rules derived opposite states for one item."""

    item: ItemId
    selected_by: Derivation
    notselected_by: Derivation

    def as_dict(self) -> dict:
        return {
            "item": self.item,
            "selected_by": self.selected_by.as_dict(),
            "notselected_by": self.notselected_by.as_dict(),
        }


@dataclass(frozen=True)
class Violation:
    rule: Rule
    items: tuple[ItemId, ...]
    message: str

    def as_dict(self) -> dict:
        return {
            "rule": self.rule.value,
            "items": list(self.items),
            "message": self.message,
        }


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...]
    conflicts: tuple[Conflict, ...]

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [v.as_dict() for v in self.violations],
            "conflicts": [c.as_dict() for c in self.conflicts],
        }


@dataclass(frozen=True)
class SelectionState:
    """Assignment of every item to selected / notselected / undecided.

    The trace is the full derivation history and determines the rest:
    an item's state is its first derivation, later opposite derivations
    surface as conflicts.  States are immutable; engine operations return
    new ones.
    """

    decisions: dict[ItemId, Decision]
    derivations: dict[ItemId, Derivation]
    trace: tuple[Derivation, ...]
    conflicts: tuple[Conflict, ...] = ()

    def decision_of(self, item_id: ItemId) -> Decision:
        return self.decisions.get(item_id, Decision.UNDECIDED)

    @property
    def is_conflicted(self) -> bool:
        return bool(self.conflicts)

    def undecided(self) -> list[ItemId]:
        return [i for i, d in self.decisions.items() if d is Decision.UNDECIDED]


@dataclass(frozen=True)
class ChoiceStatus:
    """Availability of one undecided item."""

    item: ItemId
    selectable: bool
    reason: str | None = None  # "max-reached" or "parent-notselected"


class _Marks:
    """The two monotone mark tables plus the order marks arrived in."""

    __slots__ = ("sel", "nsel", "trace")

    def __init__(self):
        self.sel: dict[ItemId, Derivation] = {}
        self.nsel: dict[ItemId, Derivation] = {}
        self.trace: list[Derivation] = []

    def add(self, d: Derivation) -> bool:
        table = self.sel if d.decision is Decision.SELECTED else self.nsel
        if d.item in table:
            return False
        table[d.item] = d
        self.trace.append(d)
        return True


def _option_role_items(model: Model) -> list[Item]:
    return [it for it in model.items.values() if it.parent is not None]


def _field_role_ids(model: Model) -> list[ItemId]:
    return sorted(i for i, it in model.items.items() if it.kind.is_field)


_CONSTRAINT_BEHAVIOR = {
    # kind value -> (rule, derived decision, fires both ways)
    "requires_option_option": (Rule.R1, Decision.SELECTED, False),
    "excludes_option_option": (Rule.R2, Decision.NOTSELECTED, True),
    "requires_option_field": (Rule.R3, Decision.SELECTED, False),
    "excludes_option_field": (Rule.R4, Decision.NOTSELECTED, True),
    "requires_field_field": (Rule.R5, Decision.SELECTED, False),
    "excludes_field_field": (Rule.R6, Decision.NOTSELECTED, True),
}


def _make_constraint_rule(kind_value: str):
    rule, decision, symmetric = _CONSTRAINT_BEHAVIOR[kind_value]

    def fire(model: Model, marks: _Marks) -> list[Derivation]:
        out = []
        for con in model.constraints:
            if con.kind.value != kind_value:
                continue
            if con.source in marks.sel:
                out.append(Derivation(con.target, decision, rule, (con.source,)))
            if symmetric and con.target in marks.sel:
                out.append(Derivation(con.source, decision, rule, (con.target,)))
        return out

    return fire


def _rule_parent_of_selected(model: Model, marks: _Marks) -> list[Derivation]:
    # R7: a selected option pulls in its field
    out = []
    for it in sorted(_option_role_items(model), key=lambda x: x.id):
        if it.id in marks.sel:
            out.append(
                Derivation(it.parent, Decision.SELECTED, Rule.R7, (it.id,))
            )
    return out


def _rule_last_option_standing(model: Model, marks: _Marks) -> list[Derivation]:
    # R8, propagating half: a selected field whose other options are all
    # ruled out must take the remaining one.  The premise deliberately
    # ignores the candidate's own marks: it must stay positive so the
    # closure is monotone and the conflict set order-independent.
    out = []
    for fid in _field_role_ids(model):
        if fid not in marks.sel:
            continue
        children = model.child_ids(fid)
        for c in children:
            others = tuple(s for s in children if s != c)
            if all(s in marks.nsel for s in others):
                out.append(
                    Derivation(c, Decision.SELECTED, Rule.R8, (fid,) + others)
                )
    return out


def _rule_dropped_field_drops_options(model: Model, marks: _Marks) -> list[Derivation]:
    # R9
    out = []
    for fid in _field_role_ids(model):
        if fid in marks.nsel:
            for c in model.child_ids(fid):
                out.append(Derivation(c, Decision.NOTSELECTED, Rule.R9, (fid,)))
    return out


def _rule_common_options(model: Model, marks: _Marks) -> list[Derivation]:
    # R10: selecting a field selects its common options
    out = []
    for fid in _field_role_ids(model):
        if fid in marks.sel:
            for c in model.child_ids(fid):
                if model.items[c].common:
                    out.append(Derivation(c, Decision.SELECTED, Rule.R10, (fid,)))
    return out


def _rule_common_fields(model: Model, marks: _Marks) -> list[Derivation]:
    # R11: common fields are in every pathway
    return [
        Derivation(fid, Decision.SELECTED, Rule.R11)
        for fid in _field_role_ids(model)
        if model.items[fid].common
    ]


def _rule_max_reached(model: Model, marks: _Marks) -> list[Derivation]:
    # R12, propagating half.  Phrased pairwise so the closure stays
    # monotone: an option is ruled out as soon as the *other* selected
    # non-common options already fill the field's maximum.
    out = []
    for fid in _field_role_ids(model):
        card = model.items[fid].cardinality
        if card is None:
            continue
        non_common = model.non_common_child_ids(fid)
        chosen = [c for c in non_common if c in marks.sel]
        for c in non_common:
            others = [x for x in chosen if x != c]
            if len(others) >= card.max:
                out.append(
                    Derivation(c, Decision.NOTSELECTED, Rule.R12, tuple(others))
                )
    return out


_CANONICAL_RULES = (
    _make_constraint_rule("requires_option_option"),
    _make_constraint_rule("excludes_option_option"),
    _make_constraint_rule("requires_option_field"),
    _make_constraint_rule("excludes_option_field"),
    _make_constraint_rule("requires_field_field"),
    _make_constraint_rule("excludes_field_field"),
    _rule_parent_of_selected,
    _rule_last_option_standing,
    _rule_dropped_field_drops_options,
    _rule_common_options,
    _rule_common_fields,
    _rule_max_reached,
)


def _close(model: Model, marks: _Marks, rule_order=None) -> None:
    rules = _CANONICAL_RULES if rule_order is None else rule_order
    progress = True
    while progress:
        progress = False
        for fire in rules:
            for derivation in fire(model, marks):
                if derivation.item in model.items and marks.add(derivation):
                    progress = True


def _state_from_marks(model: Model, marks: _Marks) -> SelectionState:
    decisions: dict[ItemId, Decision] = {
        i: Decision.UNDECIDED for i in model.items
    }
    derivations: dict[ItemId, Derivation] = {}
    for d in marks.trace:
        if d.item in decisions and d.item not in derivations:
            decisions[d.item] = d.decision
            derivations[d.item] = d
    # conflicts in the order their second mark landed, so the root cause
    # leads and knock-on contradictions follow
    seen_sel: set[ItemId] = set()
    seen_nsel: set[ItemId] = set()
    conflicted: list[ItemId] = []
    for d in marks.trace:
        (seen_sel if d.decision is Decision.SELECTED else seen_nsel).add(d.item)
        if d.item in seen_sel and d.item in seen_nsel and d.item not in conflicted:
            conflicted.append(d.item)
    conflicts = tuple(
        Conflict(item, marks.sel[item], marks.nsel[item]) for item in conflicted
    )
    return SelectionState(
        decisions=decisions,
        derivations=derivations,
        trace=tuple(marks.trace),
        conflicts=conflicts,
    )


def propagate(
    model: Model, state: SelectionState, _rule_order=None
) -> SelectionState:
    """Closure of the state under the propagating rules.

    Never unmakes a decision; conflicting derivations are collected on the
    returned state.  Idempotent, and (up to trace order) independent of the
    order rules are applied in — ``_rule_order`` exists so tests can prove
    that.  Requires a defect-free model.
    """
    marks = _Marks()
    for d in state.trace:
        marks.add(d)
    _close(model, marks, _rule_order)
    return _state_from_marks(model, marks)


def initial_state(model: Model) -> SelectionState:
    """The selection every session starts from: nothing decided except
    what the model itself forces (common fields and their consequences)."""
    defects = validate_model(model)
    if defects:
        raise InvalidModelError(
            f"model has {len(defects)} defect(s); fix them before selecting",
            tuple(defects),
        )
    blank = SelectionState(
        decisions={i: Decision.UNDECIDED for i in model.items},
        derivations={},
        trace=(),
    )
    return propagate(model, blank)


def _with_decision(
    state: SelectionState, derivation: Derivation
) -> SelectionState:
    return replace(state, trace=state.trace + (derivation,))


def _lookup(model: Model, item_id: ItemId) -> tuple[ItemId, Item]:
    normalized = normalize_name(item_id)
    item = model.items.get(normalized)
    if item is None:
        raise UnknownItemError(f"no item named '{normalized}'", normalized)
    return normalized, item


def _others_at_max(model: Model, state: SelectionState, item: Item) -> bool:
    """True when the non-common siblings already fill the parent's max."""
    if item.parent is None or item.common:
        return False
    card = model.items[item.parent].cardinality
    if card is None:
        return False
    others = sum(
        1
        for c in model.non_common_child_ids(item.parent)
        if c != item.id and state.decision_of(c) is Decision.SELECTED
    )
    return others >= card.max


def choose(model: Model, state: SelectionState, item_id: ItemId) -> SelectionState:
    """Select an item by user decision and propagate the consequences.

    The input state is untouched.  If propagation runs into a conflict the
    returned state carries the report; the caller decides whether to keep
    or roll back.
    """
    normalized, item = _lookup(model, item_id)
    if state.is_conflicted:
        raise ValueError("cannot act on a state with pending conflicts")
    # report the cause, not the symptom: an option squeezed out by a full
    # field answers BlockedByMax even though R12 already marked it
    if _others_at_max(model, state, item) and (
        state.decision_of(normalized) is not Decision.SELECTED
    ):
        raise BlockedByMaxError(
            f"'{normalized}' cannot be selected: '{item.parent}' is already "
            "at its maximum",
            normalized,
        )
    if state.decision_of(normalized) is not Decision.UNDECIDED:
        raise AlreadyDecidedError(
            f"'{normalized}' is already {state.decision_of(normalized).value}",
            normalized,
        )
    return propagate(
        model,
        _with_decision(state, Derivation(normalized, Decision.SELECTED, Rule.USER)),
    )


def exclude(model: Model, state: SelectionState, item_id: ItemId) -> SelectionState:
    """Rule an item out by user decision and propagate the consequences."""
    normalized, item = _lookup(model, item_id)
    if state.is_conflicted:
        raise ValueError("cannot act on a state with pending conflicts")
    # a common item can never be ruled out, decided or not
    if item.common:
        raise ExcludesCommonError(
            f"'{normalized}' is common and cannot be excluded", normalized
        )
    if state.decision_of(normalized) is not Decision.UNDECIDED:
        raise AlreadyDecidedError(
            f"'{normalized}' is already {state.decision_of(normalized).value}",
            normalized,
        )
    return propagate(
        model,
        _with_decision(
            state, Derivation(normalized, Decision.NOTSELECTED, Rule.USER)
        ),
    )


def available_choices(
    model: Model, state: SelectionState
) -> list[ChoiceStatus]:
    """Every undecided item, flagged selectable or blocked with a reason.

    At a propagation fixpoint blocked items have normally been decided
    already; the annotations matter for raw, unpropagated states.
    """
    out = []
    for item_id in sorted(model.items):
        if state.decision_of(item_id) is not Decision.UNDECIDED:
            continue
        item = model.items[item_id]
        if (
            item.parent is not None
            and state.decision_of(item.parent) is Decision.NOTSELECTED
        ):
            out.append(ChoiceStatus(item_id, False, "parent-notselected"))
        elif _others_at_max(model, state, item):
            out.append(ChoiceStatus(item_id, False, "max-reached"))
        else:
            out.append(ChoiceStatus(item_id, True))
    return out


def field_counts(model: Model, state: SelectionState) -> dict[ItemId, int]:
    """Selected non-common options per field; common options never count."""
    return {
        fid: sum(
            1
            for c in model.non_common_child_ids(fid)
            if state.decision_of(c) is Decision.SELECTED
        )
        for fid in _field_role_ids(model)
    }


# ---------------------------------------------------------------------------
# completion checks.  Deliberately declarative re-statements of the rules,
# sharing no machinery with the propagation closure above: each check reads
# the final assignment and nothing else.


def iter_violations(model: Model, decisions: dict[ItemId, Decision]):
    """Yield every rule violation of an assignment, one at a time.

    Rules are judged between decided items; what is still undecided is
    reported once, through a single incomplete finding.  Shared by
    validate_complete and the brute-force enumerator, so both routes apply
    identical semantics.
    """
    def dec(i: ItemId) -> Decision:
        return decisions.get(i, Decision.UNDECIDED)

    undecided = tuple(
        sorted(i for i in model.items if dec(i) is Decision.UNDECIDED)
    )
    if undecided:
        yield Violation(
            Rule.INCOMPLETE,
            undecided,
            f"{len(undecided)} item(s) still undecided",
        )

    for con in model.constraints:
        rule, _, _ = _CONSTRAINT_BEHAVIOR[con.kind.value]
        if con.kind.is_exclude:
            if (
                dec(con.source) is Decision.SELECTED
                and dec(con.target) is Decision.SELECTED
            ):
                yield Violation(
                    rule,
                    (con.source, con.target),
                    f"'{con.source}' and '{con.target}' exclude each other "
                    "but both are selected",
                )
        else:
            if (
                dec(con.source) is Decision.SELECTED
                and dec(con.target) is Decision.NOTSELECTED
            ):
                yield Violation(
                    rule,
                    (con.source, con.target),
                    f"'{con.source}' requires '{con.target}', which is ruled out",
                )

    for item in model.items.values():
        if item.parent is None:
            continue
        # the same state shape breaks R7 from the option's side and R9 from
        # the field's side; one finding is enough, filed under R7
        if (
            dec(item.id) is Decision.SELECTED
            and dec(item.parent) is Decision.NOTSELECTED
        ):
            yield Violation(
                Rule.R7,
                (item.id, item.parent),
                f"option '{item.id}' is selected but its field "
                f"'{item.parent}' is ruled out",
            )

    for fid in _field_role_ids(model):
        item = model.items[fid]
        children = model.child_ids(fid)
        if dec(fid) is Decision.SELECTED:
            any_selected = any(dec(c) is Decision.SELECTED for c in children)
            any_open = any(dec(c) is Decision.UNDECIDED for c in children)
            if not any_selected and not any_open:
                yield Violation(
                    Rule.R8,
                    (fid,),
                    f"field '{fid}' is selected but none of its options are",
                )
            for c in children:
                if (
                    model.items[c].common
                    and dec(c) is Decision.NOTSELECTED
                ):
                    yield Violation(
                        Rule.R10,
                        (fid, c),
                        f"common option '{c}' is ruled out although "
                        f"'{fid}' is selected",
                    )
        if item.common and dec(fid) is Decision.NOTSELECTED:
            yield Violation(
                Rule.R11,
                (fid,),
                f"'{fid}' is a common field and cannot be ruled out",
            )
        card = item.cardinality
        if card is None or dec(fid) is not Decision.SELECTED:
            continue
        non_common = model.non_common_child_ids(fid)
        count = sum(1 for c in non_common if dec(c) is Decision.SELECTED)
        if count > card.max:
            yield Violation(
                Rule.R12,
                (fid,),
                f"'{fid}' holds {count} selected option(s), above its "
                f"maximum of {card.max}",
            )
        if count < card.min and not any(
            dec(c) is Decision.UNDECIDED for c in non_common
        ):
            yield Violation(
                Rule.R13,
                (fid,),
                f"'{fid}' holds {count} selected option(s), below its "
                f"minimum of {card.min}",
            )


def validate_complete(model: Model, state: SelectionState) -> ValidationReport:
    """Judge a finished selection against all thirteen rules.

    ok means: every item decided, no conflicts pending, and every rule
    satisfied, minimum counts included.
    """
    violations = sorted(
        iter_violations(model, state.decisions),
        key=lambda v: (_RULE_ORDER[v.rule], v.items),
    )
    ok = not violations and not state.conflicts
    return ValidationReport(ok, tuple(violations), state.conflicts)
