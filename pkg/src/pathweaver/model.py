"""Core domain types for learning-pathway variability models.

A model hangs a tree of items under a named study area.  Fields are the
selection points of the curriculum, options are the concrete choices that
belong to a field, and one item may play both roles at once: an option of
its parent field that opens a sub-choice of its own.  Fields carry min/max
cardinality bounds counted over their non-common options, and require or
exclude constraints link items anywhere in the tree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

ItemId = str

_WS_RE = re.compile(r"\s+")


def normalize_name(raw: str) -> ItemId:
    """Collapse internal whitespace and trim. Names compare exactly afterwards."""
    return _WS_RE.sub(" ", raw).strip()


class DomainError(Exception):
    """Base for all domain-level errors; ``code`` is a stable machine tag."""

    code = "DomainError"

    def __init__(self, message: str, item: ItemId | None = None):
        super().__init__(message)
        self.item = item


class UnknownItemError(DomainError):
    code = "UnknownItem"


class NotAFieldError(DomainError):
    code = "NotAField"


class InvalidModelError(DomainError):
    """Raised by operations that require a defect-free model."""

    code = "InvalidModel"

    def __init__(self, message: str, defects: tuple["ModelDefect", ...] = ()):
        super().__init__(message)
        self.defects = defects


class Kind(Enum):
    FIELD = "field"
    OPTION = "option"
    FIELD_AND_OPTION = "field_and_option"

    @property
    def is_field(self) -> bool:
        return self is not Kind.OPTION

    @property
    def is_option(self) -> bool:
        return self is not Kind.FIELD


@dataclass(frozen=True)
class Cardinality:
    """Bounds on how many non-common options of a field may be selected."""

    min: int
    max: int


class ConstraintKind(Enum):
    # values double as the serialized predicate names
    REQUIRES_OPTION_OPTION = "requires_option_option"
    EXCLUDES_OPTION_OPTION = "excludes_option_option"
    REQUIRES_OPTION_FIELD = "requires_option_field"
    EXCLUDES_OPTION_FIELD = "excludes_option_field"
    REQUIRES_FIELD_FIELD = "requires_field_field"
    EXCLUDES_FIELD_FIELD = "excludes_field_field"

    @property
    def is_exclude(self) -> bool:
        return self.value.startswith("excludes")

    @property
    def source_is_field(self) -> bool:
        return self.value.endswith("field_field")

    @property
    def target_is_field(self) -> bool:
        return self.value.endswith("field")


@dataclass(frozen=True)
class Constraint:
    kind: ConstraintKind
    source: ItemId
    target: ItemId


@dataclass(frozen=True)
class Item:
    id: ItemId
    kind: Kind
    common: bool = False
    parent: ItemId | None = None
    cardinality: Cardinality | None = None


class DefectCode(Enum):
    DUPLICATE_ID = "DuplicateId"
    UNKNOWN_ITEM = "UnknownItem"
    NOT_A_FIELD = "NotAField"
    NOT_AN_OPTION = "NotAnOption"
    DUPLICATE_PARENT = "DuplicateParent"
    PARENT_CYCLE = "ParentCycle"
    CARDINALITY_INVERTED = "CardinalityInverted"
    MAX_EXCEEDS_OPTIONS = "MaxExceedsOptions"
    SELF_CONSTRAINT = "SelfConstraint"
    KIND_MISMATCH = "KindMismatch"
    # emitted only while assembling a model from facts
    CONFLICTING_FACT = "ConflictingFact"
    MISSING_ROOT = "MissingRoot"


@dataclass(frozen=True)
class ModelDefect:
    code: DefectCode
    items: tuple[ItemId, ...]
    message: str


def _defect_key(d: ModelDefect) -> tuple:
    return (d.code.value, d.items, d.message)


@dataclass(frozen=True)
class Model:
    """A validated-or-not variability model; treat instances as immutable.

    ``items`` preserves declaration order, which fixes the order that
    ``children_of`` reports children in.  Equality ignores that order.
    """

    study_area: ItemId
    items: dict[ItemId, Item]
    constraints: tuple[Constraint, ...]
    # derived indexes; excluded from equality, built once in __post_init__
    _children: dict[ItemId, tuple[ItemId, ...]] = field(
        default_factory=dict, compare=False, repr=False
    )

    def __post_init__(self):
        index: dict[ItemId, list[ItemId]] = {}
        for item in self.items.values():
            if item.parent is not None:
                index.setdefault(item.parent, []).append(item.id)
        self._children.clear()
        self._children.update((k, tuple(v)) for k, v in index.items())

    def child_ids(self, field_id: ItemId) -> tuple[ItemId, ...]:
        """Children of an item in declaration order; no existence checks."""
        return self._children.get(field_id, ())

    def non_common_child_ids(self, field_id: ItemId) -> tuple[ItemId, ...]:
        return tuple(
            c for c in self.child_ids(field_id) if not self.items[c].common
        )


def children_of(model: Model, field_id: ItemId) -> list[ItemId]:
    """Options belonging to a field, in declaration order.

    Raises UnknownItemError for an id not in the model and NotAFieldError
    when the item cannot own options.
    """
    item = model.items.get(field_id)
    if item is None:
        raise UnknownItemError(f"no item named '{field_id}'", field_id)
    if not item.kind.is_field:
        raise NotAFieldError(f"'{field_id}' is an option, not a field", field_id)
    return list(model.child_ids(field_id))


def validate_model(model: Model) -> list[ModelDefect]:
    """Every structural defect in the model, sorted by code then item ids.

    Pure: does not mutate the model, returns the same list on every call.
    """
    defects: set[ModelDefect] = set()

    for key, item in model.items.items():
        if key != item.id:
            defects.add(
                ModelDefect(
                    DefectCode.DUPLICATE_ID,
                    (key, item.id),
                    f"item stored under '{key}' declares id '{item.id}'",
                )
            )

    for item in model.items.values():
        if item.parent is not None:
            if not item.kind.is_option:
                defects.add(
                    ModelDefect(
                        DefectCode.NOT_AN_OPTION,
                        (item.id,),
                        f"'{item.id}' has parent '{item.parent}' but is not an option",
                    )
                )
            parent = model.items.get(item.parent)
            if parent is None:
                defects.add(
                    ModelDefect(
                        DefectCode.UNKNOWN_ITEM,
                        (item.id, item.parent),
                        f"parent '{item.parent}' of '{item.id}' is not in the model",
                    )
                )
            elif not parent.kind.is_field:
                defects.add(
                    ModelDefect(
                        DefectCode.NOT_A_FIELD,
                        (item.id, item.parent),
                        f"parent '{item.parent}' of '{item.id}' is not a field",
                    )
                )
        elif item.kind.is_option:
            defects.add(
                ModelDefect(
                    DefectCode.UNKNOWN_ITEM,
                    (item.id,),
                    f"option '{item.id}' has no parent field",
                )
            )

        if item.cardinality is not None and not item.kind.is_field:
            defects.add(
                ModelDefect(
                    DefectCode.NOT_A_FIELD,
                    (item.id,),
                    f"'{item.id}' declares cardinality but is not a field",
                )
            )
        if item.kind.is_field and item.cardinality is None:
            defects.add(
                ModelDefect(
                    DefectCode.KIND_MISMATCH,
                    (item.id,),
                    f"field '{item.id}' has no cardinality bounds",
                )
            )
        if item.cardinality is not None and item.kind.is_field:
            card = item.cardinality
            if card.min > card.max:
                defects.add(
                    ModelDefect(
                        DefectCode.CARDINALITY_INVERTED,
                        (item.id,),
                        f"min {card.min} exceeds max {card.max} on '{item.id}'",
                    )
                )
            n_choices = len(model.non_common_child_ids(item.id))
            if card.max > n_choices:
                defects.add(
                    ModelDefect(
                        DefectCode.MAX_EXCEEDS_OPTIONS,
                        (item.id,),
                        f"max {card.max} on '{item.id}' exceeds its "
                        f"{n_choices} non-common option(s)",
                    )
                )

    defects.update(_cycle_defects(model))

    for con in model.constraints:
        if con.source == con.target:
            defects.add(
                ModelDefect(
                    DefectCode.SELF_CONSTRAINT,
                    (con.source,),
                    f"{con.kind.value} links '{con.source}' to itself",
                )
            )
            continue
        for endpoint, wants_field in (
            (con.source, con.kind.source_is_field),
            (con.target, con.kind.target_is_field),
        ):
            item = model.items.get(endpoint)
            if item is None:
                defects.add(
                    ModelDefect(
                        DefectCode.UNKNOWN_ITEM,
                        (endpoint,),
                        f"{con.kind.value} references unknown item '{endpoint}'",
                    )
                )
            elif wants_field and not item.kind.is_field:
                defects.add(
                    ModelDefect(
                        DefectCode.KIND_MISMATCH,
                        (endpoint,),
                        f"{con.kind.value} needs a field but '{endpoint}' is an option",
                    )
                )
            elif not wants_field and not item.kind.is_option:
                defects.add(
                    ModelDefect(
                        DefectCode.KIND_MISMATCH,
                        (endpoint,),
                        f"{con.kind.value} needs an option but '{endpoint}' is a field",
                    )
                )

    return sorted(defects, key=_defect_key)


def _cycle_defects(model: Model) -> set[ModelDefect]:
    defects: set[ModelDefect] = set()
    cycles: set[frozenset[ItemId]] = set()
    for start in model.items:
        seen: list[ItemId] = []
        cur: ItemId | None = start
        while cur is not None and cur in model.items:
            if cur in seen:
                cycles.add(frozenset(seen[seen.index(cur):]))
                break
            seen.append(cur)
            cur = model.items[cur].parent
    for cycle in cycles:
        ids = tuple(sorted(cycle))
        defects.add(
            ModelDefect(
                DefectCode.PARENT_CYCLE,
                ids,
                "parent links form a cycle: " + " -> ".join(ids),
            )
        )
    return defects
