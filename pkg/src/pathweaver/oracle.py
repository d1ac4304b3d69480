"""Brute-force enumeration of every valid complete pathway.

The enumerator tries every subset of the option-role items and keeps the
ones whose induced complete assignment passes the completion rules.  Slow
on purpose: it is the ground truth the propagation engine is checked
against, so it must stay too simple to be wrong.
"""

from __future__ import annotations

from .engine import Decision, iter_violations
from .model import DomainError, InvalidModelError, ItemId, Model, validate_model

MAX_OPTIONS = 24

Pathway = tuple[ItemId, ...]


class ModelTooLargeError(DomainError):
    code = "ModelTooLarge"


class VoidModelError(DomainError):
    code = "VoidModel"


def _require_enumerable(model: Model) -> list[ItemId]:
    defects = validate_model(model)
    if defects:
        raise InvalidModelError(
            f"model has {len(defects)} defect(s); fix them before enumerating",
            tuple(defects),
        )
    options = sorted(i for i, it in model.items.items() if it.parent is not None)
    if len(options) > MAX_OPTIONS:
        raise ModelTooLargeError(
            f"{len(options)} options exceed the enumeration cap of {MAX_OPTIONS}"
        )
    return options


def enumerate_pathways(
    model: Model, limit: int | None = None
) -> tuple[list[Pathway], bool]:
    """All valid complete pathways, sorted; truncated flag set at the limit.

    A pathway lists every selected item, fields included.  Top-level
    fields are not enumerated separately: a field is in a pathway exactly
    when one of its options is, which is forced by the completion rules.
    """
    if limit is not None and limit <= 0:
        raise ValueError("limit must be positive")
    options = _require_enumerable(model)
    roots = [
        i for i, it in model.items.items()
        if it.parent is None and it.kind.is_field
    ]
    root_children = {r: model.child_ids(r) for r in roots}

    found: list[Pathway] = []
    truncated = False
    n = len(options)
    for mask in range(1 << n):
        chosen = {options[i] for i in range(n) if mask >> i & 1}
        decisions = {}
        for item_id in model.items:
            decisions[item_id] = (
                Decision.SELECTED if item_id in chosen else Decision.NOTSELECTED
            )
        for r in roots:
            # close upward: a root field rides on its selected options
            if any(c in chosen for c in root_children[r]):
                decisions[r] = Decision.SELECTED
        if next(iter_violations(model, decisions), None) is None:
            found.append(
                tuple(
                    sorted(
                        i for i, d in decisions.items()
                        if d is Decision.SELECTED
                    )
                )
            )
            if limit is not None and len(found) >= limit:
                truncated = mask != (1 << n) - 1
                break
    unique = sorted(set(found))
    return unique, truncated


def find_dead_items(model: Model) -> list[ItemId]:
    """Items that no valid pathway can ever include.

    Raises VoidModelError when the model admits no pathway at all; a dead
    list would be meaningless then, everything is unreachable.
    """
    pathways, _ = enumerate_pathways(model)
    if not pathways:
        raise VoidModelError(
            f"model '{model.study_area}' admits no valid pathway"
        )
    alive: set[ItemId] = set()
    for p in pathways:
        alive.update(p)
    return sorted(set(model.items) - alive)


def is_void(model: Model) -> bool:
    """True when not even one valid complete pathway exists."""
    pathways, _ = enumerate_pathways(model, limit=1)
    return not pathways
