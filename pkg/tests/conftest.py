"""Shared fixtures: the bundled models and a random-model generator.

The generator builds small tree models that are valid by construction
(every field keeps at least one non-common option, cardinalities stay
inside the option count) so property tests can lean on them without
filtering.  Constraint endpoints are always role-correct; beyond that
the constraints are arbitrary and may well make a model void, which the
properties must cope with.
"""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from pathweaver.engine import (
    Decision,
    Derivation,
    Rule,
    SelectionState,
    propagate,
)
from pathweaver.facts import assemble_model, load_model_file, parse_facts
from pathweaver.model import Model, validate_model

MODELS_DIR = Path(__file__).resolve().parents[1] / "src" / "pathweaver" / "models"
FIXTURES_DIR = Path(__file__).resolve().parents[1] / "fixtures"


def load_bundled(name: str) -> Model:
    model, errors, defects = load_model_file(MODELS_DIR / f"{name}.lpm")
    assert not errors and not defects, (errors, defects)
    return model


@pytest.fixture(scope="session")
def fig2() -> Model:
    return load_bundled("figure2")


@pytest.fixture(scope="session")
def demo() -> Model:
    return load_bundled("demo")


def blank_state(model: Model) -> SelectionState:
    return SelectionState(
        decisions={i: Decision.UNDECIDED for i in model.items},
        derivations={},
        trace=(),
    )


def seeded_state(model: Model, seeds) -> SelectionState:
    """Propagated state from (item, decision) user seeds on a blank slate."""
    trace = tuple(
        Derivation(item, decision, Rule.USER) for item, decision in seeds
    )
    return propagate(
        model,
        SelectionState(
            decisions={i: Decision.UNDECIDED for i in model.items},
            derivations={},
            trace=trace,
        ),
    )


def model_from_text(text: str) -> Model:
    facts, errors = parse_facts(text)
    assert not errors, errors
    model, defects = assemble_model(facts)
    assert not defects, defects
    return model


# --- random model generation -----------------------------------------------

# mostly plain lowercase course names; the tail needs quoting when
# serialized, which keeps the round-trip tests honest
_NAME_POOL = [
    "algorithms", "data structures", "calculus", "topology", "compilers",
    "databases", "networks", "operating systems", "robotics", "statistics",
    "logic", "geometry", "queueing theory", "type theory", "cryptography",
    "numerical methods", "signal processing", "game design", "ethics",
    "c++", "web 2", "ml-101", "intro_to_ai", "lambda calculus",
    "Prolog", "Ada", "SQL basics", "3d printing", "42",
]


def _take_names(rng: random.Random, n: int) -> list[str]:
    names = rng.sample(_NAME_POOL, n)
    rng.shuffle(names)
    return names


def random_model(rng: random.Random, max_options: int = 12) -> Model:
    """A defect-free model with at most max_options option-role items."""
    names = _take_names(rng, min(len(_NAME_POOL), max_options + 6))
    root = names.pop()
    facts = [f"type({_q(root)}, studyarea)."]

    option_budget = rng.randint(3, max_options)
    fields: list[str] = []
    option_parents: dict[str, str] = {}
    commons: set[str] = set()

    def add_field(fid: str, dual_of: str | None) -> None:
        fields.append(fid)
        facts.append(f"type({_q(fid)}, field).")
        if dual_of is not None:
            facts.append(f"type({_q(fid)}, option).")
            facts.append(f"choiceof({_q(dual_of)}, {_q(fid)}).")
            option_parents[fid] = dual_of

    n_roots = rng.randint(1, 3)
    for _ in range(n_roots):
        if not names:
            break
        add_field(names.pop(), None)

    used = 0
    idx = 0
    while used < option_budget and names and idx < len(fields) * 4:
        parent = fields[idx % len(fields)]
        idx += 1
        if rng.random() < 0.25:
            continue
        child = names.pop()
        used += 1
        if rng.random() < 0.2 and used < option_budget and names:
            # dual role: this option opens choices of its own
            add_field(child, parent)
            grand = names.pop()
            facts.append(f"choiceof({_q(child)}, {_q(grand)}).")
            option_parents[grand] = child
            used += 1
        else:
            facts.append(f"choiceof({_q(parent)}, {_q(child)}).")
            option_parents[child] = parent

    # drop childless fields (they would default to max=0 against min=1)
    children_of: dict[str, list[str]] = {}
    for child, parent in option_parents.items():
        children_of.setdefault(parent, []).append(child)
    fields = [f for f in fields if children_of.get(f)]
    if not fields:
        return random_model(rng, max_options)
    kept = set(fields) | set(option_parents)
    facts = [
        f
        for f in facts
        if not f.startswith("type(")
        or f.endswith("studyarea).")
        or _fact_subject(f) in kept
    ]

    for name in list(option_parents) + fields:
        if name in commons:
            continue
        if rng.random() < (0.2 if name in children_of else 0.12):
            commons.add(name)
    # keep at least one non-common option under every field
    for fid in fields:
        kids = children_of[fid]
        if all(k in commons for k in kids):
            commons.discard(rng.choice(kids))
    for name in sorted(commons):
        facts.append(f"common({_q(name)}, yes).")

    for fid in fields:
        n = sum(1 for k in children_of[fid] if k not in commons)
        if rng.random() < 0.2:
            continue  # defaults: min 1, max n
        lo = rng.choice([0, 1, 1, min(2, n)])
        hi = rng.randint(max(lo, 1), n)
        facts.append(f"min({_q(fid)}, {lo}).")
        facts.append(f"max({_q(fid)}, {hi}).")

    option_role = sorted(option_parents)
    field_role = sorted(fields)
    kinds = {
        "requires_option_option": (option_role, option_role),
        "excludes_option_option": (option_role, option_role),
        "requires_option_field": (option_role, field_role),
        "excludes_option_field": (option_role, field_role),
        "requires_field_field": (field_role, field_role),
        "excludes_field_field": (field_role, field_role),
    }
    seen = set()
    for _ in range(rng.randint(0, 5)):
        kind = rng.choice(sorted(kinds))
        sources, targets = kinds[kind]
        if not sources or not targets:
            continue
        source, target = rng.choice(sources), rng.choice(targets)
        if source == target or (kind, source, target) in seen:
            continue
        seen.add((kind, source, target))
        facts.append(f"{kind}({_q(source)}, {_q(target)}).")

    parsed, errors = parse_facts("\n".join(facts))
    assert not errors, (errors, facts)
    model, defects = assemble_model(parsed)
    assert not defects, (defects, facts)
    assert not validate_model(model)
    return model


def _q(name: str) -> str:
    """Quote a name for a fact file when it would not scan as an atom."""
    lowered = name.lower()
    words = name.split(" ")
    if name == lowered and not any(w.isdigit() for w in words):
        return name
    return f'"{name}"'


def _fact_subject(fact_line: str) -> str:
    inner = fact_line[fact_line.index("(") + 1 : fact_line.rindex(")")]
    return inner.split(",")[0].strip().strip('"')


def random_seeds(rng: random.Random, model: Model, k: int | None = None):
    """Random user decisions: (item, decision) pairs over distinct items."""
    items = sorted(model.items)
    if k is None:
        k = rng.randint(0, min(4, len(items)))
    picked = rng.sample(items, k)
    return [
        (i, rng.choice((Decision.SELECTED, Decision.NOTSELECTED)))
        for i in picked
    ]
