"""End-to-end gate: one test per shipping requirement, one verdict line each.

Each test prints PASS or FAIL with a short label so a plain test run reads
as a checklist.  The checks deliberately go through two independent routes
where possible: the propagation engine on one side, the brute-force
enumerator or recorded fixtures on the other.
"""

import json
import random
import sys
from contextlib import contextmanager

import pytest

from conftest import (
    FIXTURES_DIR,
    MODELS_DIR,
    load_bundled,
    model_from_text,
    random_model,
    random_seeds,
    seeded_state,
)
from pathweaver.engine import (
    _CANONICAL_RULES,
    BlockedByMaxError,
    Decision,
    Derivation,
    Rule,
    SelectionState,
    choose,
    field_counts,
    initial_state,
    propagate,
    validate_complete,
)
from pathweaver.facts import load_model_text, parse_facts, serialize_model
from pathweaver.oracle import enumerate_pathways, find_dead_items, is_void

SEL = Decision.SELECTED
NSEL = Decision.NOTSELECTED


@contextmanager
def criterion(label):
    try:
        yield
    except BaseException:
        print(f"FAIL  {label}", file=sys.stderr)
        raise
    print(f"PASS  {label}", file=sys.stderr)


def unpropagated(model, seeds):
    return SelectionState(
        decisions={i: Decision.UNDECIDED for i in model.items},
        derivations={},
        trace=tuple(Derivation(i, d, Rule.USER) for i, d in seeds),
    )


# --- scenario fixtures for rules the bundled model cannot exhibit ----------

OPTION_NEEDS_FIELD = (
    "type(cs, studyarea).\n"
    "type(networking, field).\n"
    "choiceof(networking, client server programming).\n"
    "choiceof(networking, socket programming).\n"
    "type(programming language, field).\n"
    "choiceof(programming language, java).\n"
    "choiceof(programming language, prolog).\n"
    "requires_option_field(client server programming, programming language).\n"
)

LAST_OPTION = (
    "type(cs, studyarea).\n"
    "type(programming language, field).\n"
    "common(programming language, yes).\n"
    "choiceof(programming language, java).\n"
    "choiceof(programming language, prolog).\n"
)

COMMON_OPTION = (
    "type(cs, studyarea).\n"
    "type(computing mathematics, field).\n"
    "choiceof(computing mathematics, discrete mathematics).\n"
    "choiceof(computing mathematics, graph theory).\n"
    "choiceof(computing mathematics, calculus).\n"
    "common(discrete mathematics, yes).\n"
)

MIN_TWO = (
    "type(cs, studyarea).\n"
    "type(electives, field).\ncommon(electives, yes).\nmin(electives, 2).\n"
    "choiceof(electives, a).\nchoiceof(electives, b).\nchoiceof(electives, c).\n"
)


def derived(state, item):
    d = state.derivations.get(item)
    return state.decision_of(item), (d.rule if d else None)


def test_each_deduction_rule_fires_in_its_scenario():
    fig2 = load_bundled("figure2")
    with criterion("all thirteen deduction rules behave as documented"):
        base = initial_state(fig2)

        # one user action on the bundled model per constraint-driven rule
        st = choose(fig2, base, "programming language theories")
        assert derived(st, "advance discrete mathematics") == (SEL, Rule.R1)

        st = choose(fig2, base, "database concepts")
        assert derived(st, "network operating systems") == (NSEL, Rule.R2)

        st = seeded_state(
            model_from_text(OPTION_NEEDS_FIELD),
            [("client server programming", SEL)],
        )
        assert derived(st, "programming language") == (SEL, Rule.R3)

        st = choose(fig2, base, "distributed systems")
        assert derived(st, "computer graphics") == (NSEL, Rule.R4)

        st = choose(fig2, base, "2d graphics")
        assert derived(st, "programming methodology and languages") == (
            SEL,
            Rule.R5,
        )
        assert derived(st, "computer graphics") == (SEL, Rule.R7)

        st = choose(fig2, base, "machine learning")
        assert derived(st, "computer network and communication") == (
            NSEL,
            Rule.R6,
        )
        assert derived(st, "database concepts") == (NSEL, Rule.R9)

        st = seeded_state(model_from_text(LAST_OPTION), [("java", NSEL)])
        assert derived(st, "prolog") == (SEL, Rule.R8)

        st = seeded_state(model_from_text(COMMON_OPTION), [("graph theory", SEL)])
        assert derived(st, "discrete mathematics") == (SEL, Rule.R10)

        assert derived(base, "methodology") == (SEL, Rule.R11)

        st = choose(fig2, base, "structured methodology")
        assert derived(st, "programming language theories") == (NSEL, Rule.R12)

        short = seeded_state(
            model_from_text(MIN_TWO), [("a", SEL), ("b", NSEL), ("c", NSEL)]
        )
        report = validate_complete(model_from_text(MIN_TWO), short)
        assert not report.ok
        assert Rule.R13 in {v.rule for v in report.violations}
        enough = seeded_state(
            model_from_text(MIN_TWO), [("a", SEL), ("b", SEL), ("c", NSEL)]
        )
        assert validate_complete(model_from_text(MIN_TWO), enough).ok


def test_propagation_laws_hold_at_scale():
    with criterion(
        "propagation is idempotent, monotone, and order-independent "
        "on 1000 random models"
    ):
        for seed in range(1000):
            rng = random.Random(seed)
            model = random_model(rng)
            seeds = random_seeds(rng, model)
            pre = unpropagated(model, seeds)
            base = propagate(model, pre)

            again = propagate(model, base)
            assert again.decisions == base.decisions, seed
            assert again.conflicts == base.conflicts, seed

            for item, _ in seeds:
                assert base.decision_of(item) is not Decision.UNDECIDED, seed

            conflicted = {c.item for c in base.conflicts}
            for trial in range(3):
                order = list(_CANONICAL_RULES)
                rng.shuffle(order)
                other = propagate(model, pre, _rule_order=order)
                assert {c.item for c in other.conflicts} == conflicted, seed
                for item in model.items:
                    if item in conflicted:
                        continue
                    assert other.decision_of(item) is base.decision_of(
                        item
                    ), (seed, trial, item)


def test_engine_agrees_with_brute_force_enumeration():
    with criterion(
        "forced decisions match brute-force enumeration on 150 random models"
    ):
        for seed in range(150):
            rng = random.Random(seed)
            model = random_model(rng, max_options=10)
            pathways, truncated = enumerate_pathways(model)
            assert not truncated
            members = set(pathways)

            state = initial_state(model)
            if state.is_conflicted:
                assert pathways == [], seed
            else:
                for item in model.items:
                    dec = state.decision_of(item)
                    if dec is SEL:
                        assert all(item in p for p in pathways), (seed, item)
                    elif dec is NSEL:
                        assert all(item not in p for p in pathways), (seed, item)

                # a single extra user decision must prune exactly the
                # pathways that disagree with it, and nothing else
                open_options = sorted(
                    i
                    for i in state.undecided()
                    if model.items[i].parent is not None
                )
                for item in open_options[:2]:
                    for wanted in (SEL, NSEL):
                        after = propagate(
                            model, unpropagated(model, [(item, wanted)])
                        )
                        consistent = [
                            p
                            for p in pathways
                            if (item in p) == (wanted is SEL)
                        ]
                        if after.is_conflicted:
                            assert consistent == [], (seed, item, wanted)
                            continue
                        for j in model.items:
                            dec = after.decision_of(j)
                            if dec is SEL:
                                assert all(
                                    j in p for p in consistent
                                ), (seed, item, j)
                            elif dec is NSEL:
                                assert all(
                                    j not in p for p in consistent
                                ), (seed, item, j)

            # full assignments: membership in the enumeration and the
            # engine's completion verdict must agree
            all_items = sorted(model.items)
            options = [
                i for i in all_items if model.items[i].parent is not None
            ]
            for idx, p in enumerate(pathways[:3]):
                chosen = set(p)
                full = seeded_state(
                    model,
                    [(i, SEL if i in chosen else NSEL) for i in all_items],
                )
                assert not full.is_conflicted, (seed, p)
                assert validate_complete(model, full).ok, (seed, p)

                if not options:
                    continue
                flipped = chosen ^ {options[idx % len(options)]}
                if tuple(sorted(flipped)) in members:
                    continue
                mutant = seeded_state(
                    model,
                    [(i, SEL if i in flipped else NSEL) for i in all_items],
                )
                assert not validate_complete(model, mutant).ok, (seed, p)


def test_cardinality_counts_only_non_common_selections():
    text = (
        "type(cs, studyarea).\n"
        "type(skills, field).\ncommon(skills, yes).\n"
        "min(skills, 1).\nmax(skills, 2).\n"
        "choiceof(skills, core seminar).\ncommon(core seminar, yes).\n"
        "choiceof(skills, modelling).\nchoiceof(skills, proofs).\n"
        "choiceof(skills, tooling).\n"
    )
    with criterion("cardinalities count non-common selections exactly"):
        model = model_from_text(text)
        state = initial_state(model)
        assert state.decision_of("core seminar") is SEL
        assert field_counts(model, state)["skills"] == 0

        state = choose(model, state, "modelling")
        assert field_counts(model, state)["skills"] == 1
        # below max nothing is squeezed out yet
        assert state.decision_of("proofs") is Decision.UNDECIDED

        state = choose(model, state, "proofs")
        assert field_counts(model, state)["skills"] == 2
        assert derived(state, "tooling") == (NSEL, Rule.R12)
        with pytest.raises(BlockedByMaxError):
            choose(model, state, "tooling")
        assert validate_complete(model, state).ok

        starved = seeded_state(
            model, [("modelling", NSEL), ("proofs", NSEL), ("tooling", NSEL)]
        )
        report = validate_complete(model, starved)
        assert not report.ok
        assert Rule.R13 in {v.rule for v in report.violations}


def test_model_files_round_trip_through_the_canonical_form():
    with criterion(
        "serialization round-trips bundled, documented, and 500 random models"
    ):
        for name in ("figure2", "demo"):
            text = (MODELS_DIR / f"{name}.lpm").read_text(encoding="utf-8")
            model, errors, defects = load_model_text(text)
            assert not errors and not defects
            canonical = serialize_model(model)
            again, errors2, defects2 = load_model_text(canonical)
            assert not errors2 and not defects2
            assert again == model
            assert serialize_model(again) == canonical

        from test_facts import COMPUTER_GRAPHICS_BLOCK, DISTRIBUTED_SYSTEMS_BLOCK

        for block, count in (
            (COMPUTER_GRAPHICS_BLOCK, 8),
            (DISTRIBUTED_SYSTEMS_BLOCK, 3),
        ):
            facts, errors = parse_facts(block)
            assert errors == []
            assert len(facts) == count

        for seed in range(500):
            model = random_model(random.Random(seed))
            canonical = serialize_model(model)
            again, errors, defects = load_model_text(canonical)
            assert not errors and not defects, seed
            assert again == model, seed
            assert serialize_model(again) == canonical, seed


def test_reference_model_reaches_its_frozen_figures():
    with criterion(
        "bundled study area: clean parse, deterministic start, 671 pathways"
    ):
        text = (MODELS_DIR / "figure2.lpm").read_text(encoding="utf-8")
        model, errors, defects = load_model_text(text)
        assert errors == [] and defects == []
        assert len(model.items) == 22
        assert len(model.constraints) == 6

        state = initial_state(model)
        assert not state.is_conflicted
        selected = {
            i for i in model.items if state.decision_of(i) is SEL
        }
        assert selected == {
            "methodology",
            "discrete mathematics",
            "computing mathematics",
            "graph theory",
        }
        assert [(d.item, d.rule.value) for d in state.trace] == [
            ("discrete mathematics", "R11"),
            ("methodology", "R11"),
            ("computing mathematics", "R7"),
            ("graph theory", "R8"),
        ]

        pathways, truncated = enumerate_pathways(model)
        assert not truncated
        assert len(pathways) == 671
        assert find_dead_items(model) == []

        demo, errors, defects = load_model_text(
            (MODELS_DIR / "demo.lpm").read_text(encoding="utf-8")
        )
        assert not errors and not defects
        assert not is_void(demo)
        assert len(enumerate_pathways(demo)[0]) == 2

        # loading twice yields byte-identical canonical output
        twin, _, _ = load_model_text(text)
        assert serialize_model(twin) == serialize_model(model)


def _compact(payload) -> bytes:
    return json.dumps(
        payload, ensure_ascii=False, allow_nan=False, separators=(",", ":")
    ).encode("utf-8")


def test_recorded_service_walkthrough_replays_byte_identically(monkeypatch):
    from fastapi.testclient import TestClient

    from pathweaver.service import create_app

    fixture_path = FIXTURES_DIR / "session" / "figure2_walkthrough.json"
    fixture = json.loads(fixture_path.read_text(encoding="utf-8"))
    with criterion(
        "service replays the recorded walkthrough byte for byte, "
        "rejecting its conflict atomically"
    ):
        monkeypatch.setenv("PATHWEAVER_TEST_CLOCK", fixture["clock"])
        for var in (
            "PATHWEAVER_SNAPSHOT",
            "PATHWEAVER_MODELS",
            "PATHWEAVER_STATIC",
        ):
            monkeypatch.delenv(var, raising=False)
        client = TestClient(create_app())

        models_fixture = json.loads(
            (FIXTURES_DIR / "session" / "models.json").read_text(
                encoding="utf-8"
            )
        )
        live = client.get("/api/v1/models")
        assert live.content == _compact(models_fixture)

        sid = fixture["session"]
        saw_conflict = False
        for step in fixture["steps"]:
            if step["status"] == 409:
                before = client.get(f"/api/v1/sessions/{sid}").content
            if step["method"] == "GET":
                r = client.get(step["path"])
            elif step["body"] is None:
                r = client.post(step["path"])
            else:
                r = client.post(step["path"], json=step["body"])
            assert r.status_code == step["status"], step["path"]
            assert r.content == _compact(step["response"]), step["path"]
            if step["status"] == 409:
                saw_conflict = True
                after = client.get(f"/api/v1/sessions/{sid}").content
                assert after == before

        assert saw_conflict
        assert fixture["steps"][-1]["response"]["ok"] is True
