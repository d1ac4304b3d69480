"""Domain type behavior and the structural defect catalog."""

import pytest

from pathweaver.model import (
    Cardinality,
    Constraint,
    ConstraintKind,
    DefectCode,
    Item,
    Kind,
    Model,
    NotAFieldError,
    UnknownItemError,
    children_of,
    normalize_name,
    validate_model,
)


def make_model(items, constraints=(), study_area="computer science"):
    return Model(study_area, {i.id: i for i in items}, tuple(constraints))


FIELD = lambda id, **kw: Item(id, Kind.FIELD, cardinality=Cardinality(1, 1), **kw)
OPTION = lambda id, parent, **kw: Item(id, Kind.OPTION, parent=parent, **kw)


class TestNormalizeName:
    def test_trims_and_collapses(self):
        assert normalize_name("  computer   graphics ") == "computer graphics"

    def test_tabs_and_newlines_collapse_too(self):
        assert normalize_name("a\t b\n c") == "a b c"

    def test_case_is_preserved(self):
        assert normalize_name("Prolog") == "Prolog"

    def test_idempotent(self):
        for raw in ("x", " a  b ", "", "  "):
            once = normalize_name(raw)
            assert normalize_name(once) == once


class TestKinds:
    def test_field_roles(self):
        assert Kind.FIELD.is_field and not Kind.FIELD.is_option

    def test_option_roles(self):
        assert Kind.OPTION.is_option and not Kind.OPTION.is_field

    def test_dual_plays_both(self):
        assert Kind.FIELD_AND_OPTION.is_field
        assert Kind.FIELD_AND_OPTION.is_option


class TestConstraintKind:
    def test_exclude_detection(self):
        assert ConstraintKind.EXCLUDES_OPTION_FIELD.is_exclude
        assert not ConstraintKind.REQUIRES_OPTION_OPTION.is_exclude

    def test_endpoint_roles(self):
        k = ConstraintKind.REQUIRES_OPTION_FIELD
        assert not k.source_is_field and k.target_is_field
        k = ConstraintKind.EXCLUDES_FIELD_FIELD
        assert k.source_is_field and k.target_is_field
        k = ConstraintKind.EXCLUDES_OPTION_OPTION
        assert not k.source_is_field and not k.target_is_field


class TestChildren:
    def test_child_order_follows_declaration(self):
        m = make_model(
            [FIELD("f"), OPTION("b", "f"), OPTION("a", "f")]
        )
        assert children_of(m, "f") == ["b", "a"]

    def test_non_common_children_filter(self):
        m = make_model(
            [
                Item("f", Kind.FIELD, cardinality=Cardinality(1, 1)),
                Item("a", Kind.OPTION, parent="f", common=True),
                OPTION("b", "f"),
            ]
        )
        assert m.non_common_child_ids("f") == ("b",)

    def test_unknown_item_raises(self):
        m = make_model([FIELD("f"), OPTION("a", "f")])
        with pytest.raises(UnknownItemError):
            children_of(m, "ghost")

    def test_option_cannot_own_children(self):
        m = make_model([FIELD("f"), OPTION("a", "f")])
        with pytest.raises(NotAFieldError):
            children_of(m, "a")

    def test_equality_ignores_declaration_order(self):
        a = make_model([FIELD("f"), OPTION("x", "f"), OPTION("y", "f")])
        b = make_model([OPTION("y", "f"), FIELD("f"), OPTION("x", "f")])
        assert a == b


def codes(model):
    return [d.code for d in validate_model(model)]


class TestValidateModel:
    def test_clean_model_has_no_defects(self):
        m = make_model([FIELD("f"), OPTION("a", "f")])
        assert validate_model(m) == []

    def test_orphan_option(self):
        m = make_model([Item("a", Kind.OPTION)])
        assert DefectCode.UNKNOWN_ITEM in codes(m)

    def test_parent_missing_from_model(self):
        m = make_model([FIELD("f"), OPTION("a", "f"), OPTION("b", "ghost")])
        assert DefectCode.UNKNOWN_ITEM in codes(m)

    def test_parent_must_be_a_field(self):
        m = make_model(
            [FIELD("f"), OPTION("a", "f"), OPTION("b", "a")]
        )
        assert DefectCode.NOT_A_FIELD in codes(m)

    def test_pure_field_cannot_have_a_parent(self):
        m = make_model(
            [
                FIELD("f"),
                OPTION("a", "f"),
                Item("g", Kind.FIELD, parent="f", cardinality=Cardinality(1, 1)),
                OPTION("b", "g"),
            ]
        )
        assert DefectCode.NOT_AN_OPTION in codes(m)

    def test_cardinality_on_an_option(self):
        m = make_model(
            [
                FIELD("f"),
                Item("a", Kind.OPTION, parent="f", cardinality=Cardinality(1, 1)),
            ]
        )
        assert DefectCode.NOT_A_FIELD in codes(m)

    def test_field_without_cardinality(self):
        m = make_model([Item("f", Kind.FIELD), OPTION("a", "f")])
        assert codes(m) == [DefectCode.KIND_MISMATCH]

    def test_inverted_bounds(self):
        m = make_model(
            [
                Item("f", Kind.FIELD, cardinality=Cardinality(2, 1)),
                OPTION("a", "f"),
                OPTION("b", "f"),
            ]
        )
        assert DefectCode.CARDINALITY_INVERTED in codes(m)

    def test_max_above_non_common_option_count(self):
        m = make_model(
            [
                Item("f", Kind.FIELD, cardinality=Cardinality(1, 2)),
                Item("a", Kind.OPTION, parent="f", common=True),
                OPTION("b", "f"),
            ]
        )
        # one non-common option, max asks for two
        assert DefectCode.MAX_EXCEEDS_OPTIONS in codes(m)

    def test_self_constraint(self):
        m = make_model(
            [FIELD("f"), OPTION("a", "f")],
            [Constraint(ConstraintKind.REQUIRES_OPTION_OPTION, "a", "a")],
        )
        assert codes(m) == [DefectCode.SELF_CONSTRAINT]

    def test_constraint_endpoint_unknown(self):
        m = make_model(
            [FIELD("f"), OPTION("a", "f")],
            [Constraint(ConstraintKind.REQUIRES_OPTION_OPTION, "a", "ghost")],
        )
        assert DefectCode.UNKNOWN_ITEM in codes(m)

    def test_constraint_endpoint_role_mismatch(self):
        m = make_model(
            [FIELD("f"), OPTION("a", "f")],
            [Constraint(ConstraintKind.REQUIRES_OPTION_OPTION, "a", "f")],
        )
        assert DefectCode.KIND_MISMATCH in codes(m)

    def test_dual_item_satisfies_both_roles(self):
        m = make_model(
            [
                FIELD("f"),
                Item(
                    "d",
                    Kind.FIELD_AND_OPTION,
                    parent="f",
                    cardinality=Cardinality(1, 1),
                ),
                OPTION("x", "d"),
            ],
            [
                Constraint(ConstraintKind.REQUIRES_OPTION_OPTION, "x", "d"),
                Constraint(ConstraintKind.REQUIRES_FIELD_FIELD, "d", "f"),
            ],
        )
        assert validate_model(m) == []

    def test_parent_cycle(self):
        m = make_model(
            [
                Item(
                    "a",
                    Kind.FIELD_AND_OPTION,
                    parent="b",
                    cardinality=Cardinality(1, 1),
                ),
                Item(
                    "b",
                    Kind.FIELD_AND_OPTION,
                    parent="a",
                    cardinality=Cardinality(1, 1),
                ),
            ]
        )
        assert DefectCode.PARENT_CYCLE in codes(m)

    def test_defects_are_sorted_and_stable(self):
        m = make_model(
            [
                Item("f", Kind.FIELD, cardinality=Cardinality(2, 1)),
                OPTION("z", "ghost"),
                OPTION("a", "f"),
            ],
            [Constraint(ConstraintKind.REQUIRES_OPTION_OPTION, "a", "a")],
        )
        first = validate_model(m)
        assert first == validate_model(m)
        assert [d.code.value for d in first] == sorted(
            d.code.value for d in first
        )
