"""pathweaver: variability models for student learning pathways."""

from .engine import (
    ChoiceStatus,
    Conflict,
    Decision,
    Derivation,
    Rule,
    SelectionState,
    ValidationReport,
    Violation,
    available_choices,
    choose,
    exclude,
    field_counts,
    initial_state,
    propagate,
    validate_complete,
)
from .facts import (
    Fact,
    ParseError,
    ParseErrorCode,
    assemble_model,
    load_model_file,
    load_model_text,
    parse_facts,
    serialize_model,
)
from .model import (
    Cardinality,
    Constraint,
    ConstraintKind,
    DefectCode,
    DomainError,
    Item,
    ItemId,
    Kind,
    Model,
    ModelDefect,
    children_of,
    normalize_name,
    validate_model,
)
from .oracle import (
    ModelTooLargeError,
    VoidModelError,
    enumerate_pathways,
    find_dead_items,
    is_void,
)

__version__ = "0.1.0"
