"""Command line front end.

Machine-readable JSON goes to stdout, human diagnostics to stderr.  Exit
codes: 0 success, 1 for negative findings (defects, rule violations,
conflicts, a void model), 2 for usage or I/O trouble.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .engine import (
    Decision,
    Derivation,
    Rule,
    initial_state,
    propagate,
    validate_complete,
)
from .facts import load_model_text, parse_facts
from .model import DomainError, Model, normalize_name
from .oracle import (
    MAX_OPTIONS,
    VoidModelError,
    enumerate_pathways,
    find_dead_items,
)

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2

SELECTION_PREDICATES = {"select", "notselect"}


def _emit(payload: dict) -> None:
    json.dump(payload, sys.stdout, indent=2, sort_keys=False)
    sys.stdout.write("\n")


def _fail_usage(message: str) -> int:
    print(f"pathweaver: {message}", file=sys.stderr)
    return EXIT_USAGE


def _parse_error_dict(err) -> dict:
    return {
        "code": err.code.value,
        "message": err.message,
        "line": err.line,
        "column": err.column,
    }


def _defect_dict(defect) -> dict:
    return {
        "code": defect.code.value,
        "items": list(defect.items),
        "message": defect.message,
    }


def _load_model(path_str: str):
    """Read and assemble a model file; I/O failures end the process."""
    try:
        text = Path(path_str).read_text(encoding="utf-8")
    except OSError as exc:
        raise SystemExit(_fail_usage(f"cannot read {path_str}: {exc}"))
    return load_model_text(text)


def _require_clean(path_str: str) -> Model | None:
    """Model from the file, or None after reporting its problems."""
    model, errors, defects = _load_model(path_str)
    if errors or defects:
        _emit(
            {
                "file": path_str,
                "ok": False,
                "parse_errors": [_parse_error_dict(e) for e in errors],
                "defects": [_defect_dict(d) for d in defects],
            }
        )
        print(
            f"pathweaver: InvalidModel: {path_str} has "
            f"{len(errors)} parse error(s) and {len(defects)} defect(s)",
            file=sys.stderr,
        )
        return None
    return model


def _read_selection_json(path_str: str) -> list[tuple[str, str]]:
    """(item, state) pairs from a JSON selection file.

    Accepts the recorded shape, a list of {"item", "state"} objects, and
    as a convenience the {"item": "state"} mapping a propagate dump uses.
    Shape problems are usage errors; unknown items are judged later.
    """
    try:
        raw = json.loads(Path(path_str).read_text(encoding="utf-8"))
    except OSError as exc:
        raise SystemExit(_fail_usage(f"cannot read {path_str}: {exc}"))
    except ValueError as exc:
        raise SystemExit(_fail_usage(f"{path_str} is not valid JSON: {exc}"))
    if isinstance(raw, dict):
        entries = [{"item": k, "state": v} for k, v in raw.items()]
    elif isinstance(raw, list):
        entries = raw
    else:
        raise SystemExit(
            _fail_usage(f"{path_str}: expected a list of item/state objects")
        )
    pairs: list[tuple[str, str]] = []
    for entry in entries:
        if (
            not isinstance(entry, dict)
            or not isinstance(entry.get("item"), str)
            or not isinstance(entry.get("state"), str)
        ):
            raise SystemExit(
                _fail_usage(f"{path_str}: every entry needs an item and a state")
            )
        state = entry["state"]
        if state not in ("selected", "notselected", "undecided"):
            raise SystemExit(
                _fail_usage(f"{path_str}: unknown state {state!r}")
            )
        if state != "undecided":
            pairs.append((normalize_name(entry["item"]), state))
    return pairs


def _seed_decisions(model: Model, args) -> list[Derivation] | None:
    """User derivations from the selection JSON, a fact file, and flags.

    Returns None after emitting a findings payload when the selection
    refers to items the model does not have or the fact file is broken.
    """
    seeds: list[Derivation] = []
    problems: list[dict] = []
    if getattr(args, "selection", None):
        for item, state in _read_selection_json(args.selection):
            decision = (
                Decision.SELECTED if state == "selected" else Decision.NOTSELECTED
            )
            seeds.append(Derivation(item, decision, Rule.USER))
    if args.facts:
        try:
            text = Path(args.facts).read_text(encoding="utf-8")
        except OSError as exc:
            raise SystemExit(_fail_usage(f"cannot read {args.facts}: {exc}"))
        facts, errors = parse_facts(text, allow_selection=True)
        problems.extend(_parse_error_dict(e) for e in errors)
        for fact in facts:
            if fact.predicate not in SELECTION_PREDICATES:
                problems.append(
                    {
                        "code": "NotASelectionFact",
                        "message": f"{fact.predicate}(...) does not belong in "
                        "a selection file",
                        "line": fact.line,
                        "column": fact.column,
                    }
                )
                continue
            decision = (
                Decision.SELECTED
                if fact.predicate == "select"
                else Decision.NOTSELECTED
            )
            seeds.append(Derivation(str(fact.args[0]), decision, Rule.USER))
    for name in args.select or []:
        seeds.append(Derivation(normalize_name(name), Decision.SELECTED, Rule.USER))
    for name in args.exclude or []:
        seeds.append(
            Derivation(normalize_name(name), Decision.NOTSELECTED, Rule.USER)
        )
    for seed in seeds:
        if seed.item not in model.items:
            problems.append(
                {
                    "code": "UnknownItem",
                    "message": f"no item named '{seed.item}'",
                }
            )
    if problems:
        _emit({"ok": False, "selection_errors": problems})
        for p in problems:
            print(f"pathweaver: {p['code']}: {p['message']}", file=sys.stderr)
        return None
    return seeds


def _propagated(model: Model, seeds: list[Derivation]):
    state = initial_state(model)
    if seeds:
        state = replace(state, trace=state.trace + tuple(seeds))
        state = propagate(model, state)
    return state


def cmd_check(args) -> int:
    model, errors, defects = _load_model(args.file)
    ok = not errors and not defects
    payload = {
        "file": args.file,
        "ok": ok,
        "study_area": model.study_area,
        "items": len(model.items),
        "fields": sum(1 for it in model.items.values() if it.kind.is_field),
        "options": sum(1 for it in model.items.values() if it.parent is not None),
        "constraints": len(model.constraints),
        "parse_errors": [_parse_error_dict(e) for e in errors],
        "defects": [_defect_dict(d) for d in defects],
    }
    _emit(payload)
    if not ok:
        print(
            f"pathweaver: InvalidModel: {len(errors)} parse error(s), "
            f"{len(defects)} defect(s)",
            file=sys.stderr,
        )
    return EXIT_OK if ok else EXIT_FINDINGS


def cmd_propagate(args) -> int:
    model = _require_clean(args.file)
    if model is None:
        return EXIT_FINDINGS
    seeds = _seed_decisions(model, args)
    if seeds is None:
        return EXIT_FINDINGS
    state = _propagated(model, seeds)
    _emit(
        {
            "ok": not state.is_conflicted,
            "decisions": {
                item: state.decision_of(item).value for item in sorted(model.items)
            },
            "derivations": [d.as_dict() for d in state.trace],
            "conflicts": [c.as_dict() for c in state.conflicts],
        }
    )
    if state.is_conflicted:
        print(
            f"pathweaver: Conflict: '{state.conflicts[0].item}' is forced "
            "both ways",
            file=sys.stderr,
        )
        return EXIT_FINDINGS
    return EXIT_OK


def cmd_validate(args) -> int:
    model = _require_clean(args.file)
    if model is None:
        return EXIT_FINDINGS
    seeds = _seed_decisions(model, args)
    if seeds is None:
        return EXIT_FINDINGS
    state = _propagated(model, seeds)
    report = validate_complete(model, state)
    _emit(report.as_dict())
    if not report.ok:
        named = sorted({v.rule.value for v in report.violations})
        print(
            "pathweaver: InvalidSelection: "
            + (", ".join(named) if named else "conflict"),
            file=sys.stderr,
        )
        return EXIT_FINDINGS
    return EXIT_OK


def cmd_enumerate(args) -> int:
    model = _require_clean(args.file)
    if model is None:
        return EXIT_FINDINGS
    try:
        if args.dead:
            dead = find_dead_items(model)
            _emit({"dead": dead})
            return EXIT_OK
        if args.void:
            pathways, _ = enumerate_pathways(model, limit=1)
            _emit({"void": not pathways})
            if not pathways:
                print("pathweaver: VoidModel: no pathway exists", file=sys.stderr)
                return EXIT_FINDINGS
            return EXIT_OK
        pathways, truncated = enumerate_pathways(model, limit=args.limit)
    except VoidModelError:
        _emit({"dead": None, "error": {"code": "VoidModel",
                                       "message": "the model admits no pathway"}})
        print("pathweaver: VoidModel: no pathway exists", file=sys.stderr)
        return EXIT_FINDINGS
    except DomainError as exc:
        _emit({"error": {"code": exc.code, "message": str(exc)}})
        print(f"pathweaver: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_FINDINGS
    for pathway in pathways:
        sys.stdout.write(json.dumps(list(pathway), separators=(",", ":")) + "\n")
    note = " (truncated)" if truncated else ""
    print(f"{len(pathways)} pathway(s){note}", file=sys.stderr)
    if not pathways:
        print("pathweaver: VoidModel: no pathway exists", file=sys.stderr)
        return EXIT_FINDINGS
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(
        models_dir=args.models,
        static_dir=args.static,
        snapshot_path=args.snapshot,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def _add_selection_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "selection",
        nargs="?",
        default=None,
        help='JSON selection: a list of {"item", "state"} objects',
    )
    parser.add_argument(
        "--facts",
        metavar="FILE",
        help="file of select(...)/notselect(...) facts to start from",
    )
    parser.add_argument(
        "--select", action="append", metavar="ITEM", help="select one item"
    )
    parser.add_argument(
        "--exclude", action="append", metavar="ITEM", help="rule one item out"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathweaver",
        description="Model learning pathways and reason about selections.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="parse a model file and list its defects")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser(
        "propagate", help="apply a selection and print every consequence"
    )
    p.add_argument("file")
    _add_selection_flags(p)
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser(
        "validate", help="judge a selection as a finished pathway"
    )
    p.add_argument("file")
    _add_selection_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser(
        "enumerate",
        help=f"list every valid pathway (up to {MAX_OPTIONS} options)",
    )
    p.add_argument("file")
    p.add_argument("--limit", type=int, default=None, metavar="N",
                   help="stop after N pathways")
    p.add_argument("--dead", action="store_true",
                   help="print unreachable items instead")
    p.add_argument("--void", action="store_true",
                   help="only answer whether any pathway exists")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--models", default=None, metavar="DIR",
                   help="directory of .lpm model files")
    p.add_argument("--static", default=None, metavar="DIR",
                   help="directory of web UI files to serve at /")
    p.add_argument("--snapshot", default=None, metavar="FILE",
                   help="JSON-lines action log for session persistence")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        _emit({"error": {"code": exc.code, "message": str(exc)}})
        print(f"pathweaver: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_FINDINGS


if __name__ == "__main__":
    sys.exit(main())
