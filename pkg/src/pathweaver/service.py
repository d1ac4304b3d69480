"""Session-based HTTP service over the selection engine.

Each session owns one evolving selection against a catalog model.  The
service applies user actions, propagates, and answers with state deltas;
a conflicting action is rejected whole with both derivation chains and
the session is left exactly as it was.  Sessions live in memory, with an
optional JSON-lines log of actions that is replayed at startup.

Two environment switches matter for reproducible runs: PATHWEAVER_MODELS
points the catalog at a directory of .lpm files, and PATHWEAVER_TEST_CLOCK
freezes timestamps and makes session ids sequential so that replaying a
recorded script yields byte-identical responses.
"""

from __future__ import annotations

import json
import os
import secrets
import sys
import threading
from dataclasses import dataclass, field as dc_field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .engine import (
    SelectionState,
    choose,
    exclude,
    field_counts,
    initial_state,
    validate_complete,
)
from .facts import load_model_file
from .model import DomainError, ItemId, Model

API_PREFIX = "/api/v1"

_STATUS_BY_CODE = {
    "UnknownModel": 404,
    "UnknownSession": 404,
    "UnknownItem": 422,
    "AlreadyDecided": 422,
    "BlockedByMax": 422,
    "ExcludesCommon": 422,
    "NothingToUndo": 422,
}


class UnknownModelError(DomainError):
    code = "UnknownModel"


class UnknownSessionError(DomainError):
    code = "UnknownSession"


class NothingToUndoError(DomainError):
    code = "NothingToUndo"


class CreateSessionBody(BaseModel):
    model: str


class ItemBody(BaseModel):
    item: str


@dataclass
class Session:
    id: str
    model_name: str
    model: Model
    state: SelectionState
    history: list[tuple[str, ItemId]] = dc_field(default_factory=list)
    created_at: str = ""
    updated_at: str = ""
    lock: threading.Lock = dc_field(default_factory=threading.Lock)


class _Clock:
    """Real UTC timestamps, or one frozen string in test mode."""

    def __init__(self, fixed: str | None):
        self.fixed = fixed

    def now(self) -> str:
        if self.fixed is not None:
            return self.fixed
        return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class _IdFactory:
    """URL-safe random ids; sequential in test mode so replays compare."""

    def __init__(self, deterministic: bool):
        self.deterministic = deterministic
        self._counter = 0
        self._lock = threading.Lock()

    def next_id(self) -> str:
        if not self.deterministic:
            return secrets.token_urlsafe(16)
        with self._lock:
            self._counter += 1
            return f"session-{self._counter:08d}"

    def register(self, sid: str) -> None:
        """Keep the sequence ahead of ids restored from a snapshot."""
        if not self.deterministic:
            return
        head, _, tail = sid.rpartition("-")
        if head == "session" and tail.isdigit():
            with self._lock:
                self._counter = max(self._counter, int(tail))


def load_catalog(models_dir: Path) -> dict[str, Model]:
    """Every defect-free .lpm model in the directory, keyed by file stem.

    Files that fail to parse or carry defects are skipped with a warning;
    the service never hands out sessions on a broken model.
    """
    catalog: dict[str, Model] = {}
    for path in sorted(models_dir.glob("*.lpm")):
        model, parse_errors, defects = load_model_file(path)
        if parse_errors or defects:
            print(
                f"warning: skipping {path.name}: "
                f"{len(parse_errors)} parse error(s), {len(defects)} defect(s)",
                file=sys.stderr,
            )
            continue
        catalog[path.stem] = model
    return catalog


def _counts_view(model: Model, state: SelectionState) -> dict:
    counts = field_counts(model, state)
    return {
        fid: {
            "selected": n,
            "min": model.items[fid].cardinality.min,
            "max": model.items[fid].cardinality.max,
        }
        for fid, n in counts.items()
        if model.items[fid].cardinality is not None
    }


def _item_view(model: Model, state: SelectionState, item_id: ItemId) -> dict:
    item = model.items[item_id]
    deriv = state.derivations.get(item_id)
    return {
        "id": item_id,
        "kind": item.kind.value,
        "common": item.common,
        "parent": item.parent,
        "min": item.cardinality.min if item.cardinality else None,
        "max": item.cardinality.max if item.cardinality else None,
        "children": list(model.child_ids(item_id)),
        "state": state.decision_of(item_id).value,
        "rule": deriv.rule.value if deriv else None,
        "premises": list(deriv.premises) if deriv else [],
    }


def _state_view(session: Session) -> dict:
    model, state = session.model, session.state
    return {
        "session": session.id,
        "model": session.model_name,
        "study_area": model.study_area,
        "items": {i: _item_view(model, state, i) for i in model.items},
        "counts": _counts_view(model, state),
        "undecided": len(state.undecided()),
        "history": len(session.history),
        "created_at": session.created_at,
        "updated_at": session.updated_at,
    }


def _delta_view(
    session: Session,
    action: str,
    item: ItemId | None,
    before: SelectionState,
    after: SelectionState,
) -> dict:
    changed = []
    for item_id in sorted(session.model.items):
        if before.decision_of(item_id) is after.decision_of(item_id):
            continue
        deriv = after.derivations.get(item_id)
        changed.append(
            {
                "item": item_id,
                "state": after.decision_of(item_id).value,
                "rule": deriv.rule.value if deriv else None,
                "premises": list(deriv.premises) if deriv else [],
            }
        )
    view = {
        "session": session.id,
        "action": action,
        "changed": changed,
        "counts": _counts_view(session.model, after),
        "undecided": len(after.undecided()),
        "updated_at": session.updated_at,
    }
    if item is not None:
        view["item"] = item
    return view


def _error_response(status: int, code: str, message: str, **extra) -> JSONResponse:
    body = {"error": {"code": code, "message": message, **extra}}
    return JSONResponse(status_code=status, content=body)


def _conflict_response(session: Session, state: SelectionState) -> JSONResponse:
    first = state.conflicts[0]
    return _error_response(
        409,
        "Conflict",
        f"'{first.item}' would have to be selected and not selected at once; "
        "the action was rolled back",
        item=first.item,
        selected_by=first.selected_by.as_dict(),
        notselected_by=first.notselected_by.as_dict(),
        conflicts=[c.as_dict() for c in state.conflicts],
    )


class _Snapshot:
    """Append-only JSON-lines action log, replayed at startup."""

    def __init__(self, path: Path | None):
        self.path = path
        self._lock = threading.Lock()

    def append(self, record: dict) -> None:
        if self.path is None:
            return
        with self._lock:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, separators=(",", ":")) + "\n")

    def replay(self, app_state: "_AppState") -> None:
        if self.path is None or not self.path.exists():
            return
        for line in self.path.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                _apply_snapshot_record(app_state, record)
            except (ValueError, KeyError, DomainError) as exc:
                print(f"warning: snapshot line skipped: {exc}", file=sys.stderr)


def _apply_snapshot_record(app_state: "_AppState", record: dict) -> None:
    op = record["op"]
    if op == "create":
        model_name = record["model"]
        model = app_state.catalog.get(model_name)
        if model is None:
            raise UnknownModelError(f"no model named '{model_name}'")
        session = Session(
            id=record["session"],
            model_name=model_name,
            model=model,
            state=initial_state(model),
            created_at=record.get("ts", ""),
            updated_at=record.get("ts", ""),
        )
        app_state.sessions[session.id] = session
        app_state.ids.register(session.id)
        return
    session = app_state.sessions.get(record["session"])
    if session is None:
        raise UnknownSessionError(f"no session '{record['session']}' in snapshot")
    if op == "select":
        session.state = choose(session.model, session.state, record["item"])
        session.history.append(("select", record["item"]))
    elif op == "exclude":
        session.state = exclude(session.model, session.state, record["item"])
        session.history.append(("exclude", record["item"]))
    elif op == "undo":
        _replay_undo(session)
    session.updated_at = record.get("ts", session.updated_at)


def _replay_undo(session: Session) -> None:
    if not session.history:
        raise NothingToUndoError("no action left to undo")
    history = session.history[:-1]
    state = initial_state(session.model)
    for action, item in history:
        if action == "select":
            state = choose(session.model, state, item)
        else:
            state = exclude(session.model, state, item)
    session.state = state
    session.history = history


@dataclass
class _AppState:
    catalog: dict[str, Model]
    sessions: dict[str, Session]
    clock: _Clock
    ids: _IdFactory
    snapshot: _Snapshot
    registry_lock: threading.Lock


def create_app(
    models_dir: str | Path | None = None,
    static_dir: str | Path | None = None,
    snapshot_path: str | Path | None = None,
) -> FastAPI:
    """Build the service around a model catalog directory.

    Falls back to PATHWEAVER_MODELS, then to the bundled models.  A
    static directory, when given (or via PATHWEAVER_STATIC), is served at
    the web root; the JSON API lives under /api/v1 either way.
    """
    if models_dir is None:
        models_dir = os.environ.get("PATHWEAVER_MODELS")
    if models_dir is None:
        models_dir = Path(__file__).parent / "models"
    if static_dir is None:
        static_dir = os.environ.get("PATHWEAVER_STATIC")
    if snapshot_path is None:
        snapshot_path = os.environ.get("PATHWEAVER_SNAPSHOT")

    test_clock = os.environ.get("PATHWEAVER_TEST_CLOCK")
    state = _AppState(
        catalog=load_catalog(Path(models_dir)),
        sessions={},
        clock=_Clock(test_clock),
        ids=_IdFactory(deterministic=test_clock is not None),
        snapshot=_Snapshot(Path(snapshot_path) if snapshot_path else None),
        registry_lock=threading.Lock(),
    )
    state.snapshot.replay(state)

    app = FastAPI(title="pathweaver", docs_url=None, redoc_url=None)
    app.state.pathweaver = state

    @app.exception_handler(DomainError)
    async def domain_error_handler(request: Request, exc: DomainError):
        status = _STATUS_BY_CODE.get(exc.code, 422)
        return _error_response(status, exc.code, str(exc))

    def get_session(sid: str) -> Session:
        session = state.sessions.get(sid)
        if session is None:
            raise UnknownSessionError(f"no session named '{sid}'")
        return session

    @app.get(API_PREFIX + "/models")
    def list_models():
        entries = []
        for name in sorted(state.catalog):
            model = state.catalog[name]
            entries.append(
                {
                    "name": name,
                    "study_area": model.study_area,
                    "items": len(model.items),
                    "fields": sum(
                        1 for it in model.items.values() if it.kind.is_field
                    ),
                    "options": sum(
                        1 for it in model.items.values() if it.parent is not None
                    ),
                }
            )
        return {"models": entries}

    @app.post(API_PREFIX + "/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        model = state.catalog.get(body.model)
        if model is None:
            raise UnknownModelError(f"no model named '{body.model}'")
        now = state.clock.now()
        with state.registry_lock:
            session = Session(
                id=state.ids.next_id(),
                model_name=body.model,
                model=model,
                state=initial_state(model),
                created_at=now,
                updated_at=now,
            )
            state.sessions[session.id] = session
        state.snapshot.append(
            {"op": "create", "session": session.id, "model": body.model, "ts": now}
        )
        return {
            "session": session.id,
            "model": session.model_name,
            "study_area": model.study_area,
            "created_at": session.created_at,
            "updated_at": session.updated_at,
            "undecided": len(session.state.undecided()),
            "history": 0,
        }

    @app.get(API_PREFIX + "/sessions/{sid}")
    def get_state(sid: str):
        session = get_session(sid)
        with session.lock:
            return _state_view(session)

    def apply_action(sid: str, action: str, item: str):
        session = get_session(sid)
        with session.lock:
            before = session.state
            if action == "select":
                after = choose(session.model, before, item)
            else:
                after = exclude(session.model, before, item)
            if after.is_conflicted:
                # reject atomically; the stored state never moves
                return _conflict_response(session, after)
            session.state = after
            session.history.append((action, item))
            session.updated_at = state.clock.now()
            state.snapshot.append(
                {
                    "op": action,
                    "session": sid,
                    "item": item,
                    "ts": session.updated_at,
                }
            )
            return _delta_view(session, action, item, before, after)

    @app.post(API_PREFIX + "/sessions/{sid}/select")
    def select_item(sid: str, body: ItemBody):
        return apply_action(sid, "select", body.item)

    @app.post(API_PREFIX + "/sessions/{sid}/exclude")
    def exclude_item(sid: str, body: ItemBody):
        return apply_action(sid, "exclude", body.item)

    @app.post(API_PREFIX + "/sessions/{sid}/undo")
    def undo(sid: str):
        session = get_session(sid)
        with session.lock:
            before = session.state
            _replay_undo(session)
            session.updated_at = state.clock.now()
            state.snapshot.append(
                {"op": "undo", "session": sid, "ts": session.updated_at}
            )
            return _delta_view(session, "undo", None, before, session.state)

    @app.post(API_PREFIX + "/sessions/{sid}/complete")
    def complete(sid: str):
        session = get_session(sid)
        with session.lock:
            report = validate_complete(session.model, session.state)
            return {"session": session.id, **report.as_dict()}

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    else:

        @app.get("/")
        def root():
            return {
                "service": "pathweaver",
                "api": API_PREFIX,
                "models": sorted(state.catalog),
            }

    return app
