"""Record the canonical figure2 session walkthrough as JSON fixtures.

Run from the repository root:

    python3 scripts/record_session_fixture.py

Writes fixtures/session/models.json, initial_state.json and
figure2_walkthrough.json.  The
walkthrough drives one session to a finished pathway, through a rejected
conflicting action and an undo, and stores every request with the exact
response the service gave.  Both test suites replay it: the Python side
re-runs the requests and compares bytes, the web UI renders the stored
responses and snapshots the result.
"""

import json
import os
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
CLOCK = "2024-01-01T00:00:00Z"

os.environ["PATHWEAVER_TEST_CLOCK"] = CLOCK
for var in ("PATHWEAVER_SNAPSHOT", "PATHWEAVER_MODELS", "PATHWEAVER_STATIC"):
    os.environ.pop(var, None)

sys.path.insert(0, str(ROOT / "src"))

from fastapi.testclient import TestClient  # noqa: E402

from pathweaver.service import create_app  # noqa: E402

ACTIONS = [
    ("select", "structured methodology", 200),
    ("select", "2d graphics", 200),
    ("select", "c++", 200),
    ("select", "3d graphics", 409),
    ("exclude", "3d graphics", 200),
    ("select", "advance discrete mathematics", 200),
    ("undo", None, 200),
    ("select", "advance discrete mathematics", 200),
    ("select", "artificial intelligence", 200),
    ("select", "image processing", 200),
    ("select", "linear algebra", 200),
    ("select", "probability and statistics", 200),
]


def record() -> None:
    client = TestClient(create_app())
    out_dir = ROOT / "fixtures" / "session"
    out_dir.mkdir(parents=True, exist_ok=True)

    r = client.get("/api/v1/models")
    assert r.status_code == 200
    (out_dir / "models.json").write_text(
        json.dumps(r.json(), indent=2) + "\n", encoding="utf-8"
    )

    steps = []

    def step(method, path, body, response):
        steps.append(
            {
                "method": method,
                "path": path,
                "body": body,
                "status": response.status_code,
                "response": response.json(),
            }
        )
        return response

    r = step(
        "POST",
        "/api/v1/sessions",
        {"model": "figure2"},
        client.post("/api/v1/sessions", json={"model": "figure2"}),
    )
    assert r.status_code == 201
    sid = r.json()["session"]

    # The web UI fetches the full state once after creating a session and
    # builds every later tree from deltas.  Record that first GET separately
    # so the UI tests start from real server output; it is not a step in the
    # walkthrough (reads change nothing, the action replay stays identical).
    r = client.get(f"/api/v1/sessions/{sid}")
    assert r.status_code == 200
    (out_dir / "initial_state.json").write_text(
        json.dumps(r.json(), indent=2) + "\n", encoding="utf-8"
    )

    for op, item, expected in ACTIONS:
        path = f"/api/v1/sessions/{sid}/{op}"
        body = None if item is None else {"item": item}
        if op == "undo":
            r = step("POST", path, None, client.post(path))
        else:
            r = step("POST", path, body, client.post(path, json=body))
        assert r.status_code == expected, (op, item, r.status_code, r.text)

    r = step(
        "GET",
        f"/api/v1/sessions/{sid}",
        None,
        client.get(f"/api/v1/sessions/{sid}"),
    )
    assert r.json()["undecided"] == 0

    r = step(
        "POST",
        f"/api/v1/sessions/{sid}/complete",
        None,
        client.post(f"/api/v1/sessions/{sid}/complete"),
    )
    assert r.json()["ok"] is True

    payload = {"clock": CLOCK, "model": "figure2", "session": sid, "steps": steps}
    (out_dir / "figure2_walkthrough.json").write_text(
        json.dumps(payload, indent=2) + "\n", encoding="utf-8"
    )
    print(f"recorded {len(steps)} steps to {out_dir}")

    # A completion check on a session nobody touched, for the report
    # rendering: minimum counts unmet and everything still open.
    r = client.post("/api/v1/sessions", json={"model": "figure2"})
    assert r.status_code == 201
    r = client.post(f"/api/v1/sessions/{r.json()['session']}/complete")
    assert r.status_code == 200 and r.json()["ok"] is False
    (out_dir / "incomplete_report.json").write_text(
        json.dumps(r.json(), indent=2) + "\n", encoding="utf-8"
    )
    print("recorded incomplete_report.json")


# The figure2 walkthrough never triggers some deductions (it has no
# option-to-field requirement, and its only common option is settled
# before the first action).  This little study area is shaped so that the
# leftover ones fire within two clicks; the UI snapshots draw their tag
# chips from real responses instead of hand-written payloads.
ELECTIVES = """\
% sandbox area: every deduction reachable in two clicks
type(tiny electives, studyarea).

type(skills, field).
min(skills, 2).
choiceof(skills, seminar).
choiceof(skills, modelling).
choiceof(skills, proofs).
common(seminar, yes).

type(lab, field).
choiceof(lab, python).
choiceof(lab, stats).

requires_option_option(modelling, python).
excludes_option_option(python, stats).
requires_option_field(proofs, lab).
"""


def record_rule_tour(out_dir: Path) -> None:
    with tempfile.TemporaryDirectory() as tmp:
        (Path(tmp) / "electives.lpm").write_text(ELECTIVES, encoding="utf-8")
        client = TestClient(create_app(models_dir=tmp))

        def play(actions, finish=False):
            r = client.post("/api/v1/sessions", json={"model": "electives"})
            assert r.status_code == 201
            sid = r.json()["session"]
            initial = client.get(f"/api/v1/sessions/{sid}")
            assert initial.status_code == 200
            steps = []
            for op, item in actions:
                path = f"/api/v1/sessions/{sid}/{op}"
                r = client.post(path, json={"item": item})
                assert r.status_code == 200, (op, item, r.text)
                steps.append(
                    {
                        "method": "POST",
                        "path": path,
                        "body": {"item": item},
                        "status": 200,
                        "response": r.json(),
                    }
                )
            if finish:
                path = f"/api/v1/sessions/{sid}/complete"
                r = client.post(path)
                assert r.status_code == 200
                steps.append(
                    {
                        "method": "POST",
                        "path": path,
                        "body": None,
                        "status": 200,
                        "response": r.json(),
                    }
                )
            return {"session": sid, "initial": initial.json(), "steps": steps}

        payload = {
            "clock": CLOCK,
            "model": "electives",
            "model_source": ELECTIVES,
            "sessions": [
                # one picked option where skills wants two: the completion
                # check at the end reports the shortfall
                play(
                    [
                        ("select", "skills"),
                        ("select", "modelling"),
                        ("exclude", "proofs"),
                    ],
                    finish=True,
                ),
                play([("select", "proofs")]),
            ],
        }
        (out_dir / "rule_tour.json").write_text(
            json.dumps(payload, indent=2) + "\n", encoding="utf-8"
        )
        rules = sorted(
            {
                c["rule"]
                for s in payload["sessions"]
                for step in s["steps"]
                for c in step["response"].get("changed", [])
                if c["rule"]
            }
        )
        print(f"recorded rule_tour.json, delta rules: {rules}")


if __name__ == "__main__":
    record()
    record_rule_tour(ROOT / "fixtures" / "session")
