"""Record real practice-service responses as dashboard test fixtures.

Drives the FastAPI app through a small scripted scenario and dumps each
response verbatim into frontend/fixtures/. The dashboard contract tests
assert that every number they render equals a field in these payloads.
"""

import json
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from melo.service import create_app

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "frontend" / "fixtures"


def dump(name: str, payload) -> None:
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    path = FIXTURE_DIR / f"{name}.json"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {path}")


def main() -> int:
    with tempfile.TemporaryDirectory() as td:
        client = TestClient(create_app(Path(td)))
        course = client.post("/courses", json={
            "id": "demo",
            "concepts": ["algebra", "geometry", "fractions"],
            "config": {"variant": "melo", "gamma": 1.8, "beta": 0.05},
        })
        dump("course", course.json())
        client.post("/courses/demo/students", json={"id": "alice"})
        client.post("/courses/demo/students", json={"id": "bob"})
        client.post("/courses/demo/items", json={"id": "q1", "tags": ["algebra"],
                                                 "options": 4, "answer_key": "b"})
        client.post("/courses/demo/items", json={
            "id": "q2", "tags": ["algebra", "geometry"]})
        client.post("/courses/demo/items", json={"id": "q3", "tags": ["fractions"]})
        client.post("/courses/demo/items", json={"id": "q4", "tags": ["geometry"]})

        dump("model_fresh", client.get("/courses/demo/students/alice/model").json())

        answer_single = client.post("/courses/demo/answers", json={
            "student": "alice", "item": "q1", "correct": True,
            "idempotency_key": "fixture-1",
        }).json()
        dump("answer_single", answer_single)

        answer_multi = client.post("/courses/demo/answers", json={
            "student": "alice", "item": "q2", "correct": True,
            "idempotency_key": "fixture-2",
        }).json()
        dump("answer_multi", answer_multi)

        answer_incorrect = client.post("/courses/demo/answers", json={
            "student": "bob", "item": "q1", "correct": False,
            "idempotency_key": "fixture-3",
        }).json()
        dump("answer_incorrect", answer_incorrect)

        dump("model_after", client.get("/courses/demo/students/alice/model").json())
        dump("recommendations", client.get(
            "/courses/demo/students/alice/recommendations", params={"k": 3}
        ).json())
        dump("overview", client.get("/courses/demo/overview").json())
        dump("item_stats", client.get("/courses/demo/items/q1/stats").json())
        dump("problem_not_found",
             client.get("/courses/demo/students/ghost/model").json())
    return 0


if __name__ == "__main__":
    sys.exit(main())
