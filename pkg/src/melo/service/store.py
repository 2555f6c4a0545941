"""Event-sourced per-course state for the practice service.

The append-only JSONL event log is the single source of truth; the
materialized learner/item tables always equal a core-model replay of that
log from scratch. All mutations serialize through one lock because the
rating updates are order-sensitive; reads return snapshots stamped with the
answer-seq watermark they reflect.

Live submits and boot-time replay share one apply path, so a restart (from
the last state snapshot plus the event tail, or from an empty state) always
reproduces bit-identical ratings.
"""

from __future__ import annotations

import json
import os
import threading
from collections import deque
from pathlib import Path
from typing import Iterable

from ..model import (
    ConceptId,
    DomainModel,
    EngineConfig,
    Interaction,
    ItemId,
    ItemState,
    LearnerState,
    MeloError,
    ModelState,
    StudentId,
    Variant,
    update,
)
from ..recommend import RecommendationRequest, recommend

EVENTS_FILE = "events.jsonl"
SNAPSHOT_FILE = "snapshot.json"
HISTORY_LIMIT = 256


class ServiceError(MeloError):
    """Service-level failure with a stable machine-readable code."""

    status = 400
    code = "bad_request"

    def __init__(self, message: str, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code


class NotFoundError(ServiceError):
    status = 404
    code = "not_found"


class ConflictError(ServiceError):
    status = 409
    code = "conflict"


class ValidationError(ServiceError):
    status = 422
    code = "invalid_request"


class CourseStore:
    """One course: domain, config, event log and materialized state."""

    def __init__(self, course_id: str, course_dir: Path,
                 domain: DomainModel, cfg: EngineConfig,
                 snapshot_every: int = 500):
        self.course_id = course_id
        self.course_dir = Path(course_dir)
        self.domain = domain
        self.cfg = cfg
        self.snapshot_every = snapshot_every
        self.state = ModelState()
        self.answer_keys: dict[ItemId, str | None] = {}
        self.attempted: dict[StudentId, set[ItemId]] = {}
        self.histories: dict[StudentId, deque] = {}
        self.idempotency: dict[str, dict] = {}
        self.answer_seq = 0
        self.events_applied = 0
        self._lock = threading.RLock()

    # -- lifecycle -----------------------------------------------------

    @classmethod
    def create(cls, course_id: str, data_dir: Path, concepts: Iterable[ConceptId],
               cfg: EngineConfig, snapshot_every: int = 500) -> "CourseStore":
        course_dir = Path(data_dir) / course_id
        if course_dir.exists():
            raise ConflictError(f"course {course_id!r} already exists", "course_exists")
        try:
            domain = DomainModel(tuple(concepts))
        except MeloError as exc:
            raise ValidationError(str(exc), "invalid_domain") from exc
        course_dir.mkdir(parents=True)
        store = cls(course_id, course_dir, domain, cfg, snapshot_every)
        event = {
            "type": "create",
            "course": course_id,
            "concepts": list(domain.concepts),
            "config": cfg.to_dict(),
        }
        store._append(event)
        store._apply(event)
        return store

    @classmethod
    def open(cls, course_id: str, data_dir: Path,
             snapshot_every: int = 500) -> "CourseStore":
        """Rebuild materialized state from snapshot plus event tail."""
        course_dir = Path(data_dir) / course_id
        events_path = course_dir / EVENTS_FILE
        if not events_path.exists():
            raise NotFoundError(f"course {course_id!r} not found", "course_not_found")
        store: CourseStore | None = None
        skip = 0
        snapshot_path = course_dir / SNAPSHOT_FILE
        if snapshot_path.exists():
            with open(snapshot_path, "r", encoding="utf-8") as fh:
                snap = json.load(fh)
            store = cls._from_snapshot(course_id, course_dir, snap, snapshot_every)
            skip = store.events_applied
        with open(events_path, "r", encoding="utf-8") as fh:
            for index, line in enumerate(fh):
                line = line.strip()
                if not line:
                    continue
                if index < skip:
                    continue
                event = json.loads(line)
                if store is None:
                    if event["type"] != "create":
                        raise ServiceError(
                            f"corrupt event log for {course_id!r}: no create event",
                            "corrupt_log",
                        )
                    store = cls(
                        course_id, course_dir,
                        DomainModel(tuple(event["concepts"])),
                        EngineConfig.from_dict(event["config"]),
                        snapshot_every,
                    )
                store._apply(event)
        if store is None:
            raise ServiceError(f"empty event log for {course_id!r}", "corrupt_log")
        return store

    @staticmethod
    def list_courses(data_dir: Path) -> list[str]:
        data_dir = Path(data_dir)
        if not data_dir.exists():
            return []
        return sorted(
            p.name for p in data_dir.iterdir()
            if p.is_dir() and (p / EVENTS_FILE).exists()
        )

    # -- event plumbing -------------------------------------------------

    def _append(self, event: dict) -> None:
        # flushed to the OS before the in-memory apply, so a process crash
        # never loses an applied event (power-loss durability would need
        # fsync here; not a contract of this service)
        with open(self.course_dir / EVENTS_FILE, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")
            fh.flush()

    def _apply(self, event: dict) -> dict | None:
        """Apply one event to materialized state; shared by live and replay."""
        kind = event["type"]
        response = None
        if kind == "create":
            pass
        elif kind == "student":
            self.state.learners[event["id"]] = LearnerState(theta=self.cfg.init_rating)
            self.attempted[event["id"]] = set()
            self.histories[event["id"]] = deque(maxlen=HISTORY_LIMIT)
        elif kind == "item":
            self.state.items[event["id"]] = ItemState(
                difficulty=self.cfg.init_rating,
                tags=tuple(event["tags"]),
                options=event.get("options"),
            )
            self.answer_keys[event["id"]] = event.get("answer_key")
        elif kind == "answer":
            response = self._apply_answer(event)
            if event.get("key") is not None:
                self.idempotency[event["key"]] = response
        else:
            raise ServiceError(f"unknown event type {kind!r}", "corrupt_log")
        self.events_applied += 1
        return response

    def _apply_answer(self, event: dict) -> dict:
        student, item_id = event["student"], event["item"]
        learner = self.state.learners[student]
        item = self.state.items[item_id]
        delta = update(learner, item, event["correct"], self.cfg)
        seq = event["seq"]
        self.answer_seq = seq
        self.attempted[student].add(item_id)

        concepts_after = {
            c: {"rating": learner.concepts[c].rating,
                "attempts": learner.concepts[c].attempts}
            for c in delta.concept_deltas
        }
        theta_after = None
        if delta.theta_delta is not None:
            theta_after = {"rating": learner.theta, "attempts": learner.theta_attempts}
        self.histories[student].append({
            "seq": seq,
            "item": item_id,
            "correct": event["correct"],
            "concepts": {c: v["rating"] for c, v in concepts_after.items()},
            "theta": learner.theta if delta.theta_delta is not None else None,
        })
        return {
            "seq": seq,
            "student": student,
            "item": item_id,
            "correct": event["correct"],
            "prediction": delta.probability_used,
            "item_delta": delta.item_delta,
            "theta_delta": delta.theta_delta,
            "concept_deltas": dict(delta.concept_deltas),
            "theta": theta_after,
            "concepts": concepts_after,
            "watermark": seq,
        }

    # -- mutations -------------------------------------------------------

    def register_student(self, student: StudentId) -> dict:
        with self._lock:
            if student in self.state.learners:
                raise ConflictError(f"student {student!r} already registered",
                                    "student_exists")
            event = {"type": "student", "id": student}
            self._append(event)
            self._apply(event)
            return {"id": student, "watermark": self.answer_seq}

    def register_item(self, item: ItemId, tags: Iterable[ConceptId],
                      options: int | None = None,
                      answer_key: str | None = None) -> dict:
        with self._lock:
            if item in self.state.items:
                raise ConflictError(f"item {item!r} already registered", "item_exists")
            tags = tuple(tags)
            unknown = [c for c in tags if c not in self.domain]
            if unknown:
                raise ValidationError(
                    f"tags not in course domain: {unknown}", "unknown_concept"
                )
            if not tags:
                raise ValidationError("item needs at least one concept tag",
                                      "untagged_item")
            if len(set(tags)) != len(tags):
                raise ValidationError("duplicate tags", "duplicate_tags")
            if options is not None and options < 2:
                raise ValidationError("options must be >= 2", "invalid_options")
            event = {"type": "item", "id": item, "tags": list(tags),
                     "options": options, "answer_key": answer_key}
            self._append(event)
            self._apply(event)
            return {"id": item, "watermark": self.answer_seq}

    def submit_answer(self, student: StudentId, item: ItemId, correct: int,
                      idempotency_key: str | None = None) -> dict:
        with self._lock:
            if idempotency_key is not None and idempotency_key in self.idempotency:
                return dict(self.idempotency[idempotency_key])
            if student not in self.state.learners:
                raise NotFoundError(f"student {student!r} not registered",
                                    "student_not_found")
            if item not in self.state.items:
                raise NotFoundError(f"item {item!r} not registered", "item_not_found")
            event = {
                "type": "answer",
                "seq": self.answer_seq + 1,
                "student": student,
                "item": item,
                "correct": int(correct),
                "key": idempotency_key,
            }
            self._append(event)
            response = self._apply(event)
            if self.answer_seq % self.snapshot_every == 0:
                self.write_snapshot()
            return dict(response)

    # -- reads -----------------------------------------------------------

    def learner_model(self, student: StudentId) -> dict:
        with self._lock:
            learner = self.state.learners.get(student)
            if learner is None:
                raise NotFoundError(f"student {student!r} not registered",
                                    "student_not_found")
            concepts = {
                c: {
                    "rating": learner.concept_rating(c, self.cfg.init_rating),
                    "attempts": learner.concept_attempts(c),
                }
                for c in self.domain.concepts
            }
            return {
                "student": student,
                "watermark": self.answer_seq,
                "theta": {"rating": learner.theta, "attempts": learner.theta_attempts},
                "concepts": concepts,
                "history": list(self.histories.get(student, ())),
            }

    def class_overview(self) -> dict:
        import numpy as np

        with self._lock:
            students = list(self.state.learners)
            if not students:
                return {
                    "status": "empty",
                    "students": 0,
                    "watermark": self.answer_seq,
                    "concepts": {},
                    "difficulty": None,
                }
            concepts = {}
            for c in self.domain.concepts:
                values = np.array([
                    self.state.learners[s].concept_rating(c, self.cfg.init_rating)
                    for s in students
                ])
                concepts[c] = {
                    "mean": float(values.mean()),
                    "p25": float(np.percentile(values, 25)),
                    "p50": float(np.percentile(values, 50)),
                    "p75": float(np.percentile(values, 75)),
                }
            difficulty = None
            if self.state.items:
                d = np.array([it.difficulty for it in self.state.items.values()])
                difficulty = {
                    "count": int(d.size),
                    "mean": float(d.mean()),
                    "min": float(d.min()),
                    "max": float(d.max()),
                    "p25": float(np.percentile(d, 25)),
                    "p50": float(np.percentile(d, 50)),
                    "p75": float(np.percentile(d, 75)),
                }
            return {
                "status": "ok",
                "students": len(students),
                "watermark": self.answer_seq,
                "concepts": concepts,
                "difficulty": difficulty,
            }

    def item_stats(self, item: ItemId) -> dict:
        with self._lock:
            state = self.state.items.get(item)
            if state is None:
                raise NotFoundError(f"item {item!r} not registered", "item_not_found")
            return {
                "item": item,
                "watermark": self.answer_seq,
                "difficulty": state.difficulty,
                "attempts": state.attempts,
                "tags": list(state.tags),
                "options": state.options,
                "answer_key": self.answer_keys.get(item),
            }

    def recommendations(self, student: StudentId, k: int = 5,
                        target_success: float = 0.65,
                        exclude_attempted: bool = True) -> dict:
        with self._lock:
            learner = self.state.learners.get(student)
            if learner is None:
                raise NotFoundError(f"student {student!r} not registered",
                                    "student_not_found")
            if self.cfg.variant is not Variant.M_ELO:
                raise ValidationError(
                    "recommendations need a melo-variant course", "wrong_variant"
                )
            req = RecommendationRequest(
                student, k=k, target_success=target_success,
                exclude_attempted=exclude_attempted,
            )
            result = recommend(
                req, learner, self.state.items, self.domain, self.cfg,
                attempted=self.attempted.get(student, set()),
            )
            return {
                "student": student,
                "watermark": self.answer_seq,
                "status": result.status,
                "items": [
                    {
                        "item": s.item,
                        "gap_score": s.gap_score,
                        "difficulty_match": s.difficulty_match,
                        "combined": s.combined,
                        "predicted_success": s.predicted_success,
                    }
                    for s in result.items
                ],
            }

    # -- snapshots ---------------------------------------------------------

    def write_snapshot(self) -> None:
        with self._lock:
            snap = {
                "events_applied": self.events_applied,
                "answer_seq": self.answer_seq,
                "concepts": list(self.domain.concepts),
                "config": self.cfg.to_dict(),
                "learners": {
                    s: {
                        "theta": st.theta,
                        "theta_attempts": st.theta_attempts,
                        "concepts": {
                            c: [e.rating, e.attempts] for c, e in st.concepts.items()
                        },
                    }
                    for s, st in self.state.learners.items()
                },
                "items": {
                    i: {
                        "difficulty": st.difficulty,
                        "attempts": st.attempts,
                        "tags": list(st.tags),
                        "options": st.options,
                    }
                    for i, st in self.state.items.items()
                },
                "answer_keys": self.answer_keys,
                "attempted": {s: sorted(v) for s, v in self.attempted.items()},
                "histories": {s: list(h) for s, h in self.histories.items()},
                "idempotency": self.idempotency,
            }
            tmp = self.course_dir / (SNAPSHOT_FILE + ".tmp")
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(snap, fh, sort_keys=True)
            os.replace(tmp, self.course_dir / SNAPSHOT_FILE)

    @classmethod
    def _from_snapshot(cls, course_id: str, course_dir: Path, snap: dict,
                       snapshot_every: int) -> "CourseStore":
        from ..model import ConceptRating

        store = cls(
            course_id, course_dir,
            DomainModel(tuple(snap["concepts"])),
            EngineConfig.from_dict(snap["config"]),
            snapshot_every,
        )
        for s, data in snap["learners"].items():
            store.state.learners[s] = LearnerState(
                theta=data["theta"],
                theta_attempts=data["theta_attempts"],
                concepts={
                    c: ConceptRating(r, n) for c, (r, n) in data["concepts"].items()
                },
            )
        for i, data in snap["items"].items():
            store.state.items[i] = ItemState(
                difficulty=data["difficulty"],
                attempts=data["attempts"],
                tags=tuple(data["tags"]),
                options=data["options"],
            )
        store.answer_keys = dict(snap["answer_keys"])
        store.attempted = {s: set(v) for s, v in snap["attempted"].items()}
        store.histories = {
            s: deque(h, maxlen=HISTORY_LIMIT) for s, h in snap["histories"].items()
        }
        store.idempotency = dict(snap["idempotency"])
        store.answer_seq = snap["answer_seq"]
        store.events_applied = snap["events_applied"]
        return store

    # -- audit --------------------------------------------------------------

    def read_events(self) -> list[dict]:
        events = []
        with open(self.course_dir / EVENTS_FILE, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    events.append(json.loads(line))
        return events

    def answer_stream(self) -> list[Interaction]:
        """The persisted answers as a core-model interaction stream."""
        return [
            Interaction(e["student"], e["item"], e["correct"], e["seq"])
            for e in self.read_events()
            if e["type"] == "answer"
        ]
