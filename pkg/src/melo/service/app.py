"""HTTP surface of the practice service.

Thin FastAPI layer over CourseStore: routing, request validation via the
pydantic schemas, problem-document error mapping and optional static-token
auth. No model math happens here.
"""

from __future__ import annotations

import secrets
import threading
from pathlib import Path

from fastapi import Depends, FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse

from ..model import ConfigError, EngineConfig, MeloError
from . import schemas
from .store import CourseStore, ServiceError, ValidationError


class CourseManager:
    """Open course stores on demand and keep them cached per process."""

    def __init__(self, data_dir: Path, snapshot_every: int = 500):
        self.data_dir = Path(data_dir)
        self.snapshot_every = snapshot_every
        self._stores: dict[str, CourseStore] = {}
        self._lock = threading.Lock()

    def create(self, course_id: str | None, concepts, cfg: EngineConfig) -> CourseStore:
        course_id = course_id or f"course-{secrets.token_hex(4)}"
        with self._lock:
            store = CourseStore.create(
                course_id, self.data_dir, concepts, cfg, self.snapshot_every
            )
            self._stores[course_id] = store
            return store

    def get(self, course_id: str) -> CourseStore:
        with self._lock:
            store = self._stores.get(course_id)
            if store is None:
                store = CourseStore.open(course_id, self.data_dir, self.snapshot_every)
                self._stores[course_id] = store
            return store

    def close_all(self) -> None:
        with self._lock:
            for store in self._stores.values():
                store.write_snapshot()
            self._stores.clear()


def create_app(
    data_dir: Path | str,
    api_token: str | None = None,
    snapshot_every: int = 500,
    dashboard_dir: Path | str | None = None,
    default_config: EngineConfig | None = None,
) -> FastAPI:
    app = FastAPI(title="melo practice service", version="0.1.0")
    manager = CourseManager(Path(data_dir), snapshot_every)
    app.state.manager = manager
    default_cfg = default_config if default_config is not None else EngineConfig()

    def require_token(authorization: str | None = Header(default=None)) -> None:
        if api_token is None:
            return
        if authorization != f"Bearer {api_token}":
            raise ServiceError("missing or invalid API token", "unauthorized")

    auth = Depends(require_token)

    @app.exception_handler(ServiceError)
    async def service_error_handler(request: Request, exc: ServiceError):
        status = 401 if exc.code == "unauthorized" else exc.status
        return JSONResponse(
            status_code=status,
            content=schemas.Problem(code=exc.code, message=str(exc)).model_dump(),
        )

    @app.exception_handler(MeloError)
    async def model_error_handler(request: Request, exc: MeloError):
        code = "invalid_config" if isinstance(exc, ConfigError) else "model_error"
        return JSONResponse(
            status_code=422,
            content=schemas.Problem(code=code, message=str(exc)).model_dump(),
        )

    def course_info(store: CourseStore) -> schemas.CourseInfo:
        return schemas.CourseInfo(
            id=store.course_id,
            concepts=list(store.domain.concepts),
            config=schemas.EngineConfigModel(**store.cfg.to_dict()),
            watermark=store.answer_seq,
        )

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/courses", dependencies=[auth])
    def list_courses() -> list[str]:
        return CourseStore.list_courses(manager.data_dir)

    @app.post("/courses", status_code=201, dependencies=[auth])
    def create_course(body: schemas.CourseCreate) -> schemas.CourseInfo:
        if body.config is None:
            cfg = default_cfg
        else:
            try:
                cfg = EngineConfig.from_dict(body.config.model_dump())
            except ConfigError as exc:
                raise ValidationError(str(exc), "invalid_config") from exc
        store = manager.create(body.id, body.concepts, cfg)
        return course_info(store)

    @app.get("/courses/{course_id}", dependencies=[auth])
    def get_course(course_id: str) -> schemas.CourseInfo:
        return course_info(manager.get(course_id))

    @app.post("/courses/{course_id}/students", status_code=201, dependencies=[auth])
    def register_student(course_id: str, body: schemas.StudentCreate) -> schemas.RegisteredResponse:
        return schemas.RegisteredResponse(**manager.get(course_id).register_student(body.id))

    @app.post("/courses/{course_id}/items", status_code=201, dependencies=[auth])
    def register_item(course_id: str, body: schemas.ItemCreate) -> schemas.RegisteredResponse:
        store = manager.get(course_id)
        item_id = body.id or f"item-{len(store.state.items) + 1}"
        return schemas.RegisteredResponse(
            **store.register_item(item_id, body.tags, body.options, body.answer_key)
        )

    @app.post("/courses/{course_id}/answers", dependencies=[auth])
    def submit_answer(course_id: str, body: schemas.AnswerSubmit) -> schemas.AnswerResponse:
        store = manager.get(course_id)
        response = store.submit_answer(
            body.student, body.item, int(body.correct), body.idempotency_key
        )
        return schemas.AnswerResponse(**response)

    @app.get("/courses/{course_id}/students/{student_id}/model", dependencies=[auth])
    def learner_model(course_id: str, student_id: str) -> schemas.LearnerModelResponse:
        return schemas.LearnerModelResponse(**manager.get(course_id).learner_model(student_id))

    @app.get(
        "/courses/{course_id}/students/{student_id}/recommendations",
        dependencies=[auth],
    )
    def recommendations(
        course_id: str,
        student_id: str,
        k: int = Query(default=5, ge=1, le=100),
        target_success: float = Query(default=0.65, gt=0.0, lt=1.0),
        exclude_attempted: bool = Query(default=True),
    ) -> schemas.RecommendationsResponse:
        return schemas.RecommendationsResponse(
            **manager.get(course_id).recommendations(
                student_id, k, target_success, exclude_attempted
            )
        )

    @app.get("/courses/{course_id}/overview", dependencies=[auth])
    def overview(course_id: str) -> schemas.OverviewResponse:
        return schemas.OverviewResponse(**manager.get(course_id).class_overview())

    @app.get("/courses/{course_id}/items/{item_id}/stats", dependencies=[auth])
    def item_stats(course_id: str, item_id: str) -> schemas.ItemStatsResponse:
        return schemas.ItemStatsResponse(**manager.get(course_id).item_stats(item_id))

    if dashboard_dir is not None and Path(dashboard_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/app", StaticFiles(directory=str(dashboard_dir), html=True),
                  name="dashboard")

    return app
