from .app import CourseManager, create_app
from .store import (
    ConflictError,
    CourseStore,
    NotFoundError,
    ServiceError,
    ValidationError,
)

__all__ = [
    "ConflictError",
    "CourseManager",
    "CourseStore",
    "NotFoundError",
    "ServiceError",
    "ValidationError",
    "create_app",
]
