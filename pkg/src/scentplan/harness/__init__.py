from .service import ADMIN_TOKEN_ENV, assert_blinded, create_app, load_plan_texts
from .study import (
    DEFAULT_LIKERT_ITEMS,
    CompletedSessionError,
    HarnessError,
    LikertItem,
    ResponseRecord,
    Session,
    StudyConfig,
    StudyStore,
    UnknownQuestionError,
    UnknownSessionError,
    config_from_dict,
    default_study1,
    default_study2,
    load_study_config,
    presentation_order,
    question_id_for,
)

__all__ = [
    "ADMIN_TOKEN_ENV",
    "DEFAULT_LIKERT_ITEMS",
    "CompletedSessionError",
    "HarnessError",
    "LikertItem",
    "ResponseRecord",
    "Session",
    "StudyConfig",
    "StudyStore",
    "UnknownQuestionError",
    "UnknownSessionError",
    "assert_blinded",
    "config_from_dict",
    "create_app",
    "default_study1",
    "default_study2",
    "load_plan_texts",
    "load_study_config",
    "presentation_order",
    "question_id_for",
]
