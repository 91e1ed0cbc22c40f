"""HTTP surface for running studies against a prepared workspace.

The app serves blinded tasks to participants and a token-gated export to the
analyst.  Stimulus text is read once from the workspace's plan files at app
construction, so a running service never touches the planners.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, JSONResponse

from ..ingest import ClipManifest
from ..plan import load_plan
from ..workspace import Workspace
from .study import (
    CompletedSessionError,
    HarnessError,
    StudyConfig,
    StudyStore,
    UnknownQuestionError,
    UnknownSessionError,
)

ADMIN_TOKEN_ENV = "SCENTPLAN_ADMIN_TOKEN"
FORBIDDEN_STIMULUS_TOKENS = ("system", "over", "naive", "baseline")


def load_plan_texts(workspace: Workspace) -> dict[tuple[str, str], str]:
    """Rendered stimulus text for every plan file in the workspace."""
    texts: dict[tuple[str, str], str] = {}
    for path in sorted(workspace.plans_dir.glob("*.plan.json")):
        plan = load_plan(path)
        if not plan.rendered_text:
            raise HarnessError(f"plan file {path.name} has no rendered text")
        texts[(plan.clip_id, plan.strategy)] = plan.rendered_text
    return texts


def load_clip_paths(workspace: Workspace) -> dict[str, Path]:
    if not workspace.clip_manifest_path.exists():
        return {}
    manifest = ClipManifest.load(workspace.clip_manifest_path)
    return {clip_id: Path(clip.path) for clip_id, clip in manifest.clips.items()}


def assert_blinded(payload: dict) -> None:
    """Refuse to serve any participant payload that leaks a condition name."""
    blob = json.dumps(payload).lower()
    for token in FORBIDDEN_STIMULUS_TOKENS:
        if token in blob:
            raise HarnessError(f"participant payload leaks condition token '{token}'")


def create_app(
    workspace: Workspace,
    configs: dict[str, StudyConfig],
    admin_token_env: str = ADMIN_TOKEN_ENV,
) -> FastAPI:
    plan_texts = load_plan_texts(workspace)
    clip_paths = load_clip_paths(workspace)
    # fail at startup, not mid-study, when a configured stimulus is missing
    for config in configs.values():
        for clip_id in config.clip_ids:
            for condition in config.conditions:
                if (clip_id, condition) not in plan_texts:
                    raise HarnessError(
                        f"{config.study_id} needs a plan for clip '{clip_id}' in "
                        f"every condition, but one is missing from the workspace"
                    )
    stores = {
        study_id: StudyStore(config, workspace.study_dir(study_id))
        for study_id, config in configs.items()
    }

    app = FastAPI(title="scentplan harness", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.stores = stores

    def error(status: int, message: str) -> JSONResponse:
        return JSONResponse({"detail": message}, status_code=status)

    def store_for(study_id: str) -> StudyStore:
        try:
            return stores[study_id]
        except KeyError:
            raise UnknownSessionError(f"unknown study '{study_id}'") from None

    def find_session_store(session_id: str) -> StudyStore:
        for store in stores.values():
            if session_id in store.sessions:
                return store
        raise UnknownSessionError(f"unknown session '{session_id}'")

    @app.exception_handler(HarnessError)
    async def harness_error(_request: Request, exc: HarnessError):
        if isinstance(exc, (UnknownSessionError, UnknownQuestionError)):
            return error(404, str(exc))
        if isinstance(exc, CompletedSessionError):
            return error(409, str(exc))
        return error(400, str(exc))

    @app.post("/api/session")
    async def create_session(request: Request):
        body = await request.json()
        if not isinstance(body, dict):
            raise HarnessError("request body must be a JSON object")
        study_id = body.get("study_id")
        participant_id = body.get("participant_id")
        if not isinstance(study_id, str) or not isinstance(participant_id, str):
            raise HarnessError("request needs string study_id and participant_id")
        store = store_for(study_id)
        session = store.create_session(participant_id)
        return session.public_view()

    @app.get("/api/session/{session_id}/task/{n}")
    async def get_task(session_id: str, n: int):
        store = find_session_store(session_id)
        view = store.task_view(session_id, n, plan_texts)
        assert_blinded(view)
        return view

    @app.post("/api/session/{session_id}/response")
    async def post_response(session_id: str, request: Request):
        body = await request.json()
        if not isinstance(body, dict):
            raise HarnessError("request body must be a JSON object")
        store = find_session_store(session_id)
        store.submit_response(session_id, body)
        session = store.get_session(session_id)
        return {"ok": True, "completed": session.completed}

    @app.get("/api/export/{study_id}")
    async def export_study(study_id: str, request: Request):
        expected = os.environ.get(admin_token_env)
        if not expected:
            return error(503, f"export disabled: {admin_token_env} is not set")
        header = request.headers.get("authorization", "")
        if header != f"Bearer {expected}":
            return error(401, "invalid export token")
        store = store_for(study_id)
        dataset, sidecar = store.export()
        return {"dataset": dataset, "exclusions": sidecar}

    @app.get("/clips/{clip_id}")
    async def get_clip(clip_id: str):
        path = clip_paths.get(clip_id)
        if path is None or not path.exists():
            return error(404, f"unknown clip '{clip_id}'")
        return FileResponse(path)

    @app.get("/healthz")
    async def health():
        return {"ok": True, "studies": sorted(stores)}

    return app
