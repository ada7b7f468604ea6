"""HTTP gateway: the JSON API consumed by the console and other clients.

Every response body carries schema_version; error bodies are
{"code", "message", "schema_version"}. Search and session endpoints never
mutate the indexes; ingestion happens only through POST /v1/index (or the
CLI) and is idempotent by video id.
"""

from __future__ import annotations

import os
from typing import Callable

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .agents import AgentRuntime, SessionStore
from .config import AppConfig
from .engine import SearchEngine
from .errors import (
    AlreadyIndexed,
    BadManifestRecord,
    EmptyCorpus,
    EmptyRecord,
    LlmUnavailable,
    TranslationUnavailable,
    UnknownSession,
    UnknownVideoSelected,
)
from .ingest import parse_manifest_record
from .llm import FailingLlm, LlmClient

SCHEMA_VERSION = 1


def _ok(payload: dict, status_code: int = 200) -> JSONResponse:
    body = dict(payload)
    body["schema_version"] = SCHEMA_VERSION
    return JSONResponse(body, status_code=status_code)


def _error(status_code: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(
        {"code": code, "message": message, "schema_version": SCHEMA_VERSION},
        status_code=status_code,
    )


def create_app(
    config: AppConfig,
    llm: LlmClient | None = None,
    sessions: SessionStore | None = None,
    clock: Callable[[], float] | None = None,
) -> FastAPI:
    engine = SearchEngine(config)
    if llm is None:
        try:
            llm = engine.make_llm()
        except (LlmUnavailable, ValueError):
            llm = FailingLlm()
    runtime = AgentRuntime(
        engine,
        llm,
        sessions=sessions,
        clock=clock,
        log_dir=os.path.join(config.data_dir, "sessions"),
    )

    app = FastAPI(title="video search gateway", docs_url=None, redoc_url=None)
    app.state.engine = engine
    app.state.runtime = runtime

    @app.get("/health")
    async def health() -> JSONResponse:
        return _ok({"status": "ok", "videos": len(engine.store)})

    @app.post("/v1/index")
    async def index_record(request: Request) -> JSONResponse:
        try:
            body = await request.json()
        except Exception:
            return _error(400, "BadJson", "request body is not valid JSON")
        try:
            record = parse_manifest_record(body, base_dir=config.data_dir)
        except BadManifestRecord as exc:
            return _error(400, "BadRecord", str(exc))
        try:
            engine.ingest_record(record)
        except AlreadyIndexed:
            return _ok({"video_id": record.video_id, "already": True})
        except (EmptyRecord, BadManifestRecord) as exc:
            return _error(400, "BadRecord", str(exc))
        except TranslationUnavailable as exc:
            return _error(502, "TranslationUnavailable", str(exc))
        return _ok({"video_id": record.video_id, "already": False})

    @app.post("/v1/search")
    async def search(request: Request) -> JSONResponse:
        try:
            body = await request.json()
        except Exception:
            return _error(400, "BadJson", "request body is not valid JSON")
        if not isinstance(body, dict) or not isinstance(body.get("query"), str):
            return _error(400, "BadQuery", "body must carry a string query")
        k = body.get("k", config.fusion.k)
        if type(k) is not int or k < 1:
            return _error(400, "BadK", f"k must be a positive integer, got {k!r}")
        alpha = body.get("alpha", None)
        if alpha is not None:
            if not isinstance(alpha, (int, float)) or isinstance(alpha, bool):
                return _error(400, "BadAlpha", "alpha must be a number in [0, 1]")
            alpha = float(alpha)
            if not 0.0 <= alpha <= 1.0:
                return _error(400, "BadAlpha", "alpha must be within [0, 1]")
        rerank_flag = body.get("rerank", False)
        if not isinstance(rerank_flag, bool):
            return _error(400, "BadRerank", "rerank must be a boolean")

        rerank_with = (llm, config.rerank_model) if rerank_flag else None
        try:
            outcome = engine.search(body["query"], k=k, alpha=alpha, rerank_with=rerank_with)
        except EmptyCorpus as exc:
            return _error(409, "EmptyCorpus", str(exc))
        payload = {"results": [sv.to_dict() for sv in outcome.results]}
        if rerank_flag:
            payload["reranked"] = outcome.reranked
            payload["degraded"] = outcome.degraded
        return _ok(payload)

    @app.post("/v1/sessions")
    async def create_session() -> JSONResponse:
        session = runtime.sessions.create()
        return _ok({"session_id": session.session_id})

    @app.post("/v1/sessions/{session_id}/messages")
    async def post_message(session_id: str, request: Request) -> JSONResponse:
        try:
            body = await request.json()
        except Exception:
            return _error(400, "BadJson", "request body is not valid JSON")
        if not isinstance(body, dict) or not isinstance(body.get("text"), str):
            return _error(400, "BadMessage", "body must carry a string text")
        selected = body.get("selected_video_ids")
        if selected is not None:
            if not isinstance(selected, list) or not all(isinstance(x, str) for x in selected):
                return _error(400, "BadSelection", "selected_video_ids must be a string list")
        try:
            result = runtime.handle_message(session_id, body["text"], selected)
        except UnknownSession as exc:
            return _error(404, "UnknownSession", str(exc))
        except UnknownVideoSelected as exc:
            return _error(400, "UnknownVideoSelected", str(exc))
        payload = {
            "assistant": result.assistant,
            "route": result.route,
            "degraded": result.degraded,
            "fallback_used": result.fallback_used,
        }
        if result.videos is not None:
            payload["videos"] = result.videos
        return _ok(payload)

    @app.get("/v1/videos/{video_id}")
    async def get_video(video_id: str, embeddings: str = "0") -> JSONResponse:
        if video_id not in engine.store:
            return _error(404, "UnknownVideo", f"no video {video_id!r}")
        include = embeddings in ("1", "true", "yes")
        doc = engine.store.get(video_id)
        return _ok({"video": doc.to_dict(include_embeddings=include)})

    return app


def serve(config: AppConfig) -> None:
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
