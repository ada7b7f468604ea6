"""Three-agent conversation flow: routing, search orchestration, and chat.

Every turn starts at the router; its decision leads either into the search
phase (fused retrieval, re-ranking, per-video summaries) or straight into
chat over the current selection. All LLM failures degrade into
conversational fallbacks; no turn ever raises because a model misbehaved.

Each session appends to a JSONL event log (user_msg, selection, route,
search_results, rerank, assistant_msg) written with canonical JSON, so
transcripts are byte-stable under a fixed clock and a scripted backend,
and replaying a log reconstructs the session state.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Callable

from .engine import SearchEngine
from .errors import EmptyCorpus, LlmUnavailable, UnknownSession, UnknownVideoSelected
from .fusion import ScoredVideo
from .llm import LlmClient

HISTORY_WINDOW = 10
SUMMARY_MAX_CHARS = 400

ROUTE_PROMPT_TEMPLATE = (
    "You are a routing agent for a video assistant. Decide whether the user\n"
    "message needs a search over the video corpus or can be answered in\n"
    "conversation. Respond with exactly one word: SEARCH or CHAT.\n"
    "Session has videos: {has_videos}\n"
    "User message: {query}"
)

SUMMARY_PROMPT_TEMPLATE = (
    "Summarize this video in one short sentence for a search result list.\n"
    "video {video_id}: transcription: {transcription} | description: {description}\n"
    "Summary:"
)

CHAT_PREAMBLE = (
    "You are a video assistant. Answer the user, grounded in the provided\n"
    "video contents when any are given."
)

APOLOGY_TEXT = "Sorry, I cannot answer right now; the language model is unavailable."


@dataclass
class Turn:
    role: str  # user | assistant | system
    text: str
    timestamp: float


@dataclass
class RouteDecision:
    target: str  # "search" | "chat"
    raw: str
    fallback_used: bool


@dataclass
class Session:
    session_id: str
    history: list[Turn] = field(default_factory=list)
    last_results: list[ScoredVideo] = field(default_factory=list)
    selected_ids: list[str] = field(default_factory=list)
    rerank_degraded: bool = False

    def result_ids(self) -> list[str]:
        return [sv.video_id for sv in self.last_results]


@dataclass
class TurnResult:
    assistant: str
    route: str
    videos: list[dict] | None = None
    degraded: bool = False
    fallback_used: bool = False


class SessionStore:
    """In-memory sessions with per-session turn locks; ids are injectable
    so golden transcripts stay stable."""

    def __init__(self, id_factory: Callable[[], str] | None = None) -> None:
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()
        self._id_factory = id_factory or (lambda: uuid.uuid4().hex)

    def create(self) -> Session:
        with self._guard:
            session_id = self._id_factory()
            if session_id in self._sessions:
                raise ValueError(f"session id collision: {session_id}")
            session = Session(session_id=session_id)
            self._sessions[session_id] = session
            self._locks[session_id] = threading.Lock()
            return session

    def get(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSession(f"no session {session_id!r}") from None

    def lock(self, session_id: str) -> threading.Lock:
        with self._guard:
            if session_id not in self._locks:
                raise UnknownSession(f"no session {session_id!r}")
            return self._locks[session_id]


def build_route_prompt(query: str, has_videos: bool) -> str:
    return ROUTE_PROMPT_TEMPLATE.format(has_videos="yes" if has_videos else "no", query=query)


def parse_route_output(raw: str) -> tuple[str, bool]:
    word = raw.strip().upper()
    if word == "SEARCH":
        return "search", False
    if word == "CHAT":
        return "chat", False
    return "chat", True


def build_chat_prompt(
    question: str, history: list[Turn], selected_docs: list[tuple[str, str, str]]
) -> str:
    """selected_docs: (video_id, transcription, description) per selection."""
    lines = [CHAT_PREAMBLE]
    for video_id, transcription, description in selected_docs:
        lines.append(f"video {video_id}: transcription: {transcription} | description: {description}")
    if history:
        lines.append("Conversation so far:")
        for turn in history[-HISTORY_WINDOW:]:
            lines.append(f"{turn.role}: {turn.text}")
    lines.append(f"User question: {question}")
    lines.append("Answer:")
    return "\n".join(lines)


class AgentRuntime:
    """Drives one turn at a time over an engine and an LLM backend."""

    def __init__(
        self,
        engine: SearchEngine,
        llm: LlmClient,
        sessions: SessionStore | None = None,
        clock: Callable[[], float] | None = None,
        log_dir: str | None = None,
    ) -> None:
        self.engine = engine
        self.llm = llm
        self.sessions = sessions or SessionStore()
        self.clock = clock or time.time
        self.log_dir = log_dir
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)

    # -- event log -------------------------------------------------------

    def _log(self, session: Session, event_type: str, **payload) -> None:
        if not self.log_dir:
            return
        event = dict(payload)
        event["type"] = event_type
        event["ts"] = self.clock()
        line = json.dumps(event, sort_keys=True, separators=(",", ":"))
        path = os.path.join(self.log_dir, session.session_id + ".jsonl")
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")

    def log_path(self, session_id: str) -> str | None:
        if not self.log_dir:
            return None
        return os.path.join(self.log_dir, session_id + ".jsonl")

    # -- routing -----------------------------------------------------------

    def route(self, query: str, session: Session) -> RouteDecision:
        prompt = build_route_prompt(query, has_videos=bool(session.last_results))
        try:
            raw = self.llm.complete(self.engine.config.routing_model, prompt)
        except LlmUnavailable as exc:
            return RouteDecision(target="chat", raw=f"<unavailable: {exc}>", fallback_used=True)
        target, fallback = parse_route_output(raw)
        return RouteDecision(target=target, raw=raw, fallback_used=fallback)

    # -- turn handling -----------------------------------------------------

    def handle_message(
        self, session_id: str, text: str, selected_video_ids: list[str] | None = None
    ) -> TurnResult:
        session = self.sessions.get(session_id)
        with self.sessions.lock(session_id):
            return self._handle_locked(session, text, selected_video_ids)

    def _handle_locked(
        self, session: Session, text: str, selected_video_ids: list[str] | None
    ) -> TurnResult:
        session.history.append(Turn(role="user", text=text, timestamp=self.clock()))
        self._log(session, "user_msg", text=text)

        if selected_video_ids is not None:
            known = set(session.result_ids())
            unknown = [vid for vid in selected_video_ids if vid not in known]
            if unknown:
                raise UnknownVideoSelected(f"not in current results: {unknown}")
            if len(selected_video_ids) > self.engine.config.fusion.k:
                raise UnknownVideoSelected(
                    f"selected {len(selected_video_ids)} videos, limit {self.engine.config.fusion.k}"
                )
            session.selected_ids = list(dict.fromkeys(selected_video_ids))
            self._log(session, "selection", selected=session.selected_ids)

        decision = self.route(text, session)
        self._log(
            session, "route",
            fallback_used=decision.fallback_used, raw=decision.raw, target=decision.target,
        )

        if decision.target == "search":
            result = self._search_phase(session, text)
        else:
            result = self._chat_phase(session, text)
        result.fallback_used = decision.fallback_used
        return result

    # -- search phase ------------------------------------------------------

    def _search_phase(self, session: Session, query: str) -> TurnResult:
        cfg = self.engine.config
        try:
            outcome = self.engine.search(
                query, k=cfg.fusion.k, rerank_with=(self.llm, cfg.rerank_model)
            )
        except EmptyCorpus:
            reply = "No videos have been ingested yet, so there is nothing to search."
            session.history.append(Turn(role="assistant", text=reply, timestamp=self.clock()))
            self._log(session, "assistant_msg", degraded=True, text=reply)
            return TurnResult(assistant=reply, route="search", videos=[], degraded=True)

        final_order = outcome.results
        scores = [
            {
                "audio_score": sv.audio_score,
                "fused_score": sv.fused_score,
                "video_id": sv.video_id,
                "vision_score": sv.vision_score,
            }
            for sv in sorted(final_order, key=lambda sv: sv.video_id)
        ]
        self._log(session, "search_results", query=query, results=scores)
        self._log(
            session, "rerank",
            degraded=outcome.degraded,
            order=[sv.video_id for sv in final_order],
            parse_warning=outcome.parse_warning,
        )

        session.last_results = final_order
        session.selected_ids = []
        session.rerank_degraded = outcome.degraded

        degraded_any = outcome.degraded
        videos = []
        summary_lines = []
        for sv in final_order:
            doc = self.engine.store.get(sv.video_id)
            summary, summary_degraded = self._summarize(doc)
            degraded_any = degraded_any or summary_degraded
            entry = sv.to_dict()
            entry["summary"] = summary
            videos.append(entry)
            summary_lines.append(f"- {sv.video_id}: {summary}")

        reply = f"Found {len(videos)} videos for \"{query}\".\n" + "\n".join(summary_lines)
        session.history.append(Turn(role="assistant", text=reply, timestamp=self.clock()))
        self._log(session, "assistant_msg", degraded=degraded_any, text=reply)
        return TurnResult(assistant=reply, route="search", videos=videos, degraded=degraded_any)

    def _summarize(self, doc) -> tuple[str, bool]:
        prompt = SUMMARY_PROMPT_TEMPLATE.format(
            video_id=doc.video_id,
            transcription=doc.transcription,
            description=doc.description,
        )
        try:
            raw = self.llm.complete(self.engine.config.chat_model, prompt)
            return raw.strip()[:SUMMARY_MAX_CHARS], False
        except LlmUnavailable:
            fallback = f"{doc.transcription} | {doc.description}"
            return fallback[:SUMMARY_MAX_CHARS], True

    # -- chat phase ----------------------------------------------------------

    def _chat_phase(self, session: Session, question: str) -> TurnResult:
        selected_docs = []
        for vid in session.selected_ids:
            doc = self.engine.store.get(vid)
            selected_docs.append((vid, doc.transcription, doc.description))
        prompt = build_chat_prompt(question, session.history[:-1], selected_docs)
        degraded = False
        try:
            reply = self.llm.complete(self.engine.config.chat_model, prompt)
        except LlmUnavailable:
            reply = APOLOGY_TEXT
            degraded = True
        session.history.append(Turn(role="assistant", text=reply, timestamp=self.clock()))
        self._log(session, "assistant_msg", degraded=degraded, text=reply)
        return TurnResult(assistant=reply, route="chat", degraded=degraded)


def read_event_log(path: str) -> list[dict]:
    events = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                events.append(json.loads(line))
    return events


def replay_events(session_id: str, events: list[dict]) -> Session:
    """Rebuild session state from its event log."""
    session = Session(session_id=session_id)
    pending: dict[str, dict] = {}
    for event in events:
        etype = event["type"]
        if etype == "user_msg":
            session.history.append(Turn(role="user", text=event["text"], timestamp=event["ts"]))
        elif etype == "assistant_msg":
            session.history.append(
                Turn(role="assistant", text=event["text"], timestamp=event["ts"])
            )
        elif etype == "selection":
            session.selected_ids = list(event["selected"])
        elif etype == "search_results":
            pending = {r["video_id"]: r for r in event["results"]}
        elif etype == "rerank":
            session.last_results = [
                ScoredVideo(
                    video_id=vid,
                    vision_score=pending[vid]["vision_score"],
                    audio_score=pending[vid]["audio_score"],
                    fused_score=pending[vid]["fused_score"],
                    rank=pos + 1,
                )
                for pos, vid in enumerate(event["order"])
            ]
            session.selected_ids = []
            session.rerank_degraded = event["degraded"]
    return session
