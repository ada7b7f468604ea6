"""Wiring of stores, indexes, embedder, translator, and rerank into one
search engine object that the gateway, CLI, and agents all share.

Data directory layout: docs/ (one JSON per video), vision.idx, audio.idx.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass, replace

from .config import AppConfig
from .documents import DocumentStore
from .embeddings import get_embedder
from .errors import LlmUnavailable
from .fusion import FusionConfig, ScoredVideo, fused_search
from .hnsw import HnswIndex
from .ingest import Ingestor, VideoManifestRecord
from .llm import LlmClient
from .providers import get_translator
from .rerank import RerankCandidate, RerankRequest, rerank

VISION_INDEX_FILE = "vision.idx"
AUDIO_INDEX_FILE = "audio.idx"
DOCS_DIR = "docs"


@dataclass
class SearchOutcome:
    results: list[ScoredVideo]
    reranked: bool = False
    degraded: bool = False
    parse_warning: bool = False


class SearchEngine:
    def __init__(self, config: AppConfig) -> None:
        self.config = config
        self.data_dir = config.data_dir
        os.makedirs(self.data_dir, exist_ok=True)
        self.store = DocumentStore(os.path.join(self.data_dir, DOCS_DIR))
        self.vision_index = self._open_index(VISION_INDEX_FILE)
        self.audio_index = self._open_index(AUDIO_INDEX_FILE)
        self.embedder = get_embedder(config.embedder)
        self.translator = get_translator(
            config.translator_kind,
            endpoint=config.translator_endpoint,
            timeout_ms=config.embedder.timeout_ms,
            retries=config.embedder.retries,
        )
        self.ingestor = Ingestor(
            store=self.store,
            vision_index=self.vision_index,
            audio_index=self.audio_index,
            embedder_cfg=config.embedder,
            translator=self.translator,
            frames_per_video=config.frames_per_video,
        )
        self._write_lock = threading.Lock()

    def _open_index(self, filename: str) -> HnswIndex:
        path = os.path.join(self.data_dir, filename)
        if os.path.exists(path):
            return HnswIndex.load(path)
        return HnswIndex(self.config.embedder.dimension, replace(self.config.index))

    # -- ingestion (serialized writes) ----------------------------------

    def ingest_record(self, record: VideoManifestRecord):
        with self._write_lock:
            doc = self.ingestor.ingest_record(record)
            self.save_indexes()
        return doc

    def ingest_manifest(self, path: str):
        with self._write_lock:
            report = self.ingestor.ingest_manifest(path)
            self.save_indexes()
        return report

    def save_indexes(self) -> None:
        self.vision_index.save(os.path.join(self.data_dir, VISION_INDEX_FILE))
        self.audio_index.save(os.path.join(self.data_dir, AUDIO_INDEX_FILE))

    # -- search ----------------------------------------------------------

    def search(
        self,
        query: str,
        k: int | None = None,
        alpha: float | None = None,
        rerank_with: tuple[LlmClient, str] | None = None,
        ef_search: int | None = None,
        m_cand: int | None = None,
    ) -> SearchOutcome:
        """Fused search with optional listwise re-ranking.

        rerank_with is (llm client, model name); scores keep their fused
        values after re-ranking, only positions and ranks change.
        """
        base = self.config.fusion
        cfg = FusionConfig(
            alpha=base.alpha if alpha is None else alpha,
            m_cand=max(base.m_cand if m_cand is None else m_cand, k or base.k),
            k=base.k if k is None else k,
        )
        results = fused_search(
            query, self.store, self.vision_index, self.audio_index, self.embedder, cfg,
            ef_search=ef_search,
        )
        if rerank_with is None or not results:
            return SearchOutcome(results=results)

        llm, model = rerank_with
        req = RerankRequest(
            query=query,
            candidates=[
                RerankCandidate(
                    video_id=sv.video_id,
                    transcription=self.store.get(sv.video_id).transcription,
                    description=self.store.get(sv.video_id).description,
                )
                for sv in results
            ],
        )
        outcome = rerank(req, llm, model)
        reordered = [
            replace(results[i], rank=pos + 1)
            for pos, i in enumerate(outcome.permutation)
        ]
        return SearchOutcome(
            results=reordered,
            reranked=True,
            degraded=outcome.degraded,
            parse_warning=outcome.parse_warning,
        )

    def make_llm(self) -> LlmClient:
        """Backend for the configured llm.* keys."""
        if self.config.llm_backend == "scripted":
            from .llm import ScriptedLlm

            if not self.config.llm_script:
                raise LlmUnavailable("llm.backend is scripted but llm.script is unset")
            return ScriptedLlm.from_file(self.config.llm_script)
        if self.config.llm_backend == "remote":
            from .llm import RemoteLlm

            if not self.config.llm_endpoint:
                raise LlmUnavailable("llm.backend is remote but llm.endpoint is unset")
            return RemoteLlm(self.config.llm_endpoint)
        raise ValueError(f"unknown llm backend {self.config.llm_backend!r}")
