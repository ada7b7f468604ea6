"""Query-time weighted fusion of vision and audio-text similarities.

The query is embedded once. Candidates are the union of each modality
index's top-m_cand ids; every candidate is then rescored EXACTLY against
the full-precision stored embeddings for both modalities, so the ANN
approximation only affects which ids enter the candidate pool, never the
scores or their order. A missing modality contributes 0 without
renormalizing alpha.
"""

from __future__ import annotations

from dataclasses import dataclass

from .documents import DocumentStore
from .embeddings import Embedding
from .errors import EmptyCorpus, EmptyIndex
from .hnsw import HnswIndex


@dataclass
class FusionConfig:
    alpha: float = 0.5
    m_cand: int = 100
    k: int = 10

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.m_cand < self.k:
            raise ValueError("m_cand must be >= k")


@dataclass(frozen=True)
class ScoredVideo:
    video_id: str
    vision_score: float
    audio_score: float
    fused_score: float
    rank: int

    def to_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "vision_score": self.vision_score,
            "audio_score": self.audio_score,
            "fused_score": self.fused_score,
            "rank": self.rank,
        }


def fuse(alpha: float, vision_score: float, audio_score: float) -> float:
    return alpha * vision_score + (1.0 - alpha) * audio_score


def _modality_score(embedding: Embedding, query: Embedding) -> float:
    if embedding.missing:
        return 0.0
    return float(embedding.values @ query.values)


def fused_search_embedded(
    query_embedding: Embedding,
    store: DocumentStore,
    vision_index: HnswIndex,
    audio_index: HnswIndex,
    cfg: FusionConfig,
    ef_search: int | None = None,
) -> list[ScoredVideo]:
    """Fusion over a pre-embedded query; fused_search wraps this."""
    if len(store) == 0:
        raise EmptyCorpus("no videos ingested")

    candidates: set[str] = set()
    for index in (vision_index, audio_index):
        if len(index) == 0:
            continue
        try:
            hits = index.search(query_embedding, cfg.m_cand, ef_search=ef_search)
        except EmptyIndex:
            continue
        candidates.update(vid for vid, _ in hits)

    scored = []
    for vid in candidates:
        doc = store.get(vid)
        v = _modality_score(doc.vision, query_embedding)
        a = _modality_score(doc.audio, query_embedding)
        scored.append((vid, v, a, fuse(cfg.alpha, v, a)))
    scored.sort(key=lambda t: (-t[3], t[0]))

    return [
        ScoredVideo(video_id=vid, vision_score=v, audio_score=a, fused_score=f, rank=i + 1)
        for i, (vid, v, a, f) in enumerate(scored[: cfg.k])
    ]


def fused_search(
    query: str,
    store: DocumentStore,
    vision_index: HnswIndex,
    audio_index: HnswIndex,
    embedder,
    cfg: FusionConfig,
    ef_search: int | None = None,
) -> list[ScoredVideo]:
    """Top-k ScoredVideo for a text query, fused score desc, ties id asc."""
    e_q = embedder.embed_text(query)
    return fused_search_embedded(e_q, store, vision_index, audio_index, cfg, ef_search)
