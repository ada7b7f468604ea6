"""Multimodal video search engine with a conversational agent layer."""

from .agents import AgentRuntime, RouteDecision, Session, SessionStore, TurnResult
from .archives import TensorArchive, archive_read, archive_write, merge_stream, tensor_add, tensor_diff
from .config import AppConfig
from .contrastive import ContrastiveBatch, info_nce, info_nce_with_grad
from .documents import DocumentStore, VideoDocument
from .embeddings import EmbedderConfig, Embedding, ReferenceEmbedder, RemoteEmbedder, embed_frames, embed_text
from .engine import SearchEngine, SearchOutcome
from .errors import VSearchError
from .fusion import FusionConfig, ScoredVideo, fused_search
from .hnsw import HnswIndex, IndexParams
from .ingest import Ingestor, VideoManifestRecord, build_index_text, sample_frame_indices
from .llm import FailingLlm, LlmClient, RemoteLlm, ScriptedLlm
from .metrics import ndcg_at_k, recall_at_k
from .rerank import RerankRequest, build_rerank_prompt, parse_rerank_output, rerank

__version__ = "0.1.0"

__all__ = [
    "AgentRuntime",
    "AppConfig",
    "ContrastiveBatch",
    "DocumentStore",
    "EmbedderConfig",
    "Embedding",
    "FailingLlm",
    "FusionConfig",
    "HnswIndex",
    "IndexParams",
    "Ingestor",
    "LlmClient",
    "ReferenceEmbedder",
    "RemoteEmbedder",
    "RemoteLlm",
    "RerankRequest",
    "RouteDecision",
    "ScoredVideo",
    "ScriptedLlm",
    "SearchEngine",
    "SearchOutcome",
    "Session",
    "SessionStore",
    "TensorArchive",
    "TurnResult",
    "VSearchError",
    "VideoDocument",
    "VideoManifestRecord",
    "archive_read",
    "archive_write",
    "build_index_text",
    "build_rerank_prompt",
    "embed_frames",
    "embed_text",
    "fused_search",
    "info_nce",
    "info_nce_with_grad",
    "merge_stream",
    "ndcg_at_k",
    "parse_rerank_output",
    "recall_at_k",
    "rerank",
    "sample_frame_indices",
    "tensor_add",
    "tensor_diff",
    "__version__",
]
