"""Listwise LLM re-ranking of fused candidates.

The prompt asks for a JSON array of 0-based indices. Parsing is total:
whatever the model answers, the output is repaired into a permutation, and
any backend failure degrades to the original order instead of raising.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass

from .errors import LlmUnavailable
from .llm import LlmClient

logger = logging.getLogger(__name__)

PROMPT_VERSION = "rerank-v1"

_ARRAY_RE = re.compile(r"\[[^\[\]]*\]")


@dataclass(frozen=True)
class RerankCandidate:
    video_id: str
    transcription: str
    description: str


@dataclass
class RerankRequest:
    query: str
    candidates: list[RerankCandidate]

    def __post_init__(self) -> None:
        if not self.candidates:
            raise ValueError("candidates must be non-empty")
        ids = [c.video_id for c in self.candidates]
        if len(set(ids)) != len(ids):
            raise ValueError("candidate ids must be unique")


@dataclass
class RerankResult:
    candidates: list[RerankCandidate]
    permutation: list[int]  # output position -> input index
    pre_ranks: list[int]  # 1-based input rank per output item
    degraded: bool = False
    parse_warning: bool = False
    raw_output: str | None = None

    @property
    def post_ranks(self) -> list[int]:
        return list(range(1, len(self.candidates) + 1))


def build_rerank_prompt(req: RerankRequest) -> str:
    lines = [
        "You rank video search candidates. Output ONLY a JSON array of the",
        "0-based candidate indices ordered from most to least relevant to the",
        "query. No prose, no explanations.",
        f"Query: {req.query}",
    ]
    for i, cand in enumerate(req.candidates):
        lines.append(f"[{i}] transcription: {cand.transcription} | description: {cand.description}")
    return "\n".join(lines)


def parse_rerank_output(text: str, k: int) -> tuple[list[int], bool]:
    """Repair arbitrary LLM text into a permutation of 0..k-1.

    First JSON integer array wins; out-of-range entries are dropped,
    duplicates keep their first occurrence, missing indices are appended
    ascending. Returns (permutation, warning) where warning means the text
    contributed nothing and identity order was used.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    parsed: list[int] | None = None
    for match in _ARRAY_RE.finditer(text):
        try:
            arr = json.loads(match.group(0))
        except json.JSONDecodeError:
            continue
        # bools are ints in Python; exclude them
        if isinstance(arr, list) and all(type(x) is int for x in arr):
            parsed = arr
            break
    if parsed is None:
        return list(range(k)), True

    seen: set[int] = set()
    out: list[int] = []
    for x in parsed:
        if 0 <= x < k and x not in seen:
            seen.add(x)
            out.append(x)
    for x in range(k):
        if x not in seen:
            out.append(x)
    return out, False


def rerank(req: RerankRequest, llm: LlmClient, model: str) -> RerankResult:
    """Apply the LLM's permutation; degrade to input order on any failure."""
    k = len(req.candidates)
    prompt = build_rerank_prompt(req)
    try:
        raw = llm.complete(model, prompt)
    except LlmUnavailable as exc:
        logger.warning("rerank degraded, keeping fused order: %s", exc)
        return RerankResult(
            candidates=list(req.candidates),
            permutation=list(range(k)),
            pre_ranks=list(range(1, k + 1)),
            degraded=True,
        )
    permutation, warning = parse_rerank_output(raw, k)
    if warning:
        logger.warning("unparseable rerank output, keeping fused order: %r", raw[:200])
    return RerankResult(
        candidates=[req.candidates[i] for i in permutation],
        permutation=permutation,
        pre_ranks=[i + 1 for i in permutation],
        degraded=False,
        parse_warning=warning,
        raw_output=raw,
    )
