"""Embedding providers.

The reference provider is a deterministic hashing embedder: it gives every
downstream module (indexing, fusion, evaluation) an exact, CPU-only oracle
with the same surface a real vision-language embedding service would have.
The remote provider speaks a small HTTP protocol so a real model can be
plugged in without touching callers.

Reference text algorithm: lowercase, split on Unicode whitespace, FNV-1a
64-bit hash per token, signed accumulation into D bins (sign from bit 8 of
the hash, bin from hash mod D), then L2 normalization. Frames hash every
consecutive 8-byte window instead of tokens, normalize per frame, and
average. All accumulation is in float64 so fixtures reproduce bit-for-bit
across platforms.
"""

from __future__ import annotations

import base64
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import requests

from .errors import (
    DimensionMismatch,
    EmptyFrameSet,
    NonFiniteInput,
    RemoteEmbedderUnavailable,
)

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    h = FNV64_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV64_PRIME) & _MASK64
    return h


@dataclass(frozen=True)
class Embedding:
    """Fixed-dimension vector in inner-product space.

    missing=True marks an absent modality (empty source content) and implies
    an all-zero vector, so it contributes exactly 0 to any fused score.
    """

    values: np.ndarray
    missing: bool = False

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", arr)
        if arr.ndim != 1 or arr.shape[0] < 1:
            raise ValueError("embedding must be a 1-D vector with D >= 1")
        if not np.isfinite(arr).all():
            raise NonFiniteInput("embedding values must be finite")
        if self.missing and np.any(arr != 0.0):
            raise ValueError("missing embedding must be all zeros")

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    def dot(self, other: "Embedding") -> float:
        return float(np.dot(self.values, other.values))


@dataclass
class EmbedderConfig:
    dimension: int = 64
    provider: str = "reference"  # "reference" | "remote"
    endpoint: str = ""
    timeout_ms: int = 5000
    retries: int = 2

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be > 0")
        if self.provider not in ("reference", "remote"):
            raise ValueError(f"unknown embedder provider {self.provider!r}")
        if self.provider == "remote" and not self.endpoint:
            raise ValueError("remote embedder needs an endpoint")


def _finish(acc: np.ndarray) -> Embedding:
    norm = float(np.linalg.norm(acc))
    if norm == 0.0:
        # Exact sign cancellation; treat as an absent modality so the
        # unit-norm invariant for non-missing embeddings holds.
        return Embedding(values=np.zeros_like(acc), missing=True)
    return Embedding(values=acc / norm, missing=False)


class ReferenceEmbedder:
    """Deterministic hashing embedder; pure function of its input bytes."""

    def __init__(self, dimension: int) -> None:
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = dimension

    def missing_embedding(self) -> Embedding:
        return Embedding(values=np.zeros(self.dimension), missing=True)

    def embed_text(self, text: str) -> Embedding:
        tokens = text.lower().split()
        if not tokens:
            return self.missing_embedding()
        acc = np.zeros(self.dimension, dtype=np.float64)
        for tok in tokens:
            h = fnv1a64(tok.encode("utf-8"))
            acc[h % self.dimension] += 1.0 if (h >> 8) & 1 else -1.0
        return _finish(acc)

    def embed_frames(self, frames: Sequence[bytes]) -> Embedding:
        if not frames:
            raise EmptyFrameSet("frame list is empty")
        per_frame = np.zeros((len(frames), self.dimension), dtype=np.float64)
        for row, blob in enumerate(frames):
            acc = self._frame_accumulator(blob)
            norm = float(np.linalg.norm(acc))
            per_frame[row] = acc / norm if norm > 0.0 else acc
        return _finish(per_frame.mean(axis=0))

    def _frame_accumulator(self, blob: bytes) -> np.ndarray:
        acc = np.zeros(self.dimension, dtype=np.float64)
        if len(blob) < 8:
            h = fnv1a64(blob)
            acc[h % self.dimension] += 1.0 if (h >> 8) & 1 else -1.0
            return acc
        # Vectorized FNV-1a over all sliding 8-byte windows: 8 rounds of
        # xor-multiply across the window axis; uint64 arrays wrap mod 2^64.
        data = np.frombuffer(blob, dtype=np.uint8)
        windows = np.lib.stride_tricks.sliding_window_view(data, 8).astype(np.uint64)
        hashes = np.full(windows.shape[0], FNV64_OFFSET, dtype=np.uint64)
        prime = np.uint64(FNV64_PRIME)
        for col in range(8):
            hashes = (hashes ^ windows[:, col]) * prime
        signs = np.where((hashes >> np.uint64(8)) & np.uint64(1), 1.0, -1.0)
        bins = (hashes % np.uint64(self.dimension)).astype(np.int64)
        np.add.at(acc, bins, signs)
        return acc


class RemoteEmbedder:
    """Client for the HTTP embedding protocol (POST {endpoint}/embed)."""

    def __init__(self, cfg: EmbedderConfig, session: requests.Session | None = None) -> None:
        self.cfg = cfg
        self._session = session or requests.Session()

    def missing_embedding(self) -> Embedding:
        return Embedding(values=np.zeros(self.cfg.dimension), missing=True)

    def embed_text(self, text: str) -> Embedding:
        return self._call({"kind": "text", "text": text})

    def embed_frames(self, frames: Sequence[bytes]) -> Embedding:
        if not frames:
            raise EmptyFrameSet("frame list is empty")
        payload = {
            "kind": "frames",
            "frames": [base64.b64encode(blob).decode("ascii") for blob in frames],
        }
        return self._call(payload)

    def _call(self, payload: dict) -> Embedding:
        url = self.cfg.endpoint.rstrip("/") + "/embed"
        timeout = self.cfg.timeout_ms / 1000.0
        last_error: Exception | None = None
        for _ in range(self.cfg.retries + 1):
            try:
                resp = self._session.post(url, json=payload, timeout=timeout)
            except requests.RequestException as exc:
                last_error = exc
                continue
            if resp.status_code != 200:
                raise RemoteEmbedderUnavailable(f"embedder returned HTTP {resp.status_code}")
            try:
                values = resp.json()["values"]
                arr = np.asarray(values, dtype=np.float64)
            except Exception as exc:
                raise RemoteEmbedderUnavailable(f"malformed embedder response: {exc}") from exc
            if arr.ndim != 1 or arr.shape[0] != self.cfg.dimension:
                raise DimensionMismatch(
                    f"remote embedder sent dimension {arr.shape}, expected {self.cfg.dimension}"
                )
            return Embedding(values=arr, missing=not np.any(arr))
        raise RemoteEmbedderUnavailable(f"embedder unreachable after retries: {last_error}")


def get_embedder(cfg: EmbedderConfig):
    if cfg.provider == "reference":
        return ReferenceEmbedder(cfg.dimension)
    return RemoteEmbedder(cfg)


def embed_text(text: str, cfg: EmbedderConfig) -> Embedding:
    return get_embedder(cfg).embed_text(text)


def embed_frames(frames: Sequence[bytes], cfg: EmbedderConfig) -> Embedding:
    return get_embedder(cfg).embed_frames(frames)
