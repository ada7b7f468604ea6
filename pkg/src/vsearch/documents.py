"""Per-video document records and their on-disk store.

One JSON file per video id under a content directory. Embeddings live here
in float64 (JSON floats round-trip exactly via repr), so query-time
rescoring works from full-precision vectors regardless of what the ANN
index stores.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass

import numpy as np

from .embeddings import Embedding
from .errors import DuplicateId

# ids become filenames; keep them path-safe (\Z so a trailing newline fails)
ID_PATTERN = re.compile(r"^[A-Za-z0-9._-]+\Z")


def valid_video_id(video_id: str) -> bool:
    return bool(ID_PATTERN.match(video_id))


@dataclass(frozen=True)
class VideoDocument:
    """One indexed video: both modality embeddings plus source text."""

    video_id: str
    vision: Embedding
    audio: Embedding
    index_text: str
    transcription: str
    description: str
    language: str
    n_used: int

    def __post_init__(self) -> None:
        if self.vision.missing and self.audio.missing:
            raise ValueError("document must carry at least one modality")

    def to_dict(self, include_embeddings: bool = True) -> dict:
        out = {
            "video_id": self.video_id,
            "index_text": self.index_text,
            "transcription": self.transcription,
            "description": self.description,
            "language": self.language,
            "n_used": self.n_used,
        }
        if include_embeddings:
            out["vision"] = {
                "missing": self.vision.missing,
                "values": self.vision.values.tolist(),
            }
            out["audio"] = {
                "missing": self.audio.missing,
                "values": self.audio.values.tolist(),
            }
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "VideoDocument":
        def emb(part: dict) -> Embedding:
            return Embedding(
                values=np.asarray(part["values"], dtype=np.float64),
                missing=bool(part["missing"]),
            )

        return cls(
            video_id=data["video_id"],
            vision=emb(data["vision"]),
            audio=emb(data["audio"]),
            index_text=data["index_text"],
            transcription=data["transcription"],
            description=data["description"],
            language=data["language"],
            n_used=int(data["n_used"]),
        )


class DocumentStore:
    """Directory of per-video JSON documents with an in-memory mirror.

    Writes are atomic per record (temp file + rename). Reads after __init__
    come from memory, so concurrent searches never touch the filesystem.
    """

    def __init__(self, directory: str) -> None:
        self.directory = directory
        os.makedirs(directory, exist_ok=True)
        self._docs: dict[str, VideoDocument] = {}
        for name in sorted(os.listdir(directory)):
            if not name.endswith(".json"):
                continue
            with open(os.path.join(directory, name), "r", encoding="utf-8") as fh:
                doc = VideoDocument.from_dict(json.load(fh))
            self._docs[doc.video_id] = doc

    def __len__(self) -> int:
        return len(self._docs)

    def __contains__(self, video_id: str) -> bool:
        return video_id in self._docs

    def ids(self) -> list[str]:
        return sorted(self._docs)

    def get(self, video_id: str) -> VideoDocument:
        return self._docs[video_id]

    def add(self, doc: VideoDocument) -> None:
        if doc.video_id in self._docs:
            raise DuplicateId(f"document {doc.video_id!r} already stored")
        if not valid_video_id(doc.video_id):
            raise ValueError(f"video id {doc.video_id!r} is not filename-safe")
        path = os.path.join(self.directory, doc.video_id + ".json")
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(doc.to_dict(), fh, sort_keys=True, separators=(",", ":"))
        os.replace(tmp, path)
        self._docs[doc.video_id] = doc
