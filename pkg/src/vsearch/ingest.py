"""Indexing-time pipeline: frame sampling, text assembly with optional
translation, dual-modality embedding, and insertion into the indexes and
document store.
"""

from __future__ import annotations

import base64
import json
import logging
import os
from dataclasses import dataclass, field

from .documents import DocumentStore, VideoDocument, valid_video_id
from .embeddings import EmbedderConfig, get_embedder
from .errors import (
    AlreadyIndexed,
    BadManifestRecord,
    EmptyRecord,
    TranslationUnavailable,
)
from .hnsw import HnswIndex
from .providers import Translator

logger = logging.getLogger(__name__)

DEFAULT_FRAMES_PER_VIDEO = 48


@dataclass
class VideoManifestRecord:
    video_id: str
    frames: list[bytes] = field(default_factory=list)
    transcription: str = ""
    description: str = ""
    language: str = "und"

    def __post_init__(self) -> None:
        if not self.video_id:
            raise BadManifestRecord("empty video id")
        if not valid_video_id(self.video_id):
            raise BadManifestRecord(f"video id {self.video_id!r} is not filename-safe")
        if not self.frames and not self.transcription and not self.description:
            raise BadManifestRecord(f"record {self.video_id!r} has no frames and no text")


def sample_frame_indices(total: int, target: int = DEFAULT_FRAMES_PER_VIDEO) -> list[int]:
    """Uniform-interval sampling: all frames when total <= target, else
    floor(i*total/target) for i in 0..target-1 (strictly increasing)."""
    if total < 0:
        raise ValueError("total must be >= 0")
    if target < 1:
        raise ValueError("target must be >= 1")
    if total <= target:
        return list(range(total))
    return [i * total // target for i in range(target)]


def build_index_text(
    transcription: str, description: str, language: str, translator: Translator
) -> str:
    """Join transcription and description, translating non-English text.

    Combined form: whichever part is non-empty, or both joined by a newline.
    Languages tagged "en" or "en-*" skip translation.
    """
    if not description:
        combined = transcription
    elif not transcription:
        combined = description
    else:
        combined = transcription + "\n" + description
    if not combined:
        return combined
    lang = language.lower()
    if lang == "en" or lang.startswith("en-"):
        return combined
    try:
        return translator.translate(combined)
    except TranslationUnavailable:
        raise
    except Exception as exc:
        raise TranslationUnavailable(f"translator failed: {exc}") from exc


def _decode_frame(entry: str, base_dir: str) -> bytes:
    if entry.startswith("base64:"):
        return base64.b64decode(entry[len("base64:") :])
    path = entry if os.path.isabs(entry) else os.path.join(base_dir, entry)
    with open(path, "rb") as fh:
        return fh.read()


def parse_manifest_line(line: str, base_dir: str = ".") -> VideoManifestRecord:
    """One JSONL record: {"video_id", "frames":[path-or-"base64:..."],
    "transcription", "description", "language"}."""
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise BadManifestRecord(f"invalid JSON: {exc}") from exc
    return parse_manifest_record(raw, base_dir)


def parse_manifest_record(raw: object, base_dir: str = ".") -> VideoManifestRecord:
    if not isinstance(raw, dict) or "video_id" not in raw:
        raise BadManifestRecord("record must be an object with a video_id")
    frames_field = raw.get("frames", [])
    if not isinstance(frames_field, list):
        raise BadManifestRecord("frames must be a list")
    try:
        frames = [_decode_frame(str(entry), base_dir) for entry in frames_field]
    except (OSError, ValueError) as exc:
        raise BadManifestRecord(f"unreadable frame: {exc}") from exc
    return VideoManifestRecord(
        video_id=str(raw["video_id"]),
        frames=frames,
        transcription=str(raw.get("transcription", "")),
        description=str(raw.get("description", "")),
        language=str(raw.get("language", "und")),
    )


@dataclass
class IngestReport:
    ingested: list[str] = field(default_factory=list)
    skipped: list[tuple[str, str]] = field(default_factory=list)  # (id or line tag, reason)


class Ingestor:
    """Writes one record at a time into the two indexes and the store.

    Index writes are serialized by construction (single-threaded ingest);
    the indexes' one-writer contract is therefore respected.
    """

    def __init__(
        self,
        store: DocumentStore,
        vision_index: HnswIndex,
        audio_index: HnswIndex,
        embedder_cfg: EmbedderConfig,
        translator: Translator,
        frames_per_video: int = DEFAULT_FRAMES_PER_VIDEO,
    ) -> None:
        self.store = store
        self.vision_index = vision_index
        self.audio_index = audio_index
        self.embedder = get_embedder(embedder_cfg)
        self.translator = translator
        self.frames_per_video = frames_per_video

    def ingest_record(self, record: VideoManifestRecord) -> VideoDocument:
        if record.video_id in self.store:
            raise AlreadyIndexed(f"video {record.video_id!r} already ingested")

        indices = sample_frame_indices(len(record.frames), self.frames_per_video)
        sampled = [record.frames[i] for i in indices]
        if sampled:
            vision = self.embedder.embed_frames(sampled)
        else:
            vision = self.embedder.missing_embedding()

        index_text = build_index_text(
            record.transcription, record.description, record.language, self.translator
        )
        if index_text:
            audio = self.embedder.embed_text(index_text)
        else:
            audio = self.embedder.missing_embedding()

        if vision.missing and audio.missing:
            raise EmptyRecord(f"record {record.video_id!r} has no usable modality")

        doc = VideoDocument(
            video_id=record.video_id,
            vision=vision,
            audio=audio,
            index_text=index_text,
            transcription=record.transcription,
            description=record.description,
            language=record.language,
            n_used=len(sampled),
        )
        self.store.add(doc)
        if not vision.missing:
            self.vision_index.insert(record.video_id, vision)
        if not audio.missing:
            self.audio_index.insert(record.video_id, audio)
        return doc

    def ingest_manifest(self, path: str) -> IngestReport:
        """Ingest a JSONL manifest; bad records are logged and skipped."""
        report = IngestReport()
        base_dir = os.path.dirname(os.path.abspath(path))
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = parse_manifest_line(line, base_dir)
                except BadManifestRecord as exc:
                    logger.error("manifest line %d skipped: %s", lineno, exc)
                    report.skipped.append((f"line {lineno}", str(exc)))
                    continue
                try:
                    self.ingest_record(record)
                except (AlreadyIndexed, EmptyRecord, TranslationUnavailable) as exc:
                    logger.error("record %s skipped: %s", record.video_id, exc)
                    report.skipped.append((record.video_id, str(exc)))
                    continue
                report.ingested.append(record.video_id)
        return report
