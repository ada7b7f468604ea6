"""Application configuration.

A flat "key = value" document (full-line and trailing # comments, optional
double quotes around values) merged with environment overrides: the env
name for key "a.b" is VAGENT_A_B. The key list is closed; unknown keys are
an error so typos surface instead of silently using defaults.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .embeddings import EmbedderConfig
from .fusion import FusionConfig
from .hnsw import IndexParams

ENV_PREFIX = "VAGENT_"

PROMPT_VERSIONS = {
    "route": "route-v1",
    "chat": "chat-v1",
    "summary": "summary-v1",
    "rerank": "rerank-v1",
}

# key -> default; value type is the coercion target
DEFAULTS: dict[str, object] = {
    "data_dir": "data",
    "embedder.dimension": 64,
    "embedder.provider": "reference",
    "embedder.endpoint": "",
    "embedder.timeout_ms": 5000,
    "embedder.retries": 2,
    "index.m": 16,
    "index.ef_construction": 200,
    "index.ef_search": 100,
    "index.seed": 0,
    "fusion.alpha": 0.5,
    "fusion.m_cand": 100,
    "fusion.k": 10,
    "ingest.frames_per_video": 48,
    "translator.kind": "identity",
    "translator.endpoint": "",
    "llm.backend": "scripted",
    "llm.endpoint": "",
    "llm.script": "",
    "models.routing": "gpt-4.1-mini",
    "models.chat": "gpt-4o",
    "models.rerank": "gpt-4o-mini",
    "server.host": "127.0.0.1",
    "server.port": 8080,
    "eval.gain": "exp",
}


def env_name(key: str) -> str:
    return ENV_PREFIX + key.replace(".", "_").upper()


def _coerce(key: str, raw: str) -> object:
    default = DEFAULTS[key]
    if isinstance(default, bool):
        low = raw.lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise ValueError(f"config key {key}: expected boolean, got {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def parse_config_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if value.startswith('"') and value.endswith('"') and len(value) >= 2:
            value = value[1:-1]
        elif "#" in value:
            value = value.split("#", 1)[0].rstrip()
        out[key] = value
    return out


@dataclass
class AppConfig:
    data_dir: str = "data"
    embedder: EmbedderConfig = field(default_factory=EmbedderConfig)
    index: IndexParams = field(default_factory=IndexParams)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    frames_per_video: int = 48
    translator_kind: str = "identity"
    translator_endpoint: str = ""
    llm_backend: str = "scripted"
    llm_endpoint: str = ""
    llm_script: str = ""
    routing_model: str = "gpt-4.1-mini"
    chat_model: str = "gpt-4o"
    rerank_model: str = "gpt-4o-mini"
    host: str = "127.0.0.1"
    port: int = 8080
    gain: str = "exp"
    prompt_versions: dict = field(default_factory=lambda: dict(PROMPT_VERSIONS))

    def __post_init__(self) -> None:
        if self.frames_per_video < 1:
            raise ValueError("ingest.frames_per_video must be >= 1")
        if self.gain not in ("exp", "linear"):
            raise ValueError("eval.gain must be exp or linear")

    @classmethod
    def load(cls, path: str | None = None, env: dict | None = None) -> "AppConfig":
        values = dict(DEFAULTS)
        if path is not None:
            with open(path, "r", encoding="utf-8") as fh:
                parsed = parse_config_text(fh.read())
            for key, raw in parsed.items():
                if key not in DEFAULTS:
                    raise ValueError(f"unknown config key {key!r}")
                values[key] = _coerce(key, raw)
        env = os.environ if env is None else env
        for key in DEFAULTS:
            raw = env.get(env_name(key))
            if raw is not None:
                values[key] = _coerce(key, raw)
        return cls.from_values(values)

    @classmethod
    def from_values(cls, values: dict[str, object]) -> "AppConfig":
        return cls(
            data_dir=str(values["data_dir"]),
            embedder=EmbedderConfig(
                dimension=int(values["embedder.dimension"]),
                provider=str(values["embedder.provider"]),
                endpoint=str(values["embedder.endpoint"]),
                timeout_ms=int(values["embedder.timeout_ms"]),
                retries=int(values["embedder.retries"]),
            ),
            index=IndexParams(
                m=int(values["index.m"]),
                ef_construction=int(values["index.ef_construction"]),
                ef_search=int(values["index.ef_search"]),
                seed=int(values["index.seed"]),
            ),
            fusion=FusionConfig(
                alpha=float(values["fusion.alpha"]),
                m_cand=int(values["fusion.m_cand"]),
                k=int(values["fusion.k"]),
            ),
            frames_per_video=int(values["ingest.frames_per_video"]),
            translator_kind=str(values["translator.kind"]),
            translator_endpoint=str(values["translator.endpoint"]),
            llm_backend=str(values["llm.backend"]),
            llm_endpoint=str(values["llm.endpoint"]),
            llm_script=str(values["llm.script"]),
            routing_model=str(values["models.routing"]),
            chat_model=str(values["models.chat"]),
            rerank_model=str(values["models.rerank"]),
            host=str(values["server.host"]),
            port=int(values["server.port"]),
            gain=str(values["eval.gain"]),
        )
