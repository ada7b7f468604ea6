"""Shared fixtures: the planted-relevance corpus, scripted LLM backends,
deterministic clocks, and engine builders."""

from __future__ import annotations

import base64
import json
import os
import sys
from dataclasses import replace

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from vsearch import AppConfig, ScriptedLlm, SearchEngine

FIXTURES_DIR = os.path.join(os.path.dirname(__file__), "fixtures")
GOLDENS_DIR = os.path.join(FIXTURES_DIR, "goldens")


@pytest.fixture(scope="session")
def derived_fixtures() -> dict:
    with open(os.path.join(FIXTURES_DIR, "derived_fixtures.json"), "r", encoding="utf-8") as fh:
        return json.load(fh)


def base_config(data_dir: str, **overrides) -> AppConfig:
    config = AppConfig.load(env={})
    return replace(config, data_dir=data_dir, translator_kind="reference", **overrides)


class CounterClock:
    """Monotone fake clock for byte-stable event logs."""

    def __init__(self, start: float = 1000.0, step: float = 1.0) -> None:
        self.now = start
        self.step = step

    def __call__(self) -> float:
        value = self.now
        self.now += self.step
        return value


@pytest.fixture()
def fixed_clock() -> CounterClock:
    return CounterClock()


def sequential_ids(prefix: str = "s"):
    counter = iter(range(100000))
    return lambda: f"{prefix}{next(counter):04d}"


# -- planted corpus ----------------------------------------------------------

N_PLANTED = 20
N_RECORDS = 200
_LANGS = ["en", "es", "ko", "de", "en"]


def _foreign(text: str, lang: str) -> str:
    if lang.startswith("en"):
        return text
    return " ".join(f"{lang}_{tok}" for tok in text.split())


def planted_queries() -> list[tuple[str, str, str]]:
    """(query_id, query text, relevant video id) triples."""
    out = []
    for i in range(N_PLANTED):
        text = f"event{i}x scene{i}y clip{i}z topic{i}w"
        out.append((f"q{i:02d}", text, f"rel{i:03d}"))
    return out


def build_planted_manifest(path: str, rng: np.random.Generator | None = None) -> None:
    """200 records: 20 planted relevant docs (audio-only, mixed languages,
    transcription translating to exactly the query tokens), plus distractors
    with both, audio-only, and vision-only modalities."""
    rng = rng or np.random.default_rng(20240817)
    records = []
    for i, (qid, text, vid) in enumerate(planted_queries()):
        lang = _LANGS[i % len(_LANGS)]
        records.append(
            {
                "video_id": vid,
                "frames": [],
                "transcription": _foreign(text, lang),
                "description": "",
                "language": lang,
            }
        )
    for j in range(N_RECORDS - N_PLANTED):
        kind = j % 3  # 0 both, 1 audio-only, 2 vision-only
        lang = _LANGS[(j + 1) % len(_LANGS)]
        tokens = " ".join(
            f"word{int(x)}" for x in rng.integers(1000, 9999, size=int(rng.integers(2, 6)))
        )
        frames = [
            "base64:" + base64.b64encode(rng.bytes(64)).decode("ascii")
            for _ in range(int(rng.integers(2, 5)))
        ]
        record = {
            "video_id": f"doc{j:03d}",
            "frames": [] if kind == 1 else frames,
            "transcription": "" if kind == 2 else _foreign(tokens, lang),
            "description": "" if kind == 2 else f"footage about word{int(rng.integers(1000, 9999))}",
            "language": lang,
        }
        records.append(record)
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def write_planted_eval_files(queries_path: str, qrels_path: str) -> None:
    with open(queries_path, "w", encoding="utf-8") as fh:
        for qid, text, _vid in planted_queries():
            fh.write(f"{qid}\t{text}\n")
    with open(qrels_path, "w", encoding="utf-8") as fh:
        for qid, _text, vid in planted_queries():
            fh.write(f"{qid} 0 {vid} 2\n")


@pytest.fixture(scope="session")
def planted(tmp_path_factory) -> dict:
    """Built-once planted corpus: manifest, ingested data dir, eval files."""
    root = tmp_path_factory.mktemp("planted")
    manifest = str(root / "manifest.jsonl")
    data_dir = str(root / "data")
    queries = str(root / "queries.tsv")
    qrels = str(root / "qrels.txt")
    build_planted_manifest(manifest)
    write_planted_eval_files(queries, qrels)
    engine = SearchEngine(base_config(data_dir))
    report = engine.ingest_manifest(manifest)
    assert len(report.ingested) == N_RECORDS, report.skipped
    return {
        "manifest": manifest,
        "data_dir": data_dir,
        "queries": queries,
        "qrels": qrels,
        "triples": planted_queries(),
    }


@pytest.fixture()
def planted_engine(planted) -> SearchEngine:
    return SearchEngine(base_config(planted["data_dir"]))


# -- scripted LLM help -------------------------------------------------------

def agent_script(extra_rules: list[dict] | None = None) -> ScriptedLlm:
    """Baseline behavior: route on leading verb, echo-style summaries and
    chat answers. Tests layer extra rules in front."""
    rules = list(extra_rules or [])
    rules += [
        {"pattern": r"routing agent.*User message: (find|search)", "response": "SEARCH"},
        {"pattern": r"routing agent", "response": "CHAT"},
        {"pattern": r"^Summarize this video", "response": "One-line summary."},
        {"pattern": r"^You rank video search candidates", "response": "[]"},
        {"pattern": r"^You are a video assistant", "response": "A grounded answer."},
    ]
    return ScriptedLlm(rules=rules)
