"""Retrieval evaluation harness and the ablation runner.

run_eval executes fused search (optionally re-ranked) for every query in a
TSV file, scores against TREC qrels, and aggregates arithmetic means over
evaluated queries. run_ablation runs the same evaluation across a grid of
pre-built index directories (index-time dimensions: frame budget,
retrieval-vector label, description on/off) with re-ranking toggled at
query time, emitting rows in a fixed column order.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field, replace

from .config import AppConfig
from .engine import SearchEngine
from .errors import EmptyCorpus, NoRelevant
from .llm import LlmClient
from .metrics import ndcg_at_k, read_qrels, read_queries, recall_at_k

ABLATION_COLUMNS = ["frames", "vector", "description", "rerank", "ndcg@10", "recall@10"]


@dataclass
class EvalRun:
    config: dict
    per_query: dict[str, dict] = field(default_factory=dict)
    skipped: list[tuple[str, str]] = field(default_factory=list)
    mean_ndcg: float = 0.0
    mean_recall: float = 0.0
    evaluated: int = 0
    wall_clock_s: float = 0.0

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "aggregate": {
                "ndcg@10": self.mean_ndcg,
                "recall@10": self.mean_recall,
                "evaluated": self.evaluated,
                "skipped": [{"query_id": qid, "reason": why} for qid, why in self.skipped],
            },
            "per_query": self.per_query,
            "wall_clock_s": self.wall_clock_s,
        }


def run_eval(
    engine: SearchEngine,
    queries_path: str,
    qrels_path: str,
    k: int = 10,
    rerank: bool = False,
    llm: LlmClient | None = None,
    ef_search: int | None = None,
    m_cand: int | None = None,
) -> EvalRun:
    queries = read_queries(queries_path)
    qrels = read_qrels(qrels_path)
    gain_kind = engine.config.gain

    run = EvalRun(
        config={
            "alpha": engine.config.fusion.alpha,
            "k": k,
            "frames_per_video": engine.config.frames_per_video,
            "rerank": rerank,
            "data_dir": engine.config.data_dir,
            "gain": gain_kind,
            "embedder_provider": engine.config.embedder.provider,
        }
    )
    start = time.perf_counter()
    rerank_with = None
    if rerank:
        if llm is None:
            raise ValueError("rerank=True requires an llm")
        rerank_with = (llm, engine.config.rerank_model)

    for query_id, text in queries:
        rels = qrels.get(query_id)
        if rels is None:
            run.skipped.append((query_id, "no qrels entry"))
            continue
        try:
            outcome = engine.search(
                text, k=k, rerank_with=rerank_with, ef_search=ef_search, m_cand=m_cand
            )
        except EmptyCorpus:
            run.skipped.append((query_id, "empty corpus"))
            continue
        ranking = [sv.video_id for sv in outcome.results]
        ndcg = ndcg_at_k(ranking, rels, k=k, kind=gain_kind)
        try:
            recall = recall_at_k(ranking, rels, k=k)
        except NoRelevant:
            run.skipped.append((query_id, "no positive grades"))
            continue
        run.per_query[query_id] = {"ndcg": ndcg, "recall": recall, "ranking": ranking}
        run.evaluated += 1

    if run.evaluated:
        run.mean_ndcg = sum(q["ndcg"] for q in run.per_query.values()) / run.evaluated
        run.mean_recall = sum(q["recall"] for q in run.per_query.values()) / run.evaluated
    run.wall_clock_s = time.perf_counter() - start
    return run


def write_eval_report(run: EvalRun, json_path: str, tsv_path: str | None = None) -> None:
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(run.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")
    if tsv_path is not None:
        with open(tsv_path, "w", encoding="utf-8") as fh:
            fh.write("ndcg@10\trecall@10\tevaluated\tskipped\n")
            fh.write(
                f"{run.mean_ndcg:.6f}\t{run.mean_recall:.6f}\t{run.evaluated}\t{len(run.skipped)}\n"
            )


@dataclass
class AblationCell:
    """One index-time configuration: a pre-built data directory."""

    frames: int
    vector_label: str
    description: bool
    data_dir: str


def run_ablation(
    cells: list[AblationCell],
    queries_path: str,
    qrels_path: str,
    base_config: AppConfig,
    llm: LlmClient | None = None,
    rerank_values: tuple[bool, ...] = (False, True),
    k: int = 10,
) -> list[dict]:
    """One row per (cell, rerank flag), in grid order."""
    rows: list[dict] = []
    for cell in cells:
        available = os.path.isdir(cell.data_dir) and os.path.isdir(
            os.path.join(cell.data_dir, "docs")
        )
        if not available:
            for rerank in rerank_values:
                rows.append(
                    {
                        "frames": cell.frames,
                        "vector": cell.vector_label,
                        "description": "on" if cell.description else "off",
                        "rerank": "on" if rerank else "off",
                        "ndcg@10": None,
                        "recall@10": None,
                        "status": "unavailable",
                    }
                )
            continue
        config = replace(base_config, data_dir=cell.data_dir, frames_per_video=cell.frames)
        engine = SearchEngine(config)
        for rerank in rerank_values:
            run = run_eval(
                engine, queries_path, qrels_path, k=k, rerank=rerank, llm=llm
            )
            rows.append(
                {
                    "frames": cell.frames,
                    "vector": cell.vector_label,
                    "description": "on" if cell.description else "off",
                    "rerank": "on" if rerank else "off",
                    "ndcg@10": run.mean_ndcg,
                    "recall@10": run.mean_recall,
                    "status": "ok",
                }
            )
    return rows


def write_ablation_report(rows: list[dict], json_path: str, tsv_path: str | None = None) -> None:
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump({"columns": ABLATION_COLUMNS, "rows": rows}, fh, sort_keys=True, indent=2)
        fh.write("\n")
    if tsv_path is not None:
        with open(tsv_path, "w", encoding="utf-8") as fh:
            fh.write("\t".join(ABLATION_COLUMNS) + "\n")
            for row in rows:
                cells = []
                for col in ABLATION_COLUMNS:
                    value = row[col]
                    if value is None:
                        cells.append("n/a")
                    elif isinstance(value, float):
                        cells.append(f"{value:.6f}")
                    else:
                        cells.append(str(value))
                fh.write("\t".join(cells) + "\n")
