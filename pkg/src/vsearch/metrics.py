"""Ranking metrics and the qrels/queries file formats.

nDCG@k uses exponential gain 2^r - 1 by default (linear gain is a config
choice recorded in reports). Recall@k counts relevant ids in the top k;
queries with no positive grade are skipped, not scored as zero.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

from .errors import NoRelevant


def gain(grade: int, kind: str = "exp") -> float:
    if kind == "exp":
        return float(2**grade - 1)
    if kind == "linear":
        return float(grade)
    raise ValueError(f"unknown gain kind {kind!r}")


def dcg(grades: Sequence[int], k: int, kind: str = "exp") -> float:
    total = 0.0
    for i, grade in enumerate(grades[:k], start=1):
        total += gain(grade, kind) / math.log2(i + 1)
    return total


def ndcg_at_k(
    ranking: Sequence[str], rels: Mapping[str, int], k: int = 10, kind: str = "exp"
) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    got = dcg([rels.get(vid, 0) for vid in ranking], k, kind)
    ideal_grades = sorted(rels.values(), reverse=True)
    ideal = dcg(ideal_grades, k, kind)
    if ideal == 0.0:
        return 0.0
    return got / ideal


def recall_at_k(ranking: Sequence[str], rels: Mapping[str, int], k: int = 10) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    relevant = {vid for vid, grade in rels.items() if grade > 0}
    if not relevant:
        raise NoRelevant("query has no positive grades")
    hits = sum(1 for vid in ranking[:k] if vid in relevant)
    return hits / len(relevant)


def read_qrels(path: str) -> dict[str, dict[str, int]]:
    """TREC qrels: one "query_id 0 video_id grade" per line."""
    qrels: dict[str, dict[str, int]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ValueError(f"qrels line {lineno}: expected 4 fields, got {len(parts)}")
            query_id, _unused, video_id, grade_text = parts
            grade = int(grade_text)
            if grade < 0:
                raise ValueError(f"qrels line {lineno}: negative grade")
            qrels.setdefault(query_id, {})[video_id] = grade
    return qrels


def read_queries(path: str) -> list[tuple[str, str]]:
    """Queries TSV: "query_id<TAB>query_text" per line, order preserved."""
    queries: list[tuple[str, str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if "\t" not in line:
                raise ValueError(f"queries line {lineno}: expected query_id<TAB>text")
            query_id, text = line.split("\t", 1)
            queries.append((query_id, text))
    return queries
