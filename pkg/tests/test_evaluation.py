"""Evaluation harness tests over the planted corpus: aggregates, skip
reasons, report files, and the ablation grid."""

import json
import os
import random

import pytest

from conftest import agent_script, base_config, planted_queries
from vsearch.evaluation import (
    ABLATION_COLUMNS,
    AblationCell,
    run_ablation,
    run_eval,
    write_ablation_report,
    write_eval_report,
)
from vsearch.engine import SearchEngine


class TestRunEval:
    def test_planted_corpus_is_solved(self, planted_engine, planted):
        run = run_eval(planted_engine, planted["queries"], planted["qrels"])
        assert run.evaluated == len(planted["triples"])
        assert run.skipped == []
        assert run.mean_ndcg == pytest.approx(1.0, abs=1e-12)
        assert run.mean_recall == pytest.approx(1.0, abs=1e-12)
        for qid, _text, vid in planted["triples"]:
            assert run.per_query[qid]["ranking"][0] == vid

    def test_single_query_rank_one(self, planted_engine, planted, tmp_path):
        qid, text, vid = planted["triples"][0]
        queries = tmp_path / "one.tsv"
        queries.write_text(f"{qid}\t{text}\n")
        run = run_eval(planted_engine, str(queries), planted["qrels"])
        assert run.evaluated == 1
        assert run.per_query[qid]["ndcg"] == pytest.approx(1.0, abs=1e-12)
        assert run.per_query[qid]["recall"] == pytest.approx(1.0, abs=1e-12)

    def test_identity_rerank_matches_plain(self, planted_engine, planted):
        plain = run_eval(planted_engine, planted["queries"], planted["qrels"])
        identity = run_eval(
            planted_engine,
            planted["queries"],
            planted["qrels"],
            rerank=True,
            llm=agent_script(),
        )
        for qid in plain.per_query:
            assert identity.per_query[qid]["ranking"] == plain.per_query[qid]["ranking"]
        assert identity.mean_ndcg == plain.mean_ndcg
        assert identity.mean_recall == plain.mean_recall

    def test_rerank_requires_llm(self, planted_engine, planted):
        with pytest.raises(ValueError):
            run_eval(planted_engine, planted["queries"], planted["qrels"], rerank=True)

    def test_skip_reasons(self, planted_engine, planted, tmp_path):
        qid, text, vid = planted["triples"][0]
        queries = tmp_path / "q.tsv"
        queries.write_text(f"{qid}\t{text}\nq-none\tmystery\nq-zero\tblank\n")
        qrels = tmp_path / "qrels.txt"
        qrels.write_text(f"{qid} 0 {vid} 2\nq-zero 0 doc000 0\n")
        run = run_eval(planted_engine, str(queries), str(qrels))
        assert run.evaluated == 1
        assert ("q-none", "no qrels entry") in run.skipped
        assert ("q-zero", "no positive grades") in run.skipped

    def test_empty_corpus_skips_all(self, planted, tmp_path):
        engine = SearchEngine(base_config(str(tmp_path / "none")))
        run = run_eval(engine, planted["queries"], planted["qrels"])
        assert run.evaluated == 0
        assert all(reason == "empty corpus" for _qid, reason in run.skipped)
        assert run.mean_ndcg == 0.0 and run.mean_recall == 0.0

    def test_aggregate_is_order_invariant(self, planted_engine, planted, tmp_path):
        triples = list(planted["triples"])
        random.Random(5).shuffle(triples)
        shuffled = tmp_path / "shuffled.tsv"
        shuffled.write_text("".join(f"{qid}\t{text}\n" for qid, text, _ in triples))
        run_a = run_eval(planted_engine, planted["queries"], planted["qrels"])
        run_b = run_eval(planted_engine, str(shuffled), planted["qrels"])
        assert run_b.mean_ndcg == run_a.mean_ndcg
        assert run_b.mean_recall == run_a.mean_recall
        assert run_b.per_query == run_a.per_query

    def test_report_files(self, planted_engine, planted, tmp_path):
        run = run_eval(planted_engine, planted["queries"], planted["qrels"])
        json_path = str(tmp_path / "report.json")
        tsv_path = str(tmp_path / "report.tsv")
        write_eval_report(run, json_path, tsv_path)
        report = json.load(open(json_path))
        assert report["aggregate"]["ndcg@10"] == run.mean_ndcg
        assert report["aggregate"]["evaluated"] == run.evaluated
        assert set(report["per_query"]) == set(run.per_query)
        assert report["config"]["rerank"] is False
        lines = open(tsv_path).read().splitlines()
        assert lines[0] == "ndcg@10\trecall@10\tevaluated\tskipped"
        assert lines[1] == (
            f"{run.mean_ndcg:.6f}\t{run.mean_recall:.6f}\t{run.evaluated}\t0"
        )


class TestAblation:
    def test_grid_matches_independent_eval(self, planted, tmp_path):
        cells = [
            AblationCell(
                frames=48, vector_label="dual", description=True, data_dir=planted["data_dir"]
            )
        ]
        rows = run_ablation(
            cells,
            planted["queries"],
            planted["qrels"],
            base_config(planted["data_dir"]),
            llm=agent_script(),
        )
        assert len(rows) == 2
        assert [row["rerank"] for row in rows] == ["off", "on"]
        engine = SearchEngine(base_config(planted["data_dir"]))
        plain = run_eval(engine, planted["queries"], planted["qrels"])
        reranked = run_eval(
            engine, planted["queries"], planted["qrels"], rerank=True, llm=agent_script()
        )
        assert rows[0]["ndcg@10"] == plain.mean_ndcg
        assert rows[0]["recall@10"] == plain.mean_recall
        assert rows[1]["ndcg@10"] == reranked.mean_ndcg
        assert rows[1]["recall@10"] == reranked.mean_recall
        assert all(row["status"] == "ok" for row in rows)

    def test_unavailable_cell(self, planted, tmp_path):
        cells = [
            AblationCell(
                frames=8,
                vector_label="vision-only",
                description=False,
                data_dir=str(tmp_path / "missing"),
            )
        ]
        rows = run_ablation(
            cells, planted["queries"], planted["qrels"], base_config(planted["data_dir"])
        , rerank_values=(False,))
        assert rows == [
            {
                "frames": 8,
                "vector": "vision-only",
                "description": "off",
                "rerank": "off",
                "ndcg@10": None,
                "recall@10": None,
                "status": "unavailable",
            }
        ]

    def test_report_shape(self, planted, tmp_path):
        cells = [
            AblationCell(48, "dual", True, planted["data_dir"]),
            AblationCell(8, "audio-only", False, str(tmp_path / "absent")),
        ]
        rows = run_ablation(
            cells,
            planted["queries"],
            planted["qrels"],
            base_config(planted["data_dir"]),
            llm=agent_script(),
        )
        json_path = str(tmp_path / "ablation.json")
        tsv_path = str(tmp_path / "ablation.tsv")
        write_ablation_report(rows, json_path, tsv_path)
        report = json.load(open(json_path))
        assert report["columns"] == ABLATION_COLUMNS
        assert len(report["rows"]) == 4
        lines = open(tsv_path).read().splitlines()
        assert lines[0] == "\t".join(ABLATION_COLUMNS)
        assert len(lines) == 5
        # available rows carry formatted floats, unavailable rows n/a
        assert lines[1].split("\t")[4] == f"{rows[0]['ndcg@10']:.6f}"
        assert lines[3].split("\t")[4] == "n/a"
        assert lines[3].split("\t")[0] == "8"
