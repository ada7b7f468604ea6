"""Command-line interface.

Subcommands: index, search, eval, ablate, merge, serve. Exit codes: 0 on
success, 1 on runtime errors (printed to stderr), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import AppConfig
from .engine import SearchEngine
from .errors import EmptyCorpus, VSearchError
from .evaluation import AblationCell, run_ablation, run_eval, write_ablation_report, write_eval_report
from .llm import FailingLlm


def _load_config(args: argparse.Namespace) -> AppConfig:
    config = AppConfig.load(getattr(args, "config", None))
    if getattr(args, "data", None):
        from dataclasses import replace

        config = replace(config, data_dir=args.data)
    return config


def _engine_llm(engine: SearchEngine):
    try:
        return engine.make_llm()
    except (VSearchError, ValueError, OSError):
        return FailingLlm()


def _cmd_index(args: argparse.Namespace) -> int:
    config = _load_config(args)
    engine = SearchEngine(config)
    report = engine.ingest_manifest(args.manifest)
    print(f"ingested {len(report.ingested)} records, skipped {len(report.skipped)}")
    for tag, reason in report.skipped:
        print(f"skipped {tag}: {reason}", file=sys.stderr)
    return 0


def _cmd_search(args: argparse.Namespace) -> int:
    config = _load_config(args)
    engine = SearchEngine(config)
    rerank_with = None
    if args.rerank:
        rerank_with = (_engine_llm(engine), config.rerank_model)
    try:
        outcome = engine.search(args.query, k=args.k, alpha=args.alpha, rerank_with=rerank_with)
    except EmptyCorpus:
        print("error: empty corpus", file=sys.stderr)
        return 1
    print("rank\tvideo_id\tfused\tvision\taudio")
    for sv in outcome.results:
        print(f"{sv.rank}\t{sv.video_id}\t{sv.fused_score!r}\t{sv.vision_score!r}\t{sv.audio_score!r}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    config = _load_config(args)
    engine = SearchEngine(config)
    llm = _engine_llm(engine) if args.rerank else None
    run = run_eval(
        engine, args.queries, args.qrels, k=args.k, rerank=args.rerank, llm=llm
    )
    write_eval_report(run, args.out_json, args.out_tsv)
    print(
        f"ndcg@10 {run.mean_ndcg:.6f} recall@10 {run.mean_recall:.6f} "
        f"evaluated {run.evaluated} skipped {len(run.skipped)}"
    )
    return 0


def _cmd_ablate(args: argparse.Namespace) -> int:
    config = _load_config(args)
    with open(args.grid, "r", encoding="utf-8") as fh:
        grid = json.load(fh)
    cells = [
        AblationCell(
            frames=int(cell["frames"]),
            vector_label=str(cell["vector"]),
            description=bool(cell["description"]),
            data_dir=str(cell["data_dir"]),
        )
        for cell in grid["cells"]
    ]
    rerank_values = tuple(bool(x) for x in grid.get("rerank", [False, True]))
    llm = None
    if any(rerank_values):
        llm = _engine_llm(SearchEngine(config))
    rows = run_ablation(
        cells, args.queries, args.qrels, config, llm=llm, rerank_values=rerank_values, k=args.k
    )
    write_ablation_report(rows, args.out_json, args.out_tsv)
    print(f"wrote {len(rows)} ablation rows")
    return 0


def _cmd_merge(args: argparse.Namespace) -> int:
    from .archives import merge_stream

    norms = merge_stream(
        args.base, args.plus, args.minus, args.out, dry_run=args.dry_run
    )
    for name, norm in norms:
        print(f"{name}\t{norm!r}")
    if not args.dry_run:
        print(f"wrote {args.out}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from dataclasses import replace

    from .server import serve

    config = _load_config(args)
    if args.host:
        config = replace(config, host=args.host)
    if args.port is not None:
        config = replace(config, port=args.port)
    serve(config)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vsearch", description="multimodal video search")
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="ingest a JSONL manifest")
    p_index.add_argument("--manifest", required=True)
    p_index.add_argument("--data", help="data directory (overrides config)")
    p_index.add_argument("--config")
    p_index.set_defaults(func=_cmd_index)

    p_search = sub.add_parser("search", help="fused search, TSV to stdout")
    p_search.add_argument("query")
    p_search.add_argument("--k", type=int, default=10)
    p_search.add_argument("--alpha", type=float, default=None)
    p_search.add_argument("--rerank", action="store_true")
    p_search.add_argument("--data")
    p_search.add_argument("--config")
    p_search.set_defaults(func=_cmd_search)

    p_eval = sub.add_parser("eval", help="run retrieval evaluation")
    p_eval.add_argument("--queries", required=True)
    p_eval.add_argument("--qrels", required=True)
    p_eval.add_argument("--out-json", required=True)
    p_eval.add_argument("--out-tsv")
    p_eval.add_argument("--k", type=int, default=10)
    p_eval.add_argument("--rerank", action="store_true")
    p_eval.add_argument("--data")
    p_eval.add_argument("--config")
    p_eval.set_defaults(func=_cmd_eval)

    p_ablate = sub.add_parser("ablate", help="run the ablation grid")
    p_ablate.add_argument("--grid", required=True, help="JSON grid file")
    p_ablate.add_argument("--queries", required=True)
    p_ablate.add_argument("--qrels", required=True)
    p_ablate.add_argument("--out-json", required=True)
    p_ablate.add_argument("--out-tsv")
    p_ablate.add_argument("--k", type=int, default=10)
    p_ablate.add_argument("--config")
    p_ablate.set_defaults(func=_cmd_ablate)

    p_merge = sub.add_parser("merge", help="apply a task vector to a base archive")
    p_merge.add_argument("--base", required=True)
    p_merge.add_argument("--plus", required=True)
    p_merge.add_argument("--minus", required=True)
    p_merge.add_argument("--out")
    p_merge.add_argument("--dry-run", action="store_true")
    p_merge.set_defaults(func=_cmd_merge)

    p_serve = sub.add_parser("serve", help="run the HTTP gateway")
    p_serve.add_argument("--host", default="")
    p_serve.add_argument("--port", type=int, default=None)
    p_serve.add_argument("--data")
    p_serve.add_argument("--config")
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "merge" and not args.dry_run and not args.out:
        parser.error("merge requires --out unless --dry-run")
    try:
        return args.func(args)
    except VSearchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
