"""Command-line entry points: collect, translate, evaluate, analyze, serve.

Exit codes: 0 success, 1 usage error, 2 runtime failure. Every successful run
prints one machine-readable summary line `hilmt <subcommand> ok key=value...`.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .gateway import (
    BACKEND_LIVE,
    BACKEND_REPLAY,
    FixtureMissError,
    GatewayConfig,
    GatewayError,
    create_gateway,
)
from .metrics import (
    DEFAULT_BUCKET_EDGES,
    analyze_corpus,
    evaluate_corpus,
    read_tagged_file,
)
from .pipeline import (
    STRATEGY_COMPARE,
    STRATEGY_DRAFT,
    STRATEGY_HIL,
    PipelineConfig,
    collect_feedback,
    subsample,
    translate_corpus,
)
from .retrieval import METHOD_BM25, METHOD_BM25_RERANK, RetrievalConfig
from .store import DemoStore

STRATEGY_BY_FLAG = {"draft": STRATEGY_DRAFT, "hil": STRATEGY_HIL, "compare": STRATEGY_COMPARE}
RETRIEVER_BY_FLAG = {"bm25": METHOD_BM25, "rerank": METHOD_BM25_RERANK}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; the contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _read_tsv(path: str, require_reference: bool) -> list[tuple[str, str]]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            columns = line.split("\t")
            if require_reference and len(columns) < 2:
                raise ValueError(f"{path}: line {lineno}: expected source TAB reference")
            pairs.append((columns[0], columns[1] if len(columns) > 1 else ""))
    return pairs


def _read_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return fh.read().splitlines()


def _make_gateway(args):
    if args.backend == BACKEND_REPLAY:
        if not args.fixtures:
            raise UsageError("--fixtures is required with --backend replay")
        if not os.path.exists(args.fixtures):
            raise FileNotFoundError(f"fixture file not found: {args.fixtures}")
        return create_gateway(GatewayConfig(backend=BACKEND_REPLAY, fixture_path=args.fixtures))
    return create_gateway(GatewayConfig(backend=BACKEND_LIVE))


def _write_report(report: dict, path: str | None) -> str:
    text = json.dumps(report, ensure_ascii=False, indent=2)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        return f" report={path}"
    print(text)
    return ""


def _cmd_collect(args) -> int:
    corpus = _read_tsv(args.corpus, require_reference=True)
    if args.sample is not None:
        corpus = subsample(corpus, args.sample, args.seed)
    store = DemoStore.open(args.store)
    gateway = _make_gateway(args)
    report = collect_feedback(corpus, args.domain, store, gateway, PipelineConfig())
    print(f"hilmt collect ok appended={report['appended']} skipped={report['skipped']} store={args.store}")
    return 0


def _cmd_translate(args) -> int:
    if not 1 <= args.shots <= 3:
        raise UsageError("--shots must be between 1 and 3")
    strategy = STRATEGY_BY_FLAG[args.strategy]
    store = None
    if strategy != STRATEGY_DRAFT:
        if not args.store:
            raise UsageError(f"--store is required for strategy {args.strategy}")
        store = DemoStore.load(args.store)
    sources = [source for source, _ in _read_tsv(args.input, require_reference=False)]
    gateway = _make_gateway(args)
    config = PipelineConfig(
        retrieval=RetrievalConfig(
            method=RETRIEVER_BY_FLAG[args.retriever],
            pool_size=args.pool,
            ngram_order=args.ngram,
            shots=args.shots,
        ),
        parallelism=args.parallelism,
    )
    records = translate_corpus(sources, args.domain, store, gateway, config, strategy)
    with open(args.out, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record.to_json_line() + "\n")
    invalid = sum(1 for record in records if not record.validity["ok"])
    print(f"hilmt translate ok records={len(records)} invalid={invalid} out={args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    hyps = _read_lines(args.hyp)
    refs = _read_lines(args.ref)
    report = evaluate_corpus(hyps, refs)
    suffix = _write_report(report.to_dict(), args.report)
    print(
        f"hilmt evaluate ok sentences={report.sentences} "
        f"bleu={report.bleu:.4f} ter={report.ter:.4f}{suffix}"
    )
    return 0


def _cmd_analyze(args) -> int:
    hyps = _read_lines(args.hyp)
    refs = _read_lines(args.ref)
    edges = tuple(int(edge) for edge in args.buckets.split(","))
    tagged = read_tagged_file(args.pos_tags) if args.pos_tags else None
    report = analyze_corpus(hyps, refs, edges, tagged)
    suffix = _write_report(report.to_dict(), args.report)
    pos_count = len(report.pos_accuracy) if report.pos_accuracy else 0
    print(
        f"hilmt analyze ok sentences={report.sentences} "
        f"buckets={len(report.length_buckets)} pos_tags={pos_count}{suffix}"
    )
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    store = DemoStore.open(args.store)
    gateway = _make_gateway(args)
    app = create_app(store, gateway)
    print(f"hilmt serve ok port={args.port} store={args.store}")
    uvicorn.run(app, host="127.0.0.1", port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hilmt", description="Human-in-the-loop MT refinement toolkit")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    collect = commands.add_parser("collect", help="draft-translate a parallel corpus and store simulated feedback")
    collect.add_argument("--domain", required=True, help="domain tag for the stored records")
    collect.add_argument("--corpus", required=True, help="TSV file: source TAB reference")
    collect.add_argument("--store", required=True, help="demonstration store (JSONL), created if missing")
    collect.add_argument("--backend", choices=[BACKEND_LIVE, BACKEND_REPLAY], default=BACKEND_LIVE)
    collect.add_argument("--fixtures", help="replay fixture file (required with --backend replay)")
    collect.add_argument("--sample", type=int, help="subsample the corpus to this many pairs")
    collect.add_argument("--seed", type=int, default=13, help="seed for --sample")
    collect.set_defaults(handler=_cmd_collect)

    translate = commands.add_parser("translate", help="translate sources with draft/refine/compare strategies")
    translate.add_argument("--input", required=True, help="TSV or plain file; first column is the source")
    translate.add_argument("--store", help="demonstration store (required for hil/compare)")
    translate.add_argument("--domain", required=True)
    translate.add_argument("--strategy", choices=sorted(STRATEGY_BY_FLAG), default="compare")
    translate.add_argument("--shots", type=int, default=3, help="demonstrations per sentence (1..3)")
    translate.add_argument("--retriever", choices=sorted(RETRIEVER_BY_FLAG), default="rerank")
    translate.add_argument("--pool", type=int, default=200, help="BM25 candidate pool for the rerank")
    translate.add_argument("--ngram", type=int, default=4, help="rerank n-gram order")
    translate.add_argument("--out", required=True, help="output JSONL of translation records")
    translate.add_argument("--backend", choices=[BACKEND_LIVE, BACKEND_REPLAY], default=BACKEND_LIVE)
    translate.add_argument("--fixtures", help="replay fixture file (required with --backend replay)")
    translate.add_argument("--parallelism", type=int, default=4)
    translate.set_defaults(handler=_cmd_translate)

    evaluate = commands.add_parser("evaluate", help="score hypotheses against references (BLEU, TER)")
    evaluate.add_argument("--hyp", required=True, help="hypothesis file, one sentence per line")
    evaluate.add_argument("--ref", required=True, help="reference file, one sentence per line")
    evaluate.add_argument("--report", help="write the JSON report here (default: stdout)")
    evaluate.set_defaults(handler=_cmd_evaluate)

    analyze = commands.add_parser("analyze", help="length-bucket BLEU and per-POS word accuracy")
    analyze.add_argument("--hyp", required=True)
    analyze.add_argument("--ref", required=True)
    analyze.add_argument("--pos-tags", help="reference POS tag file (token TAB tag, blank line between sentences)")
    analyze.add_argument("--buckets", default=",".join(str(edge) for edge in DEFAULT_BUCKET_EDGES),
                         help="comma-separated length bucket edges")
    analyze.add_argument("--report", help="write the JSON report here (default: stdout)")
    analyze.set_defaults(handler=_cmd_analyze)

    serve = commands.add_parser("serve", help="run the review service")
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--store", required=True)
    serve.add_argument("--backend", choices=[BACKEND_LIVE, BACKEND_REPLAY], default=BACKEND_LIVE)
    serve.add_argument("--fixtures", help="replay fixture file (required with --backend replay)")
    serve.set_defaults(handler=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"hilmt {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, GatewayError, FixtureMissError) as exc:
        print(f"hilmt {args.command}: error: {exc}", file=sys.stderr)
        return 2


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
