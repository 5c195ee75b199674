import json

import pytest

from hilmt.cli import main
from hilmt.pipeline import (
    STRATEGY_COMPARE,
    STRATEGY_DRAFT,
    PipelineConfig,
    collect_feedback,
    translate_corpus,
)
from hilmt.retrieval import METHOD_BM25_RERANK, RetrievalConfig
from hilmt.store import DemoStore

from helpers import ScriptedBackend, recording_over, seed_store


def cli_translate_config(shots=3):
    """The exact pipeline configuration the translate subcommand builds."""
    return PipelineConfig(
        retrieval=RetrievalConfig(
            method=METHOD_BM25_RERANK, pool_size=200, ngram_order=4, shots=shots
        ),
        parallelism=4,
    )


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_no_arguments_is_a_usage_error(capsys):
    assert main([]) == 1
    assert "error" in capsys.readouterr().err


def test_unknown_subcommand_is_a_usage_error(capsys):
    assert main(["frobnicate"]) == 1


def test_evaluate_prints_report_and_summary(tmp_path, capsys):
    hyp = write(tmp_path / "hyp.txt", "the cat sat\nhello world\n")
    ref = write(tmp_path / "ref.txt", "the cat sat\nhello world\n")
    assert main(["evaluate", "--hyp", hyp, "--ref", ref]) == 0
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    assert lines[-1] == "hilmt evaluate ok sentences=2 bleu=100.0000 ter=0.0000"
    report = json.loads("\n".join(lines[:-1]))
    assert report["sentences"] == 2
    assert report["per_sentence"][0]["ter"] == 0.0


def test_evaluate_writes_report_file(tmp_path, capsys):
    hyp = write(tmp_path / "hyp.txt", "a b c\n")
    ref = write(tmp_path / "ref.txt", "a b c\n")
    report_path = tmp_path / "report.json"
    assert main(["evaluate", "--hyp", hyp, "--ref", ref, "--report", str(report_path)]) == 0
    out = capsys.readouterr().out.strip()
    assert out.endswith(f"report={report_path}")
    assert json.loads(report_path.read_text(encoding="utf-8"))["bleu"] == 100.0


def test_evaluate_length_mismatch_is_a_runtime_failure(tmp_path, capsys):
    hyp = write(tmp_path / "hyp.txt", "a\nb\n")
    ref = write(tmp_path / "ref.txt", "a\n")
    assert main(["evaluate", "--hyp", hyp, "--ref", ref]) == 2
    assert "hilmt evaluate: error:" in capsys.readouterr().err


def test_evaluate_missing_file_is_a_runtime_failure(tmp_path, capsys):
    ref = write(tmp_path / "ref.txt", "a\n")
    assert main(["evaluate", "--hyp", str(tmp_path / "nope.txt"), "--ref", ref]) == 2


def test_analyze_buckets_and_pos_tags(tmp_path, capsys):
    hyp = write(tmp_path / "hyp.txt", "the cat sat\n")
    ref = write(tmp_path / "ref.txt", "the cat sat\n")
    tags = write(tmp_path / "tags.tsv", "the\tDT\ncat\tNN\nsat\tVB\n")
    report_path = tmp_path / "r.json"
    code = main(
        ["analyze", "--hyp", hyp, "--ref", ref, "--pos-tags", tags, "--report", str(report_path)]
    )
    assert code == 0
    summary = capsys.readouterr().out.strip()
    assert "hilmt analyze ok sentences=1 buckets=1 pos_tags=3" in summary
    report = json.loads(report_path.read_text(encoding="utf-8"))
    assert report["length_buckets"]["<10"]["sentences"] == 1
    assert report["pos_accuracy"] == {"DT": 1.0, "NN": 1.0, "VB": 1.0}


def test_analyze_custom_buckets(tmp_path, capsys):
    hyp = write(tmp_path / "hyp.txt", "a b c d e f\n")
    ref = write(tmp_path / "ref.txt", "a b c d e f\n")
    assert main(["analyze", "--hyp", hyp, "--ref", ref, "--buckets", "5,15"]) == 0
    out = capsys.readouterr().out
    assert '"[5,15)"' in out


def test_analyze_malformed_buckets_is_a_runtime_failure(tmp_path, capsys):
    hyp = write(tmp_path / "hyp.txt", "a\n")
    ref = write(tmp_path / "ref.txt", "a\n")
    assert main(["analyze", "--hyp", hyp, "--ref", ref, "--buckets", "ten,20"]) == 2


def test_collect_replay_round_trip(tmp_path, capsys):
    corpus = write(tmp_path / "corpus.tsv", "quelle eins\tref one\nquelle zwei\tref two\n")
    fixtures = tmp_path / "fx.jsonl"
    # record the drafts the pipeline will request, against a throwaway store
    scratch = DemoStore.open(str(tmp_path / "scratch.jsonl"))
    collect_feedback(
        [("quelle eins", "ref one"), ("quelle zwei", "ref two")],
        "it",
        scratch,
        recording_over(ScriptedBackend(), fixtures),
        PipelineConfig(),
    )

    store_path = tmp_path / "store.jsonl"
    code = main(
        ["collect", "--domain", "it", "--corpus", corpus, "--store", str(store_path),
         "--backend", "replay", "--fixtures", str(fixtures)]
    )
    assert code == 0
    assert capsys.readouterr().out.strip() == (
        f"hilmt collect ok appended=2 skipped=0 store={store_path}"
    )
    store = DemoStore.load(str(store_path))
    assert len(store) == 2
    assert store.records()[0].hypothesis == "mt quelle eins"

    # a second identical run skips everything as duplicate content
    assert main(
        ["collect", "--domain", "it", "--corpus", corpus, "--store", str(store_path),
         "--backend", "replay", "--fixtures", str(fixtures)]
    ) == 0
    assert "appended=0 skipped=2" in capsys.readouterr().out


def test_collect_requires_reference_column(tmp_path, capsys):
    corpus = write(tmp_path / "corpus.tsv", "only source no tab\n")
    fixtures = write(tmp_path / "fx.jsonl", "")
    code = main(
        ["collect", "--domain", "it", "--corpus", corpus,
         "--store", str(tmp_path / "s.jsonl"), "--backend", "replay", "--fixtures", fixtures]
    )
    assert code == 2
    assert "expected source TAB reference" in capsys.readouterr().err


def test_replay_without_fixtures_flag_is_a_usage_error(tmp_path, capsys):
    corpus = write(tmp_path / "corpus.tsv", "a\tb\n")
    code = main(
        ["collect", "--domain", "it", "--corpus", corpus,
         "--store", str(tmp_path / "s.jsonl"), "--backend", "replay"]
    )
    assert code == 1
    assert "--fixtures is required" in capsys.readouterr().err


def test_replay_with_missing_fixture_file_is_a_runtime_failure(tmp_path, capsys):
    corpus = write(tmp_path / "corpus.tsv", "a\tb\n")
    code = main(
        ["collect", "--domain", "it", "--corpus", corpus, "--store", str(tmp_path / "s.jsonl"),
         "--backend", "replay", "--fixtures", str(tmp_path / "missing.jsonl")]
    )
    assert code == 2
    assert "fixture file not found" in capsys.readouterr().err


def test_translate_compare_replay(tmp_path, capsys):
    store = seed_store(tmp_path / "store.jsonl", count=4)
    sources = ["quelle satz 0 mit wort0", "ganz neuer satz"]
    fixtures = tmp_path / "fx.jsonl"
    translate_corpus(
        sources, "it", store,
        recording_over(ScriptedBackend(), fixtures),
        cli_translate_config(), STRATEGY_COMPARE,
    )

    src = write(tmp_path / "src.tsv", "\n".join(sources) + "\n")
    out_path = tmp_path / "out.jsonl"
    code = main(
        ["translate", "--input", src, "--store", str(store.path), "--domain", "it",
         "--strategy", "compare", "--out", str(out_path),
         "--backend", "replay", "--fixtures", str(fixtures)]
    )
    assert code == 0
    assert capsys.readouterr().out.strip() == (
        f"hilmt translate ok records=2 invalid=0 out={out_path}"
    )
    records = [json.loads(line) for line in out_path.read_text(encoding="utf-8").splitlines()]
    assert len(records) == 2
    for record in records:
        assert record["strategy"] == "compare_hil"
        assert record["final"] in (record["draft"], record["refined"])
        assert record["comparator_choice"] in ("draft", "refined")
        assert record["validity"]["ok"] is True


def test_translate_draft_needs_no_store(tmp_path, capsys):
    fixtures = tmp_path / "fx.jsonl"
    translate_corpus(
        ["hallo welt schoener tag"], "it", None,
        recording_over(ScriptedBackend(), fixtures),
        cli_translate_config(), STRATEGY_DRAFT,
    )
    src = write(tmp_path / "src.tsv", "hallo welt schoener tag\n")
    out_path = tmp_path / "out.jsonl"
    code = main(
        ["translate", "--input", src, "--domain", "it", "--strategy", "draft",
         "--out", str(out_path), "--backend", "replay", "--fixtures", str(fixtures)]
    )
    assert code == 0
    record = json.loads(out_path.read_text(encoding="utf-8").splitlines()[0])
    assert record["draft"] == "mt hallo welt schoener tag"
    assert record["refined"] is None


def test_translate_hil_requires_store(tmp_path, capsys):
    src = write(tmp_path / "src.tsv", "hallo\n")
    fixtures = write(tmp_path / "fx.jsonl", "")
    code = main(
        ["translate", "--input", src, "--domain", "it", "--strategy", "hil",
         "--out", str(tmp_path / "o.jsonl"), "--backend", "replay", "--fixtures", fixtures]
    )
    assert code == 1
    assert "--store is required" in capsys.readouterr().err


def test_translate_shots_out_of_range_is_a_usage_error(tmp_path, capsys):
    src = write(tmp_path / "src.tsv", "hallo\n")
    fixtures = write(tmp_path / "fx.jsonl", "")
    for shots in ("0", "4"):
        code = main(
            ["translate", "--input", src, "--domain", "it", "--strategy", "draft",
             "--shots", shots, "--out", str(tmp_path / "o.jsonl"),
             "--backend", "replay", "--fixtures", fixtures]
        )
        assert code == 1
    assert "--shots must be between 1 and 3" in capsys.readouterr().err


def test_translate_fixture_miss_still_writes_failed_records(tmp_path, capsys):
    # per-sentence gateway failures are recorded, not fatal
    src = write(tmp_path / "src.tsv", "unbekannter satz\n")
    fixtures = write(tmp_path / "fx.jsonl", "")
    out_path = tmp_path / "out.jsonl"
    code = main(
        ["translate", "--input", src, "--domain", "it", "--strategy", "draft",
         "--out", str(out_path), "--backend", "replay", "--fixtures", fixtures]
    )
    assert code == 0
    assert "records=1 invalid=1" in capsys.readouterr().out
    record = json.loads(out_path.read_text(encoding="utf-8").splitlines()[0])
    assert record["final"] == ""
    assert record["validity"]["ok"] is False


def test_translate_bad_strategy_flag_is_a_usage_error(tmp_path, capsys):
    src = write(tmp_path / "src.tsv", "x\n")
    code = main(
        ["translate", "--input", src, "--domain", "it", "--strategy", "telepathy",
         "--out", str(tmp_path / "o.jsonl")]
    )
    assert code == 1


def test_serve_requires_store(capsys):
    assert main(["serve"]) == 1
