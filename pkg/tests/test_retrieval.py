import math
import random

import pytest

from hilmt.retrieval import (
    METHOD_BM25,
    METHOD_BM25_RERANK,
    RetrievalConfig,
    bm25_score,
    build_index,
    recall_score,
    retrieve,
)


def make_index(docs):
    return build_index(list(docs.items()))


def reference_bm25(docs, query_tokens, doc_id, k1=1.2, b=0.75):
    """Straight transcription of the Okapi formula, term by term."""
    n = len(docs)
    toks = {d: t.lower().split() for d, t in docs.items()}
    avg = sum(len(t) for t in toks.values()) / n
    score = 0.0
    for term in query_tokens:
        freq = toks[doc_id].count(term)
        if not freq:
            continue
        df = sum(1 for t in toks.values() if term in t)
        idf = math.log((n - df + 0.5) / (df + 0.5) + 1.0)
        score += idf * freq * (k1 + 1) / (freq + k1 * (1 - b + b * len(toks[doc_id]) / avg))
    return score


def test_build_index_rejects_duplicate_ids():
    with pytest.raises(ValueError, match="duplicate record id"):
        build_index([("d1", "a"), ("d1", "b")])


def test_index_stats():
    idx = make_index({"d1": "a b", "d2": "b c c"})
    assert idx.doc_count == 2
    assert idx.avg_len == 2.5
    assert idx.doc_freq["b"] == 2
    assert idx.doc_freq["c"] == 1
    assert idx.term_freq["d2"]["c"] == 2


def test_bm25_three_doc_value():
    idx = make_index({"d1": "a b", "d2": "b c", "d3": "c d"})
    assert bm25_score(idx, ["a"], "d1") == pytest.approx(0.9808, abs=1e-3)


def test_bm25_matches_reference_formula():
    docs = {
        "d1": "the quick brown fox",
        "d2": "the lazy dog sleeps all day",
        "d3": "quick quick slow",
        "d4": "a fox and a dog",
    }
    idx = make_index(docs)
    rng = random.Random(3)
    vocab = "the quick brown fox lazy dog sleeps day a and slow missing".split()
    for _ in range(100):
        q = [rng.choice(vocab) for _ in range(rng.randint(1, 5))]
        for doc_id in docs:
            assert bm25_score(idx, q, doc_id) == pytest.approx(
                reference_bm25(docs, q, doc_id), abs=1e-12
            )


def test_bm25_duplicate_query_tokens_count_twice():
    idx = make_index({"d1": "a b", "d2": "b c", "d3": "c d"})
    single = bm25_score(idx, ["a"], "d1")
    double = bm25_score(idx, ["a", "a"], "d1")
    assert double == pytest.approx(2 * single, abs=1e-12)


def test_bm25_absent_term_scores_zero():
    idx = make_index({"d1": "a b", "d2": "b c"})
    assert bm25_score(idx, ["zzz"], "d1") == 0.0


def test_bm25_unknown_doc_raises():
    idx = make_index({"d1": "a"})
    with pytest.raises(ValueError, match="unknown doc id"):
        bm25_score(idx, ["a"], "nope")


def test_bm25_empty_index_of_empty_docs():
    idx = make_index({"d1": "", "d2": ""})
    assert bm25_score(idx, ["a"], "d1") == 0.0


def test_recall_two_of_three_bigrams_value():
    got = recall_score(["a", "b", "c"], ["a", "b", "d"], 2)
    # unigrams 2/3, bigrams 1/2 -> sqrt(1/3)
    assert got == pytest.approx(math.sqrt(1.0 / 3.0), abs=1e-9)


def test_recall_self_is_one():
    rng = random.Random(17)
    for _ in range(100):
        s = [rng.choice("abcdef") for _ in range(rng.randint(1, 12))]
        assert recall_score(s, s, 4) == pytest.approx(1.0, abs=1e-12)


def test_recall_skips_orders_longer_than_query():
    # |s| = 1: only unigrams participate even at order 4
    assert recall_score(["a"], ["a", "b"], 4) == pytest.approx(1.0, abs=1e-12)


def test_recall_zero_overlap_at_any_included_order_is_zero():
    assert recall_score(["a", "b"], ["b", "a"], 2) == 0.0
    assert recall_score(["a"], ["b"], 1) == 0.0


def test_recall_clips_repeated_ngrams():
    # s has "a" twice but c only once: unigram overlap is clipped to 2 of 3
    got = recall_score(["a", "a", "b"], ["b", "a"], 1)
    assert got == pytest.approx(2.0 / 3.0, abs=1e-12)


def test_recall_rejects_empty_query_and_bad_order():
    with pytest.raises(ValueError):
        recall_score([], ["a"], 1)
    with pytest.raises(ValueError):
        recall_score(["a"], ["a"], 0)


def test_config_validation():
    with pytest.raises(ValueError, match="unknown retrieval method"):
        RetrievalConfig(method="tfidf")
    with pytest.raises(ValueError):
        RetrievalConfig(shots=0)
    with pytest.raises(ValueError):
        RetrievalConfig(shots=10, pool_size=5)
    with pytest.raises(ValueError):
        RetrievalConfig(ngram_order=0)


def test_retrieve_bm25_ranks_by_score_then_id():
    idx = make_index({"d1": "a b", "d2": "b c", "d3": "c d"})
    hits = retrieve(idx, "a", RetrievalConfig(method=METHOD_BM25, shots=3))
    assert [h.record_id for h in hits] == ["d1", "d2", "d3"]
    assert hits[0].recall is None
    # d2 and d3 both score 0 for "a"; the id breaks the tie
    assert hits[1].bm25 == hits[2].bm25 == 0.0


def test_retrieve_exact_text_ranks_own_doc_first():
    docs = {
        "d1": "wie kann ich das fenster schliessen",
        "d2": "das fenster ist offen",
        "d3": "ich kann nicht schliessen",
        "d4": "ein ganz anderer satz",
    }
    idx = make_index(docs)
    for method in (METHOD_BM25, METHOD_BM25_RERANK):
        for doc_id, text in docs.items():
            hits = retrieve(idx, text, RetrievalConfig(method=method, shots=1))
            assert hits[0].record_id == doc_id


def test_retrieve_rerank_overrides_bm25_order():
    # d_long wins BM25 on raw term frequency; d_tight wins 4-gram recall
    docs = {
        "d_long": "x x x x x y q q q q",
        "d_tight": "a b c d",
    }
    idx = make_index(docs)
    query = "a b c d x"
    bm25_hits = retrieve(idx, query, RetrievalConfig(method=METHOD_BM25, shots=2))
    rerank_hits = retrieve(idx, query, RetrievalConfig(shots=2))
    assert rerank_hits[0].record_id == "d_tight"
    assert rerank_hits[0].recall is not None
    assert {h.record_id for h in bm25_hits} == {"d_long", "d_tight"}


def test_retrieve_rerank_tie_falls_back_to_bm25_then_id():
    # zero bigram overlap everywhere -> every recall is 0 and ties cascade
    docs = {"d2": "b c e", "d1": "b c", "d3": "z z"}
    idx = make_index(docs)
    hits = retrieve(idx, "q w e r", RetrievalConfig(shots=3))
    assert all(h.recall == 0.0 for h in hits)
    # d2 contains "e" so it outranks on bm25; d1 before d3 by id on the 0-0 tie
    assert [h.record_id for h in hits] == ["d2", "d1", "d3"]


def test_retrieve_pool_size_limits_rerank_candidates():
    # d_rev wins bm25 (shorter doc, same terms); d_gram wins 4-gram recall.
    # a pool of 1 never shows the reranker d_gram.
    docs = {"d_rev": "d c b a", "d_gram": "a b c d z z z z"}
    idx = make_index(docs)
    query = "a b c d"
    wide = retrieve(idx, query, RetrievalConfig(pool_size=200, shots=1))
    narrow = retrieve(idx, query, RetrievalConfig(pool_size=1, shots=1))
    assert wide[0].record_id == "d_gram"
    assert wide[0].recall == pytest.approx(1.0, abs=1e-12)
    assert narrow[0].record_id == "d_rev"


def test_retrieve_empty_query_returns_nothing():
    idx = make_index({"d1": "a"})
    assert retrieve(idx, "   ", RetrievalConfig()) == []


def test_retrieve_returns_at_most_shots():
    idx = make_index({f"d{i}": f"tok{i} shared" for i in range(10)})
    hits = retrieve(idx, "shared", RetrievalConfig(shots=3))
    assert len(hits) == 3
