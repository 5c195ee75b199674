"""BM25 indexing over stored source sentences plus n-gram recall reranking.

Retrieval is two-step by default: shortlist the candidate pool by Okapi BM25,
then rerank the pool by the geometric-mean n-gram recall of the query against
each candidate source and keep the top shot count.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from .textops import TokenSeq, clipped_overlap, ngrams, tokenize

METHOD_BM25 = "bm25"
METHOD_BM25_RERANK = "bm25_rerank"


@dataclass(frozen=True)
class RetrievalConfig:
    method: str = METHOD_BM25_RERANK
    pool_size: int = 200        # BM25 candidate pool ahead of the rerank
    ngram_order: int = 4        # rerank recall order
    shots: int = 3              # demonstrations returned
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self):
        if self.method not in (METHOD_BM25, METHOD_BM25_RERANK):
            raise ValueError(f"unknown retrieval method: {self.method!r}")
        if self.pool_size < 1:
            raise ValueError("pool_size must be >= 1")
        if self.ngram_order < 1:
            raise ValueError("ngram_order must be >= 1")
        if not 1 <= self.shots <= self.pool_size:
            raise ValueError("shots must be between 1 and pool_size")


@dataclass(frozen=True)
class BM25Index:
    """Immutable per-domain index; rebuild to pick up new documents."""

    doc_ids: tuple[str, ...]
    doc_tokens: dict[str, tuple[str, ...]]
    term_freq: dict[str, Counter]
    doc_freq: Counter = field(default_factory=Counter)
    avg_len: float = 0.0

    @property
    def doc_count(self) -> int:
        return len(self.doc_ids)


def build_index(sources: list[tuple[str, str]]) -> BM25Index:
    """Index (record id, source text) pairs over lowercase tokens.

    Args:
        sources: unique record ids with their source sentences.

    Raises:
        ValueError: on duplicate record ids.
    """
    doc_ids: list[str] = []
    doc_tokens: dict[str, tuple[str, ...]] = {}
    term_freq: dict[str, Counter] = {}
    doc_freq: Counter = Counter()
    for record_id, text in sources:
        if record_id in doc_tokens:
            raise ValueError(f"duplicate record id in index build: {record_id!r}")
        tokens = tuple(tokenize(text, lowercase=True))
        doc_ids.append(record_id)
        doc_tokens[record_id] = tokens
        counts = Counter(tokens)
        term_freq[record_id] = counts
        doc_freq.update(counts.keys())
    avg_len = sum(len(t) for t in doc_tokens.values()) / len(doc_ids) if doc_ids else 0.0
    return BM25Index(tuple(doc_ids), doc_tokens, term_freq, doc_freq, avg_len)


def bm25_score(
    index: BM25Index,
    query: TokenSeq,
    doc_id: str,
    k1: float = 1.2,
    b: float = 0.75,
) -> float:
    """Okapi BM25 of one document for a tokenized query.

    idf(t) = ln((N - df + 0.5) / (df + 0.5) + 1); query tokens are summed as
    given, so a token appearing twice in the query contributes twice.
    """
    try:
        tf = index.term_freq[doc_id]
    except KeyError:
        raise ValueError(f"unknown doc id: {doc_id!r}") from None
    if index.avg_len == 0.0:
        return 0.0
    doc_len = len(index.doc_tokens[doc_id])
    norm = k1 * (1.0 - b + b * doc_len / index.avg_len)
    n_docs = index.doc_count
    score = 0.0
    for term in query:
        freq = tf[term]
        if freq == 0:
            continue
        idf = math.log((n_docs - index.doc_freq[term] + 0.5) / (index.doc_freq[term] + 0.5) + 1.0)
        score += idf * freq * (k1 + 1.0) / (freq + norm)
    return score


def recall_score(s: TokenSeq, c: TokenSeq, n: int) -> float:
    """Geometric-mean n-gram recall of query s against candidate c.

    R = exp((1/n') * sum over included orders i of ln(overlap_i / count_i))
    where overlap is the clipped multiset intersection. Orders longer than s
    are skipped (n' counts only included orders); any included order with
    zero overlap forces R = 0.
    """
    if not s:
        raise ValueError("query token sequence must be non-empty")
    if n < 1:
        raise ValueError("recall order must be >= 1")
    log_sum = 0.0
    included = 0
    for order in range(1, n + 1):
        s_counts = ngrams(s, order)
        total = sum(s_counts.values())
        if total == 0:
            continue
        overlap = clipped_overlap(s_counts, ngrams(c, order))
        if overlap == 0:
            return 0.0
        log_sum += math.log(overlap / total)
        included += 1
    return math.exp(log_sum / included)


@dataclass(frozen=True)
class ScoredDemo:
    """Retrieval hit: record id plus scores. recall is None under plain bm25."""

    record_id: str
    bm25: float
    recall: float | None = None


def retrieve(index: BM25Index, query_text: str, config: RetrievalConfig) -> list[ScoredDemo]:
    """Top demonstrations for a query, best first, at most config.shots.

    bm25: rank every document by BM25. bm25_rerank: shortlist the top
    pool_size by BM25, rerank by recall_score at config.ngram_order, break
    rerank ties by higher BM25 then smaller record id. A query with no
    tokens returns [].
    """
    query = tokenize(query_text, lowercase=True)
    if not query:
        return []
    ranked = sorted(
        ((bm25_score(index, query, doc_id, config.k1, config.b), doc_id) for doc_id in index.doc_ids),
        key=lambda pair: (-pair[0], pair[1]),
    )
    if config.method == METHOD_BM25:
        return [ScoredDemo(doc_id, score) for score, doc_id in ranked[: config.shots]]
    pool = ranked[: config.pool_size]
    reranked = [
        ScoredDemo(
            doc_id,
            score,
            recall_score(query, list(index.doc_tokens[doc_id]), config.ngram_order),
        )
        for score, doc_id in pool
    ]
    reranked.sort(key=lambda d: (-d.recall, -d.bm25, d.record_id))
    return reranked[: config.shots]
