"""Native corpus BLEU and TER plus bucket/POS analyses of MT output.

BLEU is corpus-level modified n-gram precision (orders 1-4, geometric mean,
brevity penalty). TER counts word edits plus greedily-found block shifts per
reference word. The analyses mirror the usual MT comparison tables: BLEU by
reference-length bucket and per-POS-tag word accuracy under a case-folded
LCS alignment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .textops import TokenSeq, clipped_overlap, ngrams, tokenize

DEFAULT_BLEU_ORDER = 4
DEFAULT_BUCKET_EDGES = (10, 20, 30, 40, 50, 60)
MAX_SHIFT_LEN = 10
MAX_SHIFT_ITERS = 20

POS_TAGS = ("CC", "DT", "IN", "JJ", "NN", "NNP", "NNS", "PRP", "RB", "TO", "VB", "VBP", "VBZ", "other")
_POS_TAG_SET = frozenset(POS_TAGS)


def bleu_corpus(
    hyps: list[str],
    refs: list[str],
    max_order: int = DEFAULT_BLEU_ORDER,
    lowercase: bool = False,
) -> float:
    """Corpus BLEU in [0, 100].

    Clipped modified precision per order, geometric mean over the orders
    whose corpus-total hypothesis n-gram count is non-zero, brevity penalty
    exp(1 - r/c) when the hypothesis corpus is shorter than the reference.
    """
    if len(hyps) != len(refs):
        raise ValueError(f"got {len(hyps)} hypotheses for {len(refs)} references")
    if not hyps:
        raise ValueError("empty corpus")
    matched = [0] * max_order
    total = [0] * max_order
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hyps, refs):
        h = tokenize(hyp, lowercase)
        r = tokenize(ref, lowercase)
        hyp_len += len(h)
        ref_len += len(r)
        for order in range(1, max_order + 1):
            h_counts = ngrams(h, order)
            total[order - 1] += sum(h_counts.values())
            matched[order - 1] += clipped_overlap(h_counts, ngrams(r, order))
    if hyp_len == 0:
        raise ValueError("all hypotheses are empty")
    log_sum = 0.0
    included = 0
    for order in range(max_order):
        if total[order] == 0:
            continue
        if matched[order] == 0:
            return 0.0
        log_sum += math.log(matched[order] / total[order])
        included += 1
    precision = math.exp(log_sum / included)
    brevity = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * brevity * precision


def _edit_distance(a: TokenSeq, b: TokenSeq) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, tok in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j in range(1, len(b) + 1):
            if tok == b[j - 1]:
                cur[j] = prev[j - 1]
            else:
                cur[j] = 1 + min(prev[j], cur[j - 1], prev[j - 1])
        prev = cur
    return prev[-1]


def _shift_candidates(cur: TokenSeq, ref: TokenSeq, max_len: int):
    """Yield (i, length, target, shifted) block moves.

    A block of cur may move to any position where the same token block occurs
    in ref; the block is cut out and reinserted at the ref-side position
    clamped to what remains.
    """
    n = len(cur)
    for i in range(n):
        for length in range(1, min(max_len, n - i) + 1):
            block = cur[i:i + length]
            for target in range(len(ref) - length + 1):
                if ref[target:target + length] != block:
                    continue
                rest = cur[:i] + cur[i + length:]
                at = min(target, len(rest))
                shifted = rest[:at] + block + rest[at:]
                if shifted != cur:
                    yield i, length, target, shifted


def ter_edits(hyp_tokens: TokenSeq, ref_tokens: TokenSeq) -> int:
    """Total TER edits: greedy block shifts (cost 1 each) plus edit distance.

    Each iteration applies the single shift that most reduces the remaining
    edit distance; ties prefer the longest block, then the leftmost source
    position, then the earliest target. Stops when no shift helps or after
    MAX_SHIFT_ITERS shifts.
    """
    current = list(hyp_tokens)
    distance = _edit_distance(current, ref_tokens)
    shifts = 0
    for _ in range(MAX_SHIFT_ITERS):
        best_key = None
        best_seq = None
        for i, length, target, shifted in _shift_candidates(current, ref_tokens, MAX_SHIFT_LEN):
            d = _edit_distance(shifted, ref_tokens)
            if d >= distance:
                continue
            key = (d, -length, i, target)
            if best_key is None or key < best_key:
                best_key, best_seq = key, shifted
        if best_seq is None:
            break
        current = best_seq
        distance = best_key[0]
        shifts += 1
    return shifts + distance


def ter(hyp: str, ref: str, lowercase: bool = False) -> float:
    """Translation edit rate as a percentage of the reference length.

    Can exceed 100 for hypotheses much longer than the reference.
    """
    r = tokenize(ref, lowercase)
    if not r:
        raise ValueError("reference must be non-empty")
    h = tokenize(hyp, lowercase)
    return 100.0 * ter_edits(h, r) / len(r)


def ter_corpus(hyps: list[str], refs: list[str], lowercase: bool = False) -> float:
    """Corpus TER: total edits over total reference length, as a percentage."""
    if len(hyps) != len(refs):
        raise ValueError(f"got {len(hyps)} hypotheses for {len(refs)} references")
    if not hyps:
        raise ValueError("empty corpus")
    edits = 0
    ref_len = 0
    for hyp, ref in zip(hyps, refs):
        r = tokenize(ref, lowercase)
        if not r:
            raise ValueError("reference must be non-empty")
        edits += ter_edits(tokenize(hyp, lowercase), r)
        ref_len += len(r)
    return 100.0 * edits / ref_len


def bucket_labels(edges: tuple[int, ...] = DEFAULT_BUCKET_EDGES) -> list[str]:
    """Human-readable labels: <e0, [e0,e1), ..., >=eN."""
    if not edges or list(edges) != sorted(set(edges)):
        raise ValueError("bucket edges must be strictly increasing")
    labels = [f"<{edges[0]}"]
    labels += [f"[{lo},{hi})" for lo, hi in zip(edges, edges[1:])]
    labels.append(f">={edges[-1]}")
    return labels


def length_bucket_bleu(
    pairs: list[tuple[str, str]],
    edges: tuple[int, ...] = DEFAULT_BUCKET_EDGES,
    lowercase: bool = False,
) -> dict[str, dict]:
    """Corpus BLEU within reference-length buckets; empty buckets are absent.

    Returns {label: {"bleu": score, "sentences": count}} in bucket order.
    """
    labels = bucket_labels(edges)
    grouped: dict[str, list[tuple[str, str]]] = {label: [] for label in labels}
    for hyp, ref in pairs:
        length = len(tokenize(ref, lowercase))
        slot = len(edges)
        for idx, edge in enumerate(edges):
            if length < edge:
                slot = idx
                break
        grouped[labels[slot]].append((hyp, ref))
    table = {}
    for label in labels:
        bucket = grouped[label]
        if not bucket:
            continue
        hyps = [h for h, _ in bucket]
        refs = [r for _, r in bucket]
        table[label] = {"bleu": bleu_corpus(hyps, refs, lowercase=lowercase), "sentences": len(bucket)}
    return table


@dataclass(frozen=True)
class TaggedTokens:
    """One reference sentence with a POS tag per token; unknown tags become "other"."""

    tokens: tuple[str, ...]
    tags: tuple[str, ...]

    def __post_init__(self):
        if len(self.tokens) != len(self.tags):
            raise ValueError(
                f"{len(self.tags)} tags for {len(self.tokens)} tokens"
            )
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(
            self, "tags", tuple(tag if tag in _POS_TAG_SET else "other" for tag in self.tags)
        )


def read_tagged_file(path: str) -> list[TaggedTokens]:
    """Parse token-TAB-tag lines, blank line between sentences."""
    sentences: list[TaggedTokens] = []
    tokens: list[str] = []
    tags: list[str] = []

    def flush(lineno: int):
        if not tokens:
            return
        try:
            sentences.append(TaggedTokens(tuple(tokens), tuple(tags)))
        except ValueError as exc:
            raise ValueError(f"{path}: sentence ending at line {lineno}: {exc}") from None
        tokens.clear()
        tags.clear()

    with open(path, encoding="utf-8") as fh:
        lineno = 0
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                flush(lineno)
                continue
            if "\t" not in line:
                raise ValueError(f"{path}: line {lineno}: expected token TAB tag")
            token, tag = line.split("\t", 1)
            tokens.append(token)
            tags.append(tag.strip())
        flush(lineno)
    return sentences


def _lcs_matched_ref_indices(ref_tokens: tuple[str, ...], hyp_tokens: TokenSeq) -> set[int]:
    """Reference positions matched under a case-folded LCS alignment."""
    r = [t.casefold() for t in ref_tokens]
    h = [t.casefold() for t in hyp_tokens]
    n, m = len(r), len(h)
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            if r[i - 1] == h[j - 1]:
                dp[i][j] = dp[i - 1][j - 1] + 1
            else:
                dp[i][j] = max(dp[i - 1][j], dp[i][j - 1])
    matched: set[int] = set()
    i, j = n, m
    while i > 0 and j > 0:
        if r[i - 1] == h[j - 1] and dp[i][j] == dp[i - 1][j - 1] + 1:
            matched.add(i - 1)
            i -= 1
            j -= 1
        elif dp[i - 1][j] >= dp[i][j - 1]:
            i -= 1
        else:
            j -= 1
    return matched


def pos_word_accuracy(ref_tagged: list[TaggedTokens], hyps: list[str]) -> dict[str, float]:
    """Per-tag fraction of reference tokens the hypotheses reproduced.

    A reference token counts as correct iff the LCS alignment of its sentence
    matched it. Tags are reported in canonical order, only when present.
    """
    if len(ref_tagged) != len(hyps):
        raise ValueError(f"got {len(hyps)} hypotheses for {len(ref_tagged)} tagged references")
    correct: dict[str, int] = {}
    seen: dict[str, int] = {}
    for sentence, hyp in zip(ref_tagged, hyps):
        matched = _lcs_matched_ref_indices(sentence.tokens, tokenize(hyp))
        for idx, tag in enumerate(sentence.tags):
            seen[tag] = seen.get(tag, 0) + 1
            if idx in matched:
                correct[tag] = correct.get(tag, 0) + 1
    return {tag: correct.get(tag, 0) / seen[tag] for tag in POS_TAGS if tag in seen}


@dataclass
class EvaluationReport:
    """Corpus metrics plus optional analyses; external_scores is a merge
    point for metrics computed by other tools."""

    sentences: int
    bleu: float | None = None
    ter: float | None = None
    per_sentence: list[dict] | None = None
    length_buckets: dict[str, dict] | None = None
    pos_accuracy: dict[str, float] | None = None
    external_scores: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "sentences": self.sentences,
            "bleu": self.bleu,
            "ter": self.ter,
            "per_sentence": self.per_sentence,
            "length_buckets": self.length_buckets,
            "pos_accuracy": self.pos_accuracy,
            "external_scores": self.external_scores,
        }


def evaluate_corpus(hyps: list[str], refs: list[str], lowercase: bool = False) -> EvaluationReport:
    """Corpus BLEU/TER plus per-sentence scores."""
    corpus_bleu = bleu_corpus(hyps, refs, lowercase=lowercase)
    corpus_ter = ter_corpus(hyps, refs, lowercase=lowercase)
    per_sentence = []
    for hyp, ref in zip(hyps, refs):
        try:
            sent_bleu = bleu_corpus([hyp], [ref], lowercase=lowercase)
        except ValueError:
            sent_bleu = 0.0      # empty hypothesis scores zero at sentence level
        per_sentence.append({"bleu": sent_bleu, "ter": ter(hyp, ref, lowercase)})
    return EvaluationReport(
        sentences=len(hyps), bleu=corpus_bleu, ter=corpus_ter, per_sentence=per_sentence
    )


def analyze_corpus(
    hyps: list[str],
    refs: list[str],
    edges: tuple[int, ...] = DEFAULT_BUCKET_EDGES,
    ref_tagged: list[TaggedTokens] | None = None,
    lowercase: bool = False,
) -> EvaluationReport:
    """Length-bucket BLEU and, when tags are supplied, per-POS word accuracy."""
    if len(hyps) != len(refs):
        raise ValueError(f"got {len(hyps)} hypotheses for {len(refs)} references")
    buckets = length_bucket_bleu(list(zip(hyps, refs)), edges, lowercase=lowercase)
    pos_table = pos_word_accuracy(ref_tagged, hyps) if ref_tagged is not None else None
    return EvaluationReport(sentences=len(hyps), length_buckets=buckets, pos_accuracy=pos_table)
