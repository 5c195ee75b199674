"""Whitespace tokenization and n-gram counting shared by feedback, retrieval, and metrics."""

from __future__ import annotations

from collections import Counter
from collections.abc import Sequence

TokenSeq = list[str]


def tokenize(text: str, lowercase: bool = False) -> TokenSeq:
    """Split text on unicode whitespace, collapsing runs.

    Punctuation stays attached to its word ("kontact;" is one token). With
    lowercase=True tokens are case-folded, which is what feedback generation
    and retrieval want; metrics keep the original casing by default.
    """
    if lowercase:
        text = text.casefold()
    return text.split()


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    """Count every n-token window of tokens with multiplicity.

    Empty when len(tokens) < n. Keys are token tuples.
    """
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def clipped_overlap(a: Counter, b: Counter) -> int:
    """Size of the clipped multiset intersection of two n-gram counts."""
    return sum(min(count, b[gram]) for gram, count in a.items())
