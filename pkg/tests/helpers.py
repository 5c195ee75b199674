"""Shared test utilities: independent oracles and a scripted chat backend."""

from __future__ import annotations

import itertools
import random
from functools import lru_cache

from hilmt.gateway import ChatMessage, RecordingGateway, ReplayBackend
from hilmt.store import PROVENANCE_SIMULATED, DemonstrationRecord, DemoStore
from hilmt.feedback import generate_feedback


def brute_force_distance(h: list[str], r: list[str]) -> int:
    """Edit distance by memoized recursion over all edit choices.

    Deliberately independent of the production DP: delete/insert/substitute
    are all explored even when tokens match, so agreement is meaningful.
    """
    h_t, r_t = tuple(h), tuple(r)

    @lru_cache(maxsize=None)
    def go(i: int, j: int) -> int:
        if i == len(h_t):
            return len(r_t) - j
        if j == len(r_t):
            return len(h_t) - i
        best = go(i + 1, j) + 1
        best = min(best, go(i, j + 1) + 1)
        best = min(best, go(i + 1, j + 1) + (h_t[i] != r_t[j]))
        return best

    return go(0, 0)


def oracle_ter_edits(h: list[str], r: list[str], max_iters: int = 20, max_len: int = 10) -> int:
    """Exhaustive shift-sequence search: the true minimum of shifts + edits.

    Breadth-first over every sequence of block shifts (same move rules as the
    production search), pruned by the best total found so far.
    """
    best = brute_force_distance(h, r)
    frontier = {tuple(h)}
    seen = {tuple(h): 0}
    depth = 0
    while frontier and depth < max_iters:
        depth += 1
        if depth >= best:
            break
        step: set[tuple[str, ...]] = set()
        for state in frontier:
            cur = list(state)
            n = len(cur)
            for i in range(n):
                for length in range(1, min(max_len, n - i) + 1):
                    block = cur[i:i + length]
                    for target in range(len(r) - length + 1):
                        if r[target:target + length] != block:
                            continue
                        rest = cur[:i] + cur[i + length:]
                        at = min(target, len(rest))
                        cand = tuple(rest[:at] + block + rest[at:])
                        if seen.get(cand, max_iters + 1) <= depth:
                            continue
                        seen[cand] = depth
                        total = depth + brute_force_distance(list(cand), r)
                        if total < best:
                            best = total
                        step.add(cand)
        frontier = step
    return best


def all_sequences(vocab: str, max_len: int) -> list[list[str]]:
    out: list[list[str]] = []
    for length in range(max_len + 1):
        out.extend(list(seq) for seq in itertools.product(vocab, repeat=length))
    return out


def random_pair(rng: random.Random, vocab: str, max_len: int) -> tuple[list[str], list[str]]:
    return (
        [rng.choice(vocab) for _ in range(rng.randint(0, max_len))],
        [rng.choice(vocab) for _ in range(rng.randint(0, max_len))],
    )


class ScriptedBackend:
    """Deterministic chat stand-in keyed off the prompt shape.

    Draft requests answer from a source -> draft table (default "mt <source>"),
    refine requests append polish_suffix to the draft, compare requests reply
    with compare_reply. Sources listed in refusals get refusal boilerplate.
    """

    def __init__(self, translations=None, compare_reply="B", polish_suffix=" polished", refusals=()):
        self.translations = dict(translations or {})
        self.compare_reply = compare_reply
        self.polish_suffix = polish_suffix
        self.refusals = set(refusals)

    def draft_for(self, source: str) -> str:
        return self.translations.get(source, f"mt {source}")

    def refined_for(self, source: str) -> str:
        return self.draft_for(source) + self.polish_suffix

    def chat(self, messages, params) -> ChatMessage:
        last = messages[-1].content
        if "Reply with exactly A or B." in last:
            return ChatMessage("assistant", self.compare_reply)
        if "Polish the draft" in last:
            draft = last.rsplit("<hypothesis>", 1)[1]
            return ChatMessage("assistant", draft + self.polish_suffix)
        source = last.rsplit("\n", 1)[-1]
        if source in self.refusals:
            return ChatMessage("assistant", "I'm sorry, I cannot translate this.")
        return ChatMessage("assistant", self.draft_for(source))


def recording_over(backend, fixture_path: str | None = None) -> RecordingGateway:
    """Wrap a backend in a recorder, optionally writing replay fixtures."""
    fixtures = ReplayBackend(str(fixture_path)) if fixture_path else None
    return RecordingGateway(backend, fixtures=fixtures)


def seed_store(path: str, domain: str = "it", count: int = 5, prefix: str = "quelle") -> DemoStore:
    """Store of simulated records with consistent stored feedback."""
    store = DemoStore.open(str(path))
    for i in range(count):
        source = f"{prefix} satz {i} mit wort{i}"
        hypothesis = f"draft sentence {i} with word{i}"
        reference = f"reference sentence {i} with word{i}"
        store.append(
            DemonstrationRecord(
                id="",
                domain=domain,
                source=source,
                hypothesis=hypothesis,
                reference=reference,
                feedback=generate_feedback(hypothesis, reference).instructions,
                provenance=PROVENANCE_SIMULATED,
            )
        )
    return store
