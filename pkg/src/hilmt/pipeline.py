"""Orchestration: feedback collection and two-stage draft/refine translation.

Translation runs in up to three stages per sentence: a draft request, a
refinement request that continues the same dialog with retrieved
demonstrations in the prompt, and (under compare_hil) a self-reflection
request asking the model to pick the better of the two candidates. Reference
translations of the sentences being translated never enter any prompt.
"""

from __future__ import annotations

import json
import logging
import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .feedback import generate_feedback
from .gateway import ChatMessage, FixtureMissError, GatewayError, GenerationParams
from .retrieval import BM25Index, RetrievalConfig, build_index, retrieve
from .store import PROVENANCE_SIMULATED, DemonstrationRecord, DemoStore, DuplicateRecordError
from .textops import tokenize

log = logging.getLogger(__name__)

STRATEGY_DRAFT = "draft_only"
STRATEGY_HIL = "hil"
STRATEGY_COMPARE = "compare_hil"
STRATEGIES = (STRATEGY_DRAFT, STRATEGY_HIL, STRATEGY_COMPARE)

DEFAULT_DRAFT_TEMPLATE = (
    "Translate the following {src_lang} text into {tgt_lang}. "
    "Output only the translation.\n{source}"
)
DEFAULT_DEMO_BLOCK_TEMPLATE = (
    "<input>{source} <hypothesis>{hypothesis} <reference>{reference} <revision>{revision}"
)
DEFAULT_REFINE_TEMPLATE = (
    "{demos}\n\n"
    "Here is a new input and its draft translation. Polish the draft following "
    "the patterns above. Output only the polished translation.\n"
    "<input>{source} <hypothesis>{draft}"
)
DEFAULT_COMPARE_TEMPLATE = (
    "Source: {source}\n"
    "A: {draft}\n"
    "B: {refined}\n"
    "Which translation of the source is better? Reply with exactly A or B."
)

DEFAULT_REFUSAL_PATTERNS = ("I'm sorry", "I cannot", "as an AI")

_AB_TOKEN = re.compile(r"\b([AB])\b", re.IGNORECASE)


@dataclass(frozen=True)
class PromptTemplates:
    draft_template: str = DEFAULT_DRAFT_TEMPLATE
    demo_block_template: str = DEFAULT_DEMO_BLOCK_TEMPLATE
    refine_template: str = DEFAULT_REFINE_TEMPLATE
    compare_template: str = DEFAULT_COMPARE_TEMPLATE

    @classmethod
    def load(cls, path: str) -> "PromptTemplates":
        """Read template overrides from a JSON object keyed by field name."""
        with open(path, encoding="utf-8") as fh:
            overrides = json.load(fh)
        unknown = set(overrides) - {
            "draft_template", "demo_block_template", "refine_template", "compare_template",
        }
        if unknown:
            raise ValueError(f"{path}: unknown template fields {sorted(unknown)}")
        return cls(**overrides)

    def render_demo_block(self, record: DemonstrationRecord) -> str:
        return self.demo_block_template.format(
            source=record.source,
            hypothesis=record.hypothesis,
            reference=record.reference,
            revision=" ".join(record.feedback),
        )

    def render_demos(self, records: list[DemonstrationRecord]) -> str:
        return "\n".join(
            f"{i}. {self.render_demo_block(rec)}" for i, rec in enumerate(records, start=1)
        )


@dataclass(frozen=True)
class PipelineConfig:
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    templates: PromptTemplates = field(default_factory=PromptTemplates)
    generation: GenerationParams = field(default_factory=GenerationParams)
    parallelism: int = 1
    src_lang: str = "German"
    tgt_lang: str = "English"
    refusal_patterns: tuple[str, ...] = DEFAULT_REFUSAL_PATTERNS

    def __post_init__(self):
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")


@dataclass(frozen=True)
class TranslationRecord:
    """Per-sentence pipeline trace."""

    source: str
    domain: str
    draft: str
    demos_used: tuple[str, ...]
    refined: str | None
    comparator_choice: str | None
    final: str
    validity: dict
    strategy: str
    shots: int

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "domain": self.domain,
            "draft": self.draft,
            "demos_used": list(self.demos_used),
            "refined": self.refined,
            "comparator_choice": self.comparator_choice,
            "final": self.final,
            "validity": dict(self.validity),
            "strategy": self.strategy,
            "shots": self.shots,
        }

    def to_json_line(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)


def _draft_messages(source: str, config: PipelineConfig) -> list[ChatMessage]:
    prompt = config.templates.draft_template.format(
        src_lang=config.src_lang, tgt_lang=config.tgt_lang, source=source
    )
    return [ChatMessage("user", prompt)]


def draft_translate(source: str, gateway, config: PipelineConfig) -> str:
    """Single-turn draft request; returns the assistant text stripped."""
    if not source.strip():
        raise ValueError("source must be non-empty")
    reply = gateway.chat(_draft_messages(source, config), config.generation)
    return reply.content.strip()


def refine(
    source: str,
    draft: str,
    demos: list[DemonstrationRecord],
    gateway,
    config: PipelineConfig,
) -> str:
    """Polish the draft in the same dialog, demos rendered into the prompt.

    The dialog is rebuilt deterministically: the draft user turn, the draft
    itself as the assistant turn, then the refine turn. demos may be empty,
    which degenerates to a bare polish request.
    """
    prompt = config.templates.refine_template.format(
        demos=config.templates.render_demos(demos), source=source, draft=draft
    )
    messages = _draft_messages(source, config) + [
        ChatMessage("assistant", draft),
        ChatMessage("user", prompt),
    ]
    reply = gateway.chat(messages, config.generation)
    return reply.content.strip()


def compare_select(
    source: str,
    draft: str,
    refined: str,
    gateway,
    config: PipelineConfig,
) -> tuple[str, str]:
    """Ask the model which candidate is better; A = draft, B = refined.

    Returns (final_text, choice) with choice in {"draft", "refined"}. The
    first standalone A/B token decides, case-insensitively; an unparseable
    reply falls back to the draft.
    """
    if not draft or not refined:
        raise ValueError("both candidates must be non-empty")
    prompt = config.templates.compare_template.format(
        source=source, draft=draft, refined=refined
    )
    reply = gateway.chat([ChatMessage("user", prompt)], config.generation)
    token = _AB_TOKEN.search(reply.content)
    if token is None:
        log.warning("comparator reply %r has no A/B verdict; keeping draft", reply.content[:80])
        return draft, "draft"
    if token.group(1).upper() == "A":
        return draft, "draft"
    return refined, "refined"


def detect_invalid(output: str, source: str, refusal_patterns: tuple[str, ...] = DEFAULT_REFUSAL_PATTERNS) -> dict:
    """Validity flags for one model output against its source.

    Mirrors the manual screening of raw model output: empty replies, refusal
    boilerplate, source parroting, and wild length ratios (>4 or <0.25).
    """
    flags = {"ok": False, "empty": False, "refusal": False, "source_copy": False, "length_anomaly": False}
    text = output.strip()
    if not text:
        flags["empty"] = True
        return flags
    folded = text.casefold()
    if any(pattern.casefold() in folded for pattern in refusal_patterns):
        flags["refusal"] = True
    out_tokens = tokenize(output, lowercase=True)
    src_tokens = tokenize(source, lowercase=True)
    if out_tokens == src_tokens:
        flags["source_copy"] = True
    if src_tokens and out_tokens:
        ratio = len(out_tokens) / len(src_tokens)
        if ratio > 4 or ratio < 0.25:
            flags["length_anomaly"] = True
    flags["ok"] = not (flags["empty"] or flags["refusal"] or flags["source_copy"] or flags["length_anomaly"])
    return flags


class TranslationFailure(Exception):
    """Gateway failure mid-sentence. record carries the partial trace with
    final="" and validity flagged not-ok."""

    def __init__(self, record: TranslationRecord, cause: Exception):
        super().__init__(str(cause))
        self.record = record
        self.cause = cause


def translate_sentence(
    source: str,
    domain: str,
    index: BM25Index,
    demo_lookup: dict[str, DemonstrationRecord],
    gateway,
    config: PipelineConfig,
    strategy: str,
) -> TranslationRecord:
    """Run one sentence through draft / retrieve+refine / compare.

    demo_lookup maps the index's record ids to their stored records. Raises
    TranslationFailure on a gateway error; the partial record rides on the
    exception so callers can keep it.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy: {strategy!r}")
    shots = config.retrieval.shots
    draft = ""
    demos_used: tuple[str, ...] = ()
    refined = None
    choice = None
    try:
        draft = draft_translate(source, gateway, config)
        final = draft
        if strategy != STRATEGY_DRAFT:
            hits = retrieve(index, source, config.retrieval)
            # a demo for this very sentence would put its reference into the
            # prompt; skip such hits so the exclusion invariant survives
            # re-translation of reviewed sentences
            source_key = tokenize(source, lowercase=True)
            demos = [
                demo_lookup[hit.record_id]
                for hit in hits
                if tokenize(demo_lookup[hit.record_id].source, lowercase=True) != source_key
            ]
            demos_used = tuple(rec.id for rec in demos)
            refined = refine(source, draft, demos, gateway, config)
            final = refined
            if strategy == STRATEGY_COMPARE:
                final, choice = compare_select(source, draft, refined, gateway, config)
    except (GatewayError, FixtureMissError) as exc:
        log.warning("gateway failure for %r: %s", source[:60], exc)
        record = TranslationRecord(
            source=source,
            domain=domain,
            draft=draft,
            demos_used=demos_used,
            refined=None,
            comparator_choice=None,
            final="",
            validity=detect_invalid("", source, config.refusal_patterns),
            strategy=strategy,
            shots=shots,
        )
        raise TranslationFailure(record, exc) from exc
    return TranslationRecord(
        source=source,
        domain=domain,
        draft=draft,
        demos_used=demos_used,
        refined=refined,
        comparator_choice=choice,
        final=final,
        validity=detect_invalid(final, source, config.refusal_patterns),
        strategy=strategy,
        shots=shots,
    )


def translate_corpus(
    sources: list[str],
    domain: str,
    store: DemoStore | None,
    gateway,
    config: PipelineConfig,
    strategy: str = STRATEGY_COMPARE,
) -> list[TranslationRecord]:
    """Translate sources under one strategy; results stay in input order.

    Retrieval strategies index the store's records for the domain once up
    front. Sentences run concurrently up to config.parallelism.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy: {strategy!r}")
    if strategy != STRATEGY_DRAFT and store is None:
        raise ValueError(f"strategy {strategy} needs a demonstration store")
    demo_lookup: dict[str, DemonstrationRecord] = {}
    index = build_index([])
    if strategy != STRATEGY_DRAFT:
        records = store.filter(domain)
        demo_lookup = {rec.id: rec for rec in records}
        index = build_index([(rec.id, rec.source) for rec in records])

    def one(source: str) -> TranslationRecord:
        try:
            return translate_sentence(source, domain, index, demo_lookup, gateway, config, strategy)
        except TranslationFailure as failure:
            # one bad sentence must not sink the corpus
            return failure.record

    if config.parallelism == 1:
        return [one(source) for source in sources]
    with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
        return list(pool.map(one, sources))


def collect_feedback(
    corpus: list[tuple[str, str]],
    domain: str,
    store: DemoStore,
    gateway,
    config: PipelineConfig,
) -> dict:
    """Draft-translate a (source, reference) corpus and store the feedback.

    Every valid draft becomes a simulated demonstration whose instruction
    list is generated from (draft, reference). Invalid drafts, per-sentence
    gateway failures, and content already stored are skipped, never fatal.
    Returns counts {"appended": ..., "skipped": ...}.
    """
    if not corpus:
        raise ValueError("corpus must be non-empty")
    appended = 0
    skipped = 0
    for source, reference in corpus:
        try:
            draft = draft_translate(source, gateway, config)
        except (GatewayError, FixtureMissError) as exc:
            log.warning("draft failed for %r: %s", source[:60], exc)
            skipped += 1
            continue
        if not detect_invalid(draft, source, config.refusal_patterns)["ok"]:
            skipped += 1
            continue
        record = DemonstrationRecord(
            id="",
            domain=domain,
            source=source,
            hypothesis=draft,
            reference=reference,
            feedback=generate_feedback(draft, reference).instructions,
            provenance=PROVENANCE_SIMULATED,
        )
        try:
            store.append(record)
        except DuplicateRecordError:
            skipped += 1
            continue
        appended += 1
    return {"appended": appended, "skipped": skipped}


def subsample(corpus: list, sample: int, seed: int) -> list:
    """Seeded draw without replacement, preserving nothing of the order."""
    if sample >= len(corpus):
        return list(corpus)
    return random.Random(seed).sample(corpus, sample)
