"""HTTP API for the human review loop.

Translations requested here become pending review items; a reviewer submits
a corrected translation (post-edit) and the service converts the correction
into revision instructions, stores the new demonstration with
provenance=human, and rebuilds the domain's retrieval index so the record is
immediately retrievable.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .feedback import generate_feedback
from .pipeline import (
    STRATEGY_COMPARE,
    STRATEGY_DRAFT,
    STRATEGY_HIL,
    PipelineConfig,
    TranslationFailure,
    TranslationRecord,
    translate_sentence,
)
from .retrieval import BM25Index, build_index, retrieve
from .store import PROVENANCE_HUMAN, DemonstrationRecord, DemoStore, DuplicateRecordError

STATUS_PENDING = "pending"
STATUS_REVIEWED = "reviewed"

STRATEGY_NAMES = {"draft": STRATEGY_DRAFT, "hil": STRATEGY_HIL, "compare": STRATEGY_COMPARE}


@dataclass
class ReviewItem:
    id: str
    source: str
    draft: str
    refined: str | None
    final: str
    domain: str
    status: str
    record: TranslationRecord
    reviewer_note: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "source": self.source,
            "draft": self.draft,
            "refined": self.refined,
            "final": self.final,
            "domain": self.domain,
            "status": self.status,
        }


class TranslateRequest(BaseModel):
    source: str
    domain: str
    strategy: str = "compare"
    shots: int = 3


class FeedbackRequest(BaseModel):
    post_edit: str
    reviewer_note: str | None = None


class PreviewRequest(BaseModel):
    hypothesis: str
    reference: str


class _State:
    """Review queue plus per-domain index cache, guarded by one reentrant lock."""

    def __init__(self, store: DemoStore, gateway, config: PipelineConfig):
        self.store = store
        self.gateway = gateway
        self.config = config
        self.lock = threading.RLock()
        self.items: dict[str, ReviewItem] = {}
        self.order: list[str] = []
        self._counter = 0
        self._cache: dict[str, tuple[int, BM25Index, dict[str, DemonstrationRecord]]] = {}

    def domain_index(self, domain: str) -> tuple[BM25Index, dict[str, DemonstrationRecord]]:
        """Current index for a domain, rebuilt when the store has grown."""
        with self.lock:
            generation = self.store.generation
            cached = self._cache.get(domain)
            if cached is not None and cached[0] == generation:
                return cached[1], cached[2]
            records = self.store.filter(domain)
            index = build_index([(rec.id, rec.source) for rec in records])
            lookup = {rec.id: rec for rec in records}
            self._cache[domain] = (generation, index, lookup)
            return index, lookup

    def add_item(self, record: TranslationRecord) -> ReviewItem:
        with self.lock:
            self._counter += 1
            item = ReviewItem(
                id=f"r{self._counter:06d}",
                source=record.source,
                draft=record.draft,
                refined=record.refined,
                final=record.final,
                domain=record.domain,
                status=STATUS_PENDING,
                record=record,
            )
            self.items[item.id] = item
            self.order.append(item.id)
            return item

    def list_items(self, status: str | None, domain: str | None) -> list[ReviewItem]:
        with self.lock:
            items = [self.items[item_id] for item_id in reversed(self.order)]
        if status is not None:
            items = [item for item in items if item.status == status]
        if domain is not None:
            items = [item for item in items if item.domain == domain]
        return items


def create_app(
    store: DemoStore,
    gateway,
    config: PipelineConfig | None = None,
    cors_origins: tuple[str, ...] = ("*",),
) -> FastAPI:
    """Wire the review API around one store and one gateway."""
    state = _State(store, gateway, config or PipelineConfig())
    app = FastAPI(title="hilmt review service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": "malformed request body"})

    @app.post("/api/translate")
    def translate(body: TranslateRequest):
        if not body.source.strip():
            raise HTTPException(status_code=400, detail="source must be non-empty")
        if not body.domain.strip():
            raise HTTPException(status_code=400, detail="domain must be non-empty")
        strategy = STRATEGY_NAMES.get(body.strategy)
        if strategy is None:
            raise HTTPException(
                status_code=400,
                detail=f"unknown strategy {body.strategy!r}; expected one of {sorted(STRATEGY_NAMES)}",
            )
        try:
            retrieval = replace(state.config.retrieval, shots=body.shots)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        run_config = replace(state.config, retrieval=retrieval)
        index, lookup = state.domain_index(body.domain)
        failure = None
        try:
            record = translate_sentence(
                body.source, body.domain, index, lookup, state.gateway, run_config, strategy
            )
        except TranslationFailure as exc:
            record, failure = exc.record, exc
        item = state.add_item(record)
        payload = {"id": item.id, **record.to_dict()}
        if failure is not None:
            payload["error"] = str(failure)
            return JSONResponse(status_code=502, content=payload)
        return payload

    @app.get("/api/records")
    def list_records(status: str | None = None, domain: str | None = None):
        return [item.to_dict() for item in state.list_items(status, domain)]

    @app.post("/api/records/{record_id}/feedback")
    def submit_feedback(record_id: str, body: FeedbackRequest):
        if not body.post_edit.strip():
            raise HTTPException(status_code=400, detail="post_edit must be non-empty")
        with state.lock:
            item = state.items.get(record_id)
            if item is None:
                raise HTTPException(status_code=404, detail=f"no review item {record_id!r}")
            if item.status == STATUS_REVIEWED:
                raise HTTPException(status_code=409, detail="already reviewed")
            demo = DemonstrationRecord(
                id="",
                domain=item.domain,
                source=item.source,
                hypothesis=item.final,
                reference=body.post_edit,
                feedback=generate_feedback(item.final, body.post_edit).instructions,
                provenance=PROVENANCE_HUMAN,
            )
            try:
                demo_id = state.store.append(demo)
            except DuplicateRecordError:
                raise HTTPException(status_code=409, detail="duplicate demonstration content") from None
            item.status = STATUS_REVIEWED
            item.reviewer_note = body.reviewer_note
            state.domain_index(item.domain)     # eager rebuild while we hold the lock
            return state.store.get(demo_id).to_dict()

    @app.get("/api/demos/search")
    def search_demos(q: str, domain: str, k: int = 0):
        if not q.strip():
            raise HTTPException(status_code=400, detail="query must be non-empty")
        shots = k if k > 0 else state.config.retrieval.shots
        try:
            retrieval = replace(state.config.retrieval, shots=shots)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        index, lookup = state.domain_index(domain)
        hits = retrieve(index, q, retrieval)
        results = []
        for hit in hits:
            record = lookup[hit.record_id]
            results.append(
                {
                    "id": record.id,
                    "bm25": hit.bm25,
                    "recall": hit.recall,
                    "source": record.source,
                    "hypothesis": record.hypothesis,
                    "reference": record.reference,
                    "feedback": list(record.feedback),
                    "provenance": record.provenance,
                }
            )
        return results

    @app.get("/api/metrics/summary")
    def metrics_summary():
        with state.lock:
            items = list(state.items.values())
            demos = state.store.records()
        return {
            "records": len(items),
            "pending": sum(1 for item in items if item.status == STATUS_PENDING),
            "reviewed": sum(1 for item in items if item.status == STATUS_REVIEWED),
            "human_demos": sum(1 for rec in demos if rec.provenance == PROVENANCE_HUMAN),
            "simulated_demos": sum(1 for rec in demos if rec.provenance != PROVENANCE_HUMAN),
        }

    @app.post("/api/feedback/preview")
    def preview_feedback(body: PreviewRequest):
        return {"instructions": list(generate_feedback(body.hypothesis, body.reference).instructions)}

    return app
