"""Chat-model access with two interchangeable backends.

The live backend speaks the common chat-completions wire protocol over HTTPS
with retry and a request rate cap. The replay backend answers from a JSONL
fixture file keyed by a canonical digest of (messages, params), which makes
whole pipeline runs deterministic and network-free.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field

import httpx

log = logging.getLogger(__name__)

ROLES = ("system", "user", "assistant")

BACKEND_LIVE = "live"
BACKEND_REPLAY = "replay"

API_KEY_ENV = "HILMT_API_KEY"
DEFAULT_ENDPOINT = "https://api.openai.com/v1/chat/completions"


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown role: {self.role!r}")
        if self.role in ("user", "assistant") and not self.content:
            raise ValueError(f"{self.role} message content must be non-empty")


@dataclass(frozen=True)
class GenerationParams:
    # paper-matching defaults: sampling left at temperature/top_p = 1
    model: str = "gpt-3.5-turbo"
    temperature: float = 1.0
    top_p: float = 1.0
    max_output_tokens: int | None = None

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if not 0 < self.top_p <= 1:
            raise ValueError("top_p must be in (0, 1]")
        if self.max_output_tokens is not None and self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be positive")


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    backoff_base: float = 1.0       # seconds; doubles per retry


@dataclass(frozen=True)
class GatewayConfig:
    backend: str = BACKEND_LIVE
    endpoint: str = DEFAULT_ENDPOINT
    api_key_env: str = API_KEY_ENV
    fixture_path: str | None = None
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    max_inflight: int = 4


class GatewayError(Exception):
    """Live request failed after the retry policy was exhausted."""

    def __init__(self, message: str, attempts: int = 1):
        super().__init__(message)
        self.attempts = attempts


class FixtureMissError(Exception):
    """Replay lookup failed; carries the digest and the prompt it hashed."""

    def __init__(self, digest: str, prompt: str):
        super().__init__(f"no fixture for digest {digest}")
        self.digest = digest
        self.prompt = prompt


def prompt_digest(messages: list[ChatMessage], params: GenerationParams) -> str:
    """Canonical digest of a chat request.

    Invariant to serialization field order (keys are sorted) but sensitive to
    role, content, message order, and every generation parameter.
    """
    payload = {
        "messages": [{"role": m.role, "content": m.content} for m in messages],
        "params": {
            "model": params.model,
            "temperature": params.temperature,
            "top_p": params.top_p,
            "max_output_tokens": params.max_output_tokens,
        },
    }
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _render_prompt(messages: list[ChatMessage]) -> str:
    return "\n".join(f"[{m.role}] {m.content}" for m in messages)


def _check_messages(messages: list[ChatMessage]):
    if not any(m.role == "user" for m in messages):
        raise ValueError("chat requires at least one user message")


class ReplayBackend:
    """Deterministic digest -> reply lookup over a JSONL fixture file."""

    def __init__(self, fixture_path: str):
        self.fixture_path = fixture_path
        self._replies: dict[str, str] = {}
        if os.path.exists(fixture_path):
            with open(fixture_path, encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    if not line.strip():
                        continue
                    try:
                        entry = json.loads(line)
                        digest, reply = entry["digest"], entry["reply"]
                    except (json.JSONDecodeError, KeyError, TypeError):
                        raise ValueError(f"{fixture_path}: line {lineno}: bad fixture entry") from None
                    # duplicate digests allowed; the last entry wins
                    self._replies[digest] = reply

    def __len__(self) -> int:
        return len(self._replies)

    def chat(self, messages: list[ChatMessage], params: GenerationParams) -> ChatMessage:
        _check_messages(messages)
        digest = prompt_digest(messages, params)
        if digest not in self._replies:
            raise FixtureMissError(digest, _render_prompt(messages))
        return ChatMessage("assistant", self._replies[digest])

    def record(self, messages: list[ChatMessage], params: GenerationParams, reply: str) -> dict:
        """Append a digest -> reply fixture entry and serve it from now on."""
        digest = prompt_digest(messages, params)
        entry = {"digest": digest, "reply": reply}
        with open(self.fixture_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, ensure_ascii=False) + "\n")
        self._replies[digest] = reply
        return entry


class LiveBackend:
    """HTTPS chat-completions client with retry and an in-flight cap."""

    def __init__(
        self,
        config: GatewayConfig,
        client: httpx.Client | None = None,
        sleeper=time.sleep,
        api_key: str | None = None,
    ):
        self.config = config
        key = api_key if api_key is not None else os.environ.get(config.api_key_env)
        if not key:
            raise GatewayError(f"credential environment variable {config.api_key_env} is not set")
        self._key = key
        self._client = client or httpx.Client(timeout=60.0)
        self._sleep = sleeper
        self._gate = threading.BoundedSemaphore(config.max_inflight)

    def chat(self, messages: list[ChatMessage], params: GenerationParams) -> ChatMessage:
        _check_messages(messages)
        body = {
            "model": params.model,
            "messages": [{"role": m.role, "content": m.content} for m in messages],
            "temperature": params.temperature,
            "top_p": params.top_p,
        }
        if params.max_output_tokens is not None:
            body["max_tokens"] = params.max_output_tokens
        policy = self.config.retry
        failure = "request failed"
        for attempt in range(1, policy.max_attempts + 1):
            try:
                with self._gate:
                    response = self._client.post(
                        self.config.endpoint,
                        json=body,
                        headers={"Authorization": f"Bearer {self._key}"},
                    )
            except httpx.HTTPError as exc:
                failure = f"transport error: {exc}"
            else:
                status = response.status_code
                if status == 200:
                    return ChatMessage("assistant", self._extract(response))
                if status != 429 and status < 500:
                    raise GatewayError(f"HTTP {status}: {response.text[:200]}", attempts=attempt)
                failure = f"HTTP {status}"
            if attempt < policy.max_attempts:
                delay = policy.backoff_base * 2 ** (attempt - 1)
                log.warning("chat attempt %d failed (%s); retrying in %.1fs", attempt, failure, delay)
                self._sleep(delay)
        raise GatewayError(f"{failure} after {policy.max_attempts} attempts", attempts=policy.max_attempts)

    @staticmethod
    def _extract(response: httpx.Response) -> str:
        try:
            content = response.json()["choices"][0]["message"]["content"]
        except (json.JSONDecodeError, KeyError, IndexError, TypeError):
            raise GatewayError("malformed chat completion response") from None
        if not isinstance(content, str) or not content:
            raise GatewayError("chat completion carried no text content")
        return content


class RecordingGateway:
    """Wrapper that logs every exchange, optionally writing replay fixtures.

    exchanges holds (messages, params, reply_text) in call order; tests use it
    to assert what actually went over the wire.
    """

    def __init__(self, inner, fixtures: ReplayBackend | None = None):
        self._inner = inner
        self._fixtures = fixtures
        self._lock = threading.Lock()
        self.exchanges: list[tuple[tuple[ChatMessage, ...], GenerationParams, str]] = []

    def chat(self, messages: list[ChatMessage], params: GenerationParams) -> ChatMessage:
        reply = self._inner.chat(messages, params)
        with self._lock:
            self.exchanges.append((tuple(messages), params, reply.content))
            if self._fixtures is not None:
                self._fixtures.record(messages, params, reply.content)
        return reply

    def prompts(self) -> list[str]:
        with self._lock:
            return [_render_prompt(list(msgs)) for msgs, _, _ in self.exchanges]


def create_gateway(config: GatewayConfig):
    """Build the backend named by config.backend."""
    if config.backend == BACKEND_REPLAY:
        if not config.fixture_path:
            raise ValueError("replay backend requires a fixture path")
        return ReplayBackend(config.fixture_path)
    if config.backend == BACKEND_LIVE:
        return LiveBackend(config)
    raise ValueError(f"unknown gateway backend: {config.backend!r}")
