"""Chat-completion client with retries, exponential backoff and request pacing."""

from __future__ import annotations

import os
import random
import threading
import time
from collections.abc import Callable, Mapping, Sequence
from dataclasses import asdict, dataclass, field
from typing import Any

import httpx

from planeval.errors import (
    AuthError,
    ConfigError,
    EndpointError,
    MalformedResponse,
    RetriesExhausted,
    Timeout,
)

DEFAULT_KEY_VARIABLE = "PLANEVAL_API_KEY"
BACKOFF_BASE = 1.0
BACKOFF_FACTOR = 2.0
BACKOFF_JITTER = 0.5
RETRYABLE_STATUS = frozenset({408, 409, 429, 500, 502, 503, 504})


@dataclass(frozen=True)
class ChatEndpointConfig:
    base_url: str
    model_name: str
    api_key_source: str = DEFAULT_KEY_VARIABLE
    temperature: float = 0.0
    max_tokens: int = 2048
    timeout_seconds: int = 60
    max_retries: int = 3
    requests_per_minute: int | None = None

    def __post_init__(self):
        if not self.base_url or not self.model_name:
            raise ConfigError("base_url and model_name are required")
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise ConfigError("max_tokens must be positive")
        if self.timeout_seconds < 1:
            raise ConfigError("timeout_seconds must be at least 1")
        if self.max_retries < 0:
            raise ConfigError("max_retries must be >= 0")
        if self.requests_per_minute is not None and self.requests_per_minute < 1:
            raise ConfigError("requests_per_minute must be positive")

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> ChatEndpointConfig:
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown endpoint fields: {sorted(extra)}")
        return cls(**d)

    def to_dict(self) -> dict[str, Any]:
        # holds the variable name only, never the key itself
        return asdict(self)


@dataclass
class Completion:
    text: str
    retries: int = 0
    usage: dict[str, int] | None = None
    sleeps: list[float] = field(default_factory=list)


class TokenBucket:
    """Paces callers to ``rate_per_minute`` with a burst of one; thread-safe."""

    def __init__(self, rate_per_minute: int, clock: Callable[[], float], sleep: Callable[[float], None]):
        self.interval = 60.0 / rate_per_minute
        self.clock = clock
        self.sleep = sleep
        self._next = None
        self._lock = threading.Lock()

    def acquire(self) -> float:
        with self._lock:
            now = self.clock()
            if self._next is None or self._next <= now:
                self._next = now + self.interval
                return 0.0
            wait = self._next - now
            self._next += self.interval
        self.sleep(wait)
        return wait


def backoff_delay(attempt: int, u: float, base: float = BACKOFF_BASE, jitter: float = BACKOFF_JITTER) -> float:
    """Sleep before retry ``attempt`` (1-based); ``u`` in [0, 1) picks the jitter."""
    return base * BACKOFF_FACTOR ** (attempt - 1) * (1.0 + jitter * (2.0 * u - 1.0))


class ChatClient:
    """Sends message lists to ``{base_url}/chat/completions``.

    ``transport``, ``sleep``, ``clock`` and ``rng`` are injectable so tests can
    run against recorded fixtures with a fake clock and no network.
    """

    def __init__(
        self,
        config: ChatEndpointConfig,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
        clock: Callable[[], float] = time.monotonic,
        rng: random.Random | None = None,
        environ: Mapping[str, str] | None = None,
    ):
        self.config = config
        self.sleep = sleep
        self.environ = os.environ if environ is None else environ
        self._rng = rng or random.Random()
        self._rng_lock = threading.Lock()
        self._transport = transport
        self._http: httpx.Client | None = None
        self._http_lock = threading.Lock()
        self._bucket = (
            TokenBucket(config.requests_per_minute, clock, sleep) if config.requests_per_minute else None
        )

    def _client(self) -> httpx.Client:
        with self._http_lock:
            if self._http is None:
                self._http = httpx.Client(transport=self._transport, timeout=self.config.timeout_seconds)
            return self._http

    def close(self) -> None:
        if self._http is not None:
            self._http.close()

    def _key(self) -> str:
        key = self.environ.get(self.config.api_key_source, "")
        if not key:
            raise AuthError(f"environment variable {self.config.api_key_source} is not set")
        return key

    def _jitter(self) -> float:
        with self._rng_lock:
            return self._rng.random()

    def complete(self, messages: Sequence[Mapping[str, str]]) -> Completion:
        key = self._key()
        if not messages:
            raise ValueError("messages must be non-empty")
        cfg = self.config
        url = cfg.base_url.rstrip("/") + "/chat/completions"
        body = {
            "model": cfg.model_name,
            "messages": [{"role": m["role"], "content": m["content"]} for m in messages],
            "temperature": cfg.temperature,
            "max_tokens": cfg.max_tokens,
        }
        headers = {"Authorization": f"Bearer {key}"}
        sleeps: list[float] = []
        last_error = "no attempt made"
        timed_out = False
        for attempt in range(cfg.max_retries + 1):
            if attempt:
                delay = backoff_delay(attempt, self._jitter())
                sleeps.append(delay)
                self.sleep(delay)
            if self._bucket is not None:
                self._bucket.acquire()
            try:
                resp = self._client().post(url, json=body, headers=headers)
            except httpx.TimeoutException as exc:
                last_error, timed_out = f"timeout: {exc}", True
                continue
            except httpx.TransportError as exc:
                last_error, timed_out = f"transport error: {exc}", False
                continue
            if resp.status_code in (401, 403):
                raise AuthError(f"endpoint rejected credentials ({resp.status_code})")
            if resp.status_code in RETRYABLE_STATUS:
                last_error, timed_out = f"HTTP {resp.status_code}", False
                continue
            if resp.status_code >= 400:
                raise EndpointError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            return Completion(_extract_text(resp), attempt, _usage(resp), sleeps)
        attempts = cfg.max_retries + 1
        if timed_out:
            raise Timeout(f"request timed out after {attempts} attempts")
        raise RetriesExhausted(f"gave up after {attempts} attempts: {last_error}", attempts)


def _extract_text(resp: httpx.Response) -> str:
    try:
        data = resp.json()
        text = data["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise MalformedResponse(f"unexpected response body: {resp.text[:200]!r}") from exc
    if not isinstance(text, str):
        raise MalformedResponse("message content is not a string")
    return text


def _usage(resp: httpx.Response) -> dict[str, int] | None:
    usage = resp.json().get("usage")
    if not isinstance(usage, dict):
        return None
    return {k: int(v) for k, v in usage.items() if isinstance(v, (int, float))}


def complete(config: ChatEndpointConfig, messages: Sequence[Mapping[str, str]], **client_kwargs) -> str:
    """One-shot convenience wrapper returning the assistant text."""
    client = ChatClient(config, **client_kwargs)
    try:
        return client.complete(messages).text
    finally:
        client.close()
