"""Chat-completion client: the only code path in the package that touches the network."""

from __future__ import annotations

import logging
import os
import threading
import time
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Iterable, Mapping, Optional

import httpx

logger = logging.getLogger(__name__)

API_KEY_ENV = "AVALON_API_KEY"
BASE_URL_ENV = "AVALON_API_BASE"
DEFAULT_BASE_URL = "https://api.openai.com/v1"
DEFAULT_MODEL = "gpt-5.1"
RETRYABLE_STATUS = frozenset({408, 409, 425, 429, 500, 502, 503, 504})


class ReasoningEffort(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


DEFAULT_TIMEOUTS = {
    ReasoningEffort.LOW: 60.0,
    ReasoningEffort.MEDIUM: 180.0,
    ReasoningEffort.HIGH: 300.0,
}


class GatewayError(Exception):
    pass


class CredentialError(GatewayError):
    pass


class GatewayUnavailable(GatewayError):
    pass


@dataclass(frozen=True)
class CompletionRequest:
    system_text: str
    user_text: str
    reasoning_effort: ReasoningEffort = ReasoningEffort.LOW
    model_id: str = DEFAULT_MODEL
    max_attempts: int = 4
    timeout: Optional[float] = None

    @property
    def effective_timeout(self) -> float:
        return self.timeout if self.timeout is not None else DEFAULT_TIMEOUTS[self.reasoning_effort]


@dataclass(frozen=True)
class CompletionResult:
    text: str
    latency: float
    attempt_count: int
    token_usage: Optional[dict[str, int]] = None


class RateLimiter:
    """Spaces request starts at least ``min_interval`` seconds apart."""

    def __init__(self, min_interval: float = 0.0, clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        self.min_interval = min_interval
        self._clock = clock
        self._sleep = sleep
        self._next = 0.0
        self._lock = threading.Lock()

    def acquire(self) -> None:
        if self.min_interval <= 0:
            return
        with self._lock:
            now = self._clock()
            wait = self._next - now
            self._next = max(now, self._next) + self.min_interval
        if wait > 0:
            self._sleep(wait)


class Gateway:
    """Client for an OpenAI-compatible ``/chat/completions`` endpoint.

    Transient failures (connection errors, timeouts, 408/429/5xx) are retried
    with exponential backoff; 401/403 raise :class:`CredentialError` at once.
    Pass ``transport`` (an ``httpx`` transport) to run against a mock server.
    """

    def __init__(
        self,
        api_key: Optional[str] = None,
        base_url: Optional[str] = None,
        *,
        transport: Optional[httpx.BaseTransport] = None,
        max_in_flight: int = 8,
        min_interval: float = 0.0,
        backoff_base: float = 1.0,
        backoff_cap: float = 30.0,
        sleep: Callable[[float], None] = time.sleep,
        clock: Callable[[], float] = time.monotonic,
        extra_body: Optional[Mapping[str, Any]] = None,
    ):
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.base_url = (base_url or os.environ.get(BASE_URL_ENV) or DEFAULT_BASE_URL).rstrip("/")
        self._transport = transport
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self._limiter = RateLimiter(min_interval, clock=clock, sleep=sleep)
        self.backoff_base = backoff_base
        self.backoff_cap = backoff_cap
        self._sleep = sleep
        self._clock = clock
        self.extra_body = dict(extra_body or {})

    def _body(self, request: CompletionRequest) -> dict[str, Any]:
        return {
            "model": request.model_id,
            "messages": [
                {"role": "system", "content": request.system_text},
                {"role": "user", "content": request.user_text},
            ],
            "reasoning_effort": request.reasoning_effort.value,
            **self.extra_body,
        }

    def complete(self, request: CompletionRequest) -> CompletionResult:
        if not self.api_key:
            raise CredentialError(f"no API key; set {API_KEY_ENV}")
        body = self._body(request)
        headers = {"Authorization": f"Bearer {self.api_key}"}
        last_error: Optional[str] = None
        start = self._clock()
        with self._slots, httpx.Client(transport=self._transport, timeout=request.effective_timeout) as client:
            for attempt in range(1, request.max_attempts + 1):
                self._limiter.acquire()
                try:
                    resp = client.post(f"{self.base_url}/chat/completions", json=body, headers=headers)
                except httpx.TransportError as exc:
                    last_error = f"{type(exc).__name__}: {exc}"
                else:
                    if resp.status_code in (401, 403):
                        raise CredentialError(f"provider rejected credentials ({resp.status_code})")
                    if resp.status_code < 300:
                        text, usage = _extract(resp)
                        if text:
                            return CompletionResult(text, self._clock() - start, attempt, usage)
                        last_error = "empty completion"
                    elif resp.status_code in RETRYABLE_STATUS:
                        last_error = f"HTTP {resp.status_code}"
                    else:
                        raise GatewayError(f"HTTP {resp.status_code}: {resp.text[:200]}")
                logger.warning("completion attempt %d/%d failed: %s", attempt, request.max_attempts, last_error)
                if attempt < request.max_attempts:
                    self._sleep(min(self.backoff_cap, self.backoff_base * 2 ** (attempt - 1)))
        raise GatewayUnavailable(f"gave up after {request.max_attempts} attempts: {last_error}")


def _extract(resp: httpx.Response) -> tuple[str, Optional[dict[str, int]]]:
    try:
        data = resp.json()
        text = data["choices"][0]["message"]["content"] or ""
    except (ValueError, KeyError, IndexError, TypeError):
        return "", None
    usage = data.get("usage")
    if isinstance(usage, dict):
        usage = {k: v for k, v in usage.items() if isinstance(v, int)}
    else:
        usage = None
    return text, usage


class OfflineGateway:
    """Stand-in gateway that answers from a local function instead of the network.

    ``responder(request) -> str`` produces the completion text. ``latency``
    is reported verbatim so latency statistics stay deterministic.
    """

    def __init__(self, responder: Callable[[CompletionRequest], str], latency: float = 0.0):
        self.responder = responder
        self.latency = latency
        self.calls: list[CompletionRequest] = []
        self._lock = threading.Lock()

    def complete(self, request: CompletionRequest) -> CompletionResult:
        with self._lock:
            self.calls.append(request)
        return CompletionResult(self.responder(request), self.latency, 1, None)


def record_latency_stats(decisions: Iterable[Mapping[str, Any]]) -> dict[str, float]:
    """Mean latency in seconds per reasoning-effort label.

    Each decision is a mapping with ``effort`` and ``latency`` keys, as
    stored on LLM decision traces in game logs.
    """
    sums: dict[str, float] = defaultdict(float)
    counts: dict[str, int] = defaultdict(int)
    for d in decisions:
        latency = d.get("latency")
        effort = d.get("effort")
        if latency is None or effort is None:
            continue
        effort = ReasoningEffort(effort).value
        sums[effort] += float(latency)
        counts[effort] += 1
    order = [e.value for e in ReasoningEffort]
    return {e: sums[e] / counts[e] for e in order if counts.get(e)}
