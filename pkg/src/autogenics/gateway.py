"""LLM access layer: providers, retries, and a persistent daily quota.

Free-tier LLM APIs meter requests per day, so the gateway books every
completion attempt against a date-keyed ledger before any network traffic
happens and rolls the unit back if the call ultimately fails. Transport
errors are retried with exponential backoff; an exhausted quota or a missing
API key is surfaced immediately and never retried.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Protocol

import httpx

logger = logging.getLogger(__name__)

DEFAULT_DAILY_QUOTA = 50
DEFAULT_API_KEY_ENV = "AUTOGENICS_API_KEY"


class GatewayError(Exception):
    """Base class for gateway failures."""


class QuotaExhausted(GatewayError):
    """The day's request budget is spent."""


class TransportError(GatewayError):
    """Network-level failure or non-2xx provider response; retryable."""


class EmptyResponse(GatewayError):
    """Provider returned a blank completion."""


class AuthMissing(GatewayError):
    """Remote provider selected but its API key env var is unset."""


@dataclass(frozen=True)
class ProviderConfig:
    provider: str = "mock"
    endpoint: str | None = None
    api_key_env: str = DEFAULT_API_KEY_ENV
    model_name: str = "gemini-1.5-flash"
    timeout_s: float = 30.0
    daily_quota: int = DEFAULT_DAILY_QUOTA
    max_retries: int = 2
    backoff_base_s: float = 0.5
    quota_path: Path | None = None

    def __post_init__(self) -> None:
        if self.provider not in ("mock", "remote"):
            raise ValueError(f"unknown provider {self.provider!r}")
        if self.provider == "remote" and not self.endpoint:
            raise ValueError("remote provider requires an endpoint")
        if self.daily_quota < 1:
            raise ValueError("daily_quota must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


@dataclass(frozen=True)
class CompletionResult:
    text: str
    provider_latency_s: float
    attempt_count: int


class QuotaLedger:
    """Daily request counter, optionally persisted as a small JSON file.

    The file maps UTC dates (YYYY-MM-DD) to request counts; stale dates are
    pruned on write. Updates go through an atomic replace so a crash cannot
    leave a torn file.
    """

    def __init__(self, limit: int, path: Path | None = None) -> None:
        if limit < 1:
            raise ValueError("quota limit must be positive")
        self._limit = limit
        self._path = path
        self._lock = threading.Lock()

    @property
    def limit(self) -> int:
        return self._limit

    @staticmethod
    def _today() -> str:
        return datetime.now(timezone.utc).strftime("%Y-%m-%d")

    def _load(self) -> dict[str, int]:
        if self._path is None or not self._path.exists():
            return {}
        try:
            data = json.loads(self._path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            logger.warning("quota file %s unreadable (%s); starting fresh", self._path, exc)
            return {}
        if not isinstance(data, dict):
            logger.warning("quota file %s malformed; starting fresh", self._path)
            return {}
        counts: dict[str, int] = {}
        for key, value in data.items():
            if isinstance(key, str) and isinstance(value, int) and value >= 0:
                counts[key] = value
        return counts

    def _store(self, counts: dict[str, int]) -> None:
        if self._path is None:
            self._memory = counts  # type: ignore[attr-defined]
            return
        today = self._today()
        counts = {k: v for k, v in counts.items() if k >= today}
        tmp = self._path.with_suffix(self._path.suffix + ".tmp")
        self._path.parent.mkdir(parents=True, exist_ok=True)
        tmp.write_text(json.dumps(counts, indent=2) + "\n", encoding="utf-8")
        os.replace(tmp, self._path)

    def _counts(self) -> dict[str, int]:
        if self._path is None:
            return getattr(self, "_memory", {})
        return self._load()

    def used_today(self) -> int:
        with self._lock:
            return self._counts().get(self._today(), 0)

    def remaining_today(self) -> int:
        return max(0, self._limit - self.used_today())

    def reserve(self) -> None:
        """Book one request for today or raise QuotaExhausted."""
        with self._lock:
            counts = self._counts()
            today = self._today()
            used = counts.get(today, 0)
            if used >= self._limit:
                raise QuotaExhausted(
                    f"daily quota of {self._limit} requests reached for {today}"
                )
            counts[today] = used + 1
            self._store(counts)

    def release(self) -> None:
        """Return one previously reserved request (failed call rollback)."""
        with self._lock:
            counts = self._counts()
            today = self._today()
            used = counts.get(today, 0)
            if used > 0:
                counts[today] = used - 1
                self._store(counts)


class Provider(Protocol):
    name: str

    def complete(self, model: str, prompt: str, timeout_s: float) -> str: ...


class MockProvider:
    """Offline provider for tests and demos.

    Responses are chosen by first-registered substring match on the prompt;
    otherwise an optional responder callable, and failing that an echo
    envelope that names the prompt's hash so tests can assert the exact
    prompt that travelled.
    """

    name = "mock"

    def __init__(self, responder: Callable[[str], str] | None = None) -> None:
        self._rules: list[tuple[str, str]] = []
        self._responder = responder
        self._fail_next = 0
        self.calls: list[str] = []

    def register(self, needle: str, response: str) -> None:
        if not needle:
            raise ValueError("needle must be non-empty")
        if any(existing == needle for existing, _ in self._rules):
            raise ValueError(f"duplicate rule for needle {needle!r}")
        self._rules.append((needle, response))

    def fail_next(self, count: int = 1) -> None:
        """Make the next `count` calls raise TransportError."""
        self._fail_next = count

    def complete(self, model: str, prompt: str, timeout_s: float) -> str:
        self.calls.append(prompt)
        if self._fail_next > 0:
            self._fail_next -= 1
            raise TransportError("simulated transport failure")
        for needle, response in self._rules:
            if needle in prompt:
                return response
        if self._responder is not None:
            return self._responder(prompt)
        digest = hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:16]
        return f"[mock:{digest}]\n{prompt}"


class RemoteHTTPProvider:
    """Thin JSON-over-HTTP client: POST {model, prompt} -> {text}."""

    name = "remote"

    def __init__(self, endpoint: str, api_key: str) -> None:
        self._endpoint = endpoint
        self._api_key = api_key

    def complete(self, model: str, prompt: str, timeout_s: float) -> str:
        try:
            response = httpx.post(
                self._endpoint,
                json={"model": model, "prompt": prompt},
                headers={"Authorization": f"Bearer {self._api_key}"},
                timeout=timeout_s,
            )
        except httpx.HTTPError as exc:
            raise TransportError(f"request failed: {exc}") from exc
        if response.status_code != 200:
            raise TransportError(f"provider returned HTTP {response.status_code}")
        try:
            payload = response.json()
        except ValueError as exc:
            raise TransportError("provider returned non-JSON body") from exc
        text = payload.get("text") if isinstance(payload, dict) else None
        if not isinstance(text, str):
            raise TransportError("provider response missing 'text' field")
        return text


class Gateway:
    """Quota-aware completion front door.

    `complete` reserves a quota unit, then tries the provider up to
    1 + max_retries times, backing off exponentially between transport
    failures. The unit is rolled back when the call fails outright, so the
    ledger always reflects successful completions plus in-flight work.
    """

    def __init__(
        self,
        config: ProviderConfig,
        provider: Provider | None = None,
        ledger: QuotaLedger | None = None,
    ) -> None:
        self._config = config
        # An injected ledger lets several gateways draw on one daily budget.
        self._ledger = ledger or QuotaLedger(config.daily_quota, config.quota_path)
        if provider is not None:
            self._provider = provider
        elif config.provider == "mock":
            self._provider = MockProvider()
        else:
            self._provider = None  # resolved lazily so auth errors are typed
        self._sleep = time.sleep

    @property
    def config(self) -> ProviderConfig:
        return self._config

    @property
    def ledger(self) -> QuotaLedger:
        return self._ledger

    @property
    def provider_name(self) -> str:
        if self._provider is not None:
            return self._provider.name
        return self._config.provider

    def _resolve_provider(self) -> Provider:
        if self._provider is not None:
            return self._provider
        api_key = os.environ.get(self._config.api_key_env, "")
        if not api_key:
            raise AuthMissing(
                f"set {self._config.api_key_env} to use the remote provider"
            )
        assert self._config.endpoint is not None
        self._provider = RemoteHTTPProvider(self._config.endpoint, api_key)
        return self._provider

    def complete(self, prompt: str) -> CompletionResult:
        if not prompt or not prompt.strip():
            raise ValueError("prompt must be non-empty")
        provider = self._resolve_provider()  # auth precedes quota and network
        self._ledger.reserve()
        attempts = 1 + self._config.max_retries
        started = time.monotonic()
        try:
            for attempt in range(1, attempts + 1):
                try:
                    text = provider.complete(
                        self._config.model_name, prompt, self._config.timeout_s
                    )
                except TransportError as exc:
                    if attempt == attempts:
                        raise
                    delay = self._config.backoff_base_s * (2 ** (attempt - 1))
                    logger.warning(
                        "transport failure (attempt %d/%d): %s; retrying in %.2fs",
                        attempt, attempts, exc, delay,
                    )
                    self._sleep(delay)
                    continue
                if not text or not text.strip():
                    raise EmptyResponse("provider returned an empty completion")
                return CompletionResult(
                    text=text,
                    provider_latency_s=time.monotonic() - started,
                    attempt_count=attempt,
                )
            raise AssertionError("unreachable")
        except GatewayError:
            self._ledger.release()
            raise


def annotating_responder(language_comment: str = "#") -> Callable[[str], str]:
    """Build a mock responder that appends a trailing comment to each line.

    The responder digs the code payload out of the generation prompts (the
    text between "code snippet: " and the sentence that follows the payload)
    and returns it with a deterministic short comment per non-blank line, so
    end-to-end tests exercise the real parse/verify/filter path without a
    live model.
    """

    def respond(prompt: str) -> str:
        marker = "code snippet: "
        start = prompt.find(marker)
        if start == -1:
            return "ok."
        start += len(marker)
        ends = [prompt.find(stop, start) for stop in (". Generate inline", ", considering")]
        ends = [e for e in ends if e != -1]
        code = prompt[start:min(ends)] if ends else prompt[start:]
        annotated = []
        for i, line in enumerate(code.split("\n"), start=1):
            if line.strip():
                annotated.append(f"{line}  {language_comment} step {i}")
            else:
                annotated.append(line)
        return "```\n" + "\n".join(annotated) + "\n```"

    return respond
