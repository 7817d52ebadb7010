"""Local HTTP backend for the browser extension.

Exposes POST /api/generate and GET /api/health on localhost, with CORS opened
to the Q&A site origins the extension runs on. Every error body is JSON of
the shape {"error": code, "message": text} so the extension can render
failures uniformly.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from fastapi import FastAPI, Request
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse

from .engine import CommentEngine, Mode
from .gateway import (
    EmptyResponse,
    Gateway,
    ProviderConfig,
    QuotaExhausted,
    TransportError,
)
from .model import Language, Snippet
from .quartiles import count_loc, quartile_of

logger = logging.getLogger(__name__)

DEFAULT_HOST = "127.0.0.1"
DEFAULT_PORT = 8178
DEFAULT_ALLOWED_ORIGINS = (
    "https://stackoverflow.com",
    "https://*.stackoverflow.com",
)
DEFAULT_MAX_REQUEST_BYTES = 256 * 1024


@dataclass(frozen=True)
class ServiceConfig:
    host: str = DEFAULT_HOST
    port: int = DEFAULT_PORT
    allowed_origins: tuple[str, ...] = DEFAULT_ALLOWED_ORIGINS
    max_request_bytes: int = DEFAULT_MAX_REQUEST_BYTES
    provider: ProviderConfig = field(default_factory=ProviderConfig)

    def __post_init__(self) -> None:
        if not 0 < self.port < 65536:
            raise ValueError(f"port out of range: {self.port}")
        if self.max_request_bytes < 1:
            raise ValueError("max_request_bytes must be positive")


_CONFIG_KEYS = {"host", "port", "allowed_origins", "max_request_bytes", "provider"}
_PROVIDER_KEYS = {
    "provider", "endpoint", "api_key_env", "model_name", "timeout_s",
    "daily_quota", "max_retries", "backoff_base_s", "quota_file",
}


def load_config(path: Path) -> ServiceConfig:
    """Read service settings from a JSON file; unknown keys are rejected."""
    data = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"{path}: unknown config keys: {', '.join(sorted(unknown))}")

    provider = ProviderConfig()
    if "provider" in data:
        pdata = data["provider"]
        if not isinstance(pdata, dict):
            raise ValueError(f"{path}: 'provider' must be a JSON object")
        bad = set(pdata) - _PROVIDER_KEYS
        if bad:
            raise ValueError(f"{path}: unknown provider keys: {', '.join(sorted(bad))}")
        kwargs = dict(pdata)
        if "quota_file" in kwargs:
            kwargs["quota_path"] = Path(kwargs.pop("quota_file"))
        provider = ProviderConfig(**kwargs)

    kwargs = {k: v for k, v in data.items() if k != "provider"}
    if "allowed_origins" in kwargs:
        origins = kwargs["allowed_origins"]
        if not isinstance(origins, list) or not all(isinstance(o, str) for o in origins):
            raise ValueError(f"{path}: allowed_origins must be a list of strings")
        kwargs["allowed_origins"] = tuple(origins)
    return ServiceConfig(provider=provider, **kwargs)


def _origin_matcher(patterns: tuple[str, ...]) -> Callable[[str], bool]:
    """Exact origins plus one-level-or-deeper `*.` wildcard hosts."""
    compiled: list[re.Pattern[str]] = []
    for pattern in patterns:
        if "*" in pattern:
            regex = re.escape(pattern).replace(r"\*", r"[A-Za-z0-9][A-Za-z0-9.-]*")
            compiled.append(re.compile(rf"^{regex}$"))
        else:
            compiled.append(re.compile(rf"^{re.escape(pattern)}$"))

    def match(origin: str) -> bool:
        return any(p.match(origin) for p in compiled)

    return match


class CORSGate:
    """ASGI middleware: answer preflights, echo allow-origin for the allowlist.

    Disallowed origins get responses without any CORS headers, which is what
    makes the browser refuse the cross-origin read.
    """

    def __init__(self, app, allowed_origins: tuple[str, ...]) -> None:
        self._app = app
        self._allowed = _origin_matcher(allowed_origins)

    async def __call__(self, scope, receive, send) -> None:
        if scope["type"] != "http":
            await self._app(scope, receive, send)
            return
        headers = {k.decode("latin-1").lower(): v.decode("latin-1")
                   for k, v in scope.get("headers", [])}
        origin = headers.get("origin")

        if (
            scope["method"] == "OPTIONS"
            and origin is not None
            and "access-control-request-method" in headers
        ):
            response_headers: list[tuple[bytes, bytes]] = [(b"vary", b"origin")]
            if self._allowed(origin):
                response_headers += [
                    (b"access-control-allow-origin", origin.encode("latin-1")),
                    (b"access-control-allow-methods", b"GET, POST, OPTIONS"),
                    (b"access-control-allow-headers", b"Content-Type"),
                    (b"access-control-max-age", b"600"),
                ]
            await send({"type": "http.response.start", "status": 204,
                        "headers": response_headers})
            await send({"type": "http.response.body", "body": b""})
            return

        if origin is not None and self._allowed(origin):
            encoded = origin.encode("latin-1")

            async def send_with_cors(message) -> None:
                if message["type"] == "http.response.start":
                    message.setdefault("headers", [])
                    message["headers"] = list(message["headers"]) + [
                        (b"access-control-allow-origin", encoded),
                        (b"vary", b"origin"),
                    ]
                await send(message)

            await self._app(scope, receive, send_with_cors)
            return

        await self._app(scope, receive, send)


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse({"error": code, "message": message}, status_code=status)


@dataclass(frozen=True)
class _ParsedRequest:
    code: str
    language: Language
    question: str
    mode: Mode


def _parse_generate_request(data: object) -> _ParsedRequest:
    if not isinstance(data, dict):
        raise ValueError("request body must be a JSON object")
    code = data.get("code")
    if not isinstance(code, str) or not code.strip():
        raise ValueError("'code' must be a non-empty string")
    language_raw = data.get("language")
    if not isinstance(language_raw, str):
        raise ValueError("'language' must be \"python\" or \"java\"")
    language = Language.parse(language_raw)

    title = data.get("question_title", "")
    body = data.get("question_body", "")
    if not isinstance(title, str) or not isinstance(body, str):
        raise ValueError("'question_title' and 'question_body' must be strings")

    mode_raw = data.get("mode", Mode.CONTEXT_AWARE.value)
    try:
        mode = Mode(mode_raw)
    except ValueError:
        raise ValueError("'mode' must be \"plain\" or \"context_aware\"") from None

    question = title.strip()
    if body.strip():
        question = f"{question}\n{body.strip()}" if question else body.strip()
    if mode is Mode.CONTEXT_AWARE and not question:
        raise ValueError("context_aware mode requires question_title or question_body")
    return _ParsedRequest(code=code, language=language, question=question, mode=mode)


def create_app(config: ServiceConfig | None = None, gateway: Gateway | None = None) -> FastAPI:
    config = config or ServiceConfig()
    gateway = gateway or Gateway(config.provider)
    engine = CommentEngine(gateway)

    app = FastAPI(title="inline-comment service", docs_url=None, redoc_url=None)
    app.state.engine = engine
    app.state.config = config

    @app.get("/api/health")
    async def health() -> JSONResponse:
        provider = gateway.provider_name
        if gateway.config.provider == "remote" and not os.environ.get(
            gateway.config.api_key_env
        ):
            provider = "unconfigured"
        return JSONResponse({"status": "ok", "provider": provider})

    @app.post("/api/generate")
    async def generate(request: Request):
        declared = request.headers.get("content-length")
        if declared and declared.isdigit() and int(declared) > config.max_request_bytes:
            return _error(413, "payload_too_large",
                          f"request exceeds {config.max_request_bytes} bytes")
        body = await request.body()
        if len(body) > config.max_request_bytes:
            return _error(413, "payload_too_large",
                          f"request exceeds {config.max_request_bytes} bytes")
        try:
            data = json.loads(body)
        except ValueError:
            return _error(400, "bad_request", "request body is not valid JSON")
        try:
            parsed = _parse_generate_request(data)
        except ValueError as exc:
            return _error(400, "bad_request", str(exc))

        snippet = Snippet(
            snippet_id=hashlib.sha256(parsed.code.encode("utf-8")).hexdigest()[:16],
            code=parsed.code,
            language=parsed.language,
            loc=count_loc(parsed.code),
            quartile=quartile_of(count_loc(parsed.code), parsed.language),
            question_id="adhoc",
            answer_id="adhoc",
        )
        context_key = (
            hashlib.sha256(parsed.question.encode("utf-8")).hexdigest()[:16]
            if parsed.question else None
        )
        try:
            annotated = await run_in_threadpool(
                engine.generate,
                snippet,
                question=parsed.question or None,
                mode=parsed.mode,
                context_key=context_key,
            )
        except QuotaExhausted as exc:
            return _error(429, "quota_exhausted", str(exc))
        except (TransportError, EmptyResponse) as exc:
            return _error(502, "upstream_failure", str(exc))
        except Exception:
            logger.exception("generate failed")
            return _error(500, "internal_error", "unexpected server error")

        return JSONResponse(
            {
                "annotated_code": annotated.annotated_code,
                "comments": [c.to_json_dict() for c in annotated.comments],
                "preservation": annotated.preservation.value,
                "mode": annotated.mode.value,
                "context": annotated.context_used,
            }
        )

    app.add_middleware(CORSGate, allowed_origins=config.allowed_origins)
    return app


def run(config: ServiceConfig) -> None:
    """Blocking server entry point used by the CLI."""
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port, log_level="info")
