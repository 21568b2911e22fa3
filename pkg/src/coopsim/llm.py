"""Model backends: a local model server over HTTP, a scripted stand-in and a
record/replay cache."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import tempfile
import time
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from urllib.parse import urlparse

import requests

log = logging.getLogger(__name__)

DEFAULT_URL = "http://localhost:11434"
URL_ENV = "COOP_LLM_URL"
DEFAULT_TIMEOUT = 120.0
DEFAULT_TEMPERATURE = 0.7
DEFAULT_MAX_TOKENS = 256
STATUS_MESSAGE = "Status: proceeding with my current target."


@dataclass(frozen=True)
class LlmRequest:
    model: str
    prompt: str
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS
    stop: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be non-empty")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")


@dataclass(frozen=True)
class LlmResponse:
    text: str
    model: str
    latency_ms: float = 0.0
    from_cache: bool = False


class LlmError(RuntimeError):
    """Base class for backend failures; ``digest`` identifies the request."""

    def __init__(self, message: str, digest: str):
        super().__init__(f"{message} [request {digest[:12]}]")
        self.digest = digest


class BackendUnreachable(LlmError):
    pass


class BackendHTTPError(LlmError):
    def __init__(self, message: str, digest: str, status: int):
        super().__init__(message, digest)
        self.status = status


class MalformedReply(LlmError):
    pass


class CacheMiss(LlmError):
    pass


class ScriptError(LlmError):
    pass


def cache_key(req: LlmRequest) -> str:
    """SHA-256 over a canonical JSON encoding of every request field."""
    canonical = json.dumps(
        {
            "model": req.model,
            "prompt": req.prompt,
            "temperature": float(req.temperature),
            "max_tokens": int(req.max_tokens),
            "stop": list(req.stop) if req.stop is not None else None,
        },
        sort_keys=True,
        ensure_ascii=False,
        separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class Backend:
    name = "backend"

    def generate(self, req: LlmRequest) -> LlmResponse:
        raise NotImplementedError


def generate(backend: Backend, req: LlmRequest) -> LlmResponse:
    return backend.generate(req)


class HttpBackend(Backend):
    """Non-streaming client for an Ollama-style ``/api/generate`` endpoint."""

    name = "http"

    def __init__(self, base_url: str | None = None, timeout: float = DEFAULT_TIMEOUT):
        base_url = base_url or os.environ.get(URL_ENV) or DEFAULT_URL
        parsed = urlparse(base_url)
        if parsed.scheme not in ("http", "https") or not parsed.netloc:
            raise ValueError(f"invalid server URL {base_url!r}")
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def generate(self, req: LlmRequest) -> LlmResponse:
        digest = cache_key(req)
        url = f"{self.base_url}/api/generate"
        options = {"temperature": req.temperature, "num_predict": req.max_tokens}
        if req.stop:
            options["stop"] = list(req.stop)
        body = {"model": req.model, "prompt": req.prompt, "stream": False, "options": options}
        start = time.perf_counter()
        try:
            resp = requests.post(url, json=body, timeout=self.timeout)
        except requests.Timeout:
            raise BackendUnreachable(f"timed out after {self.timeout}s waiting for {url}", digest) from None
        except requests.RequestException as exc:
            raise BackendUnreachable(f"cannot reach model server at {url}: {exc}", digest) from None
        latency = (time.perf_counter() - start) * 1000.0
        if not 200 <= resp.status_code < 300:
            raise BackendHTTPError(f"{url} returned HTTP {resp.status_code}: {resp.text[:200]}", digest,
                                   resp.status_code)
        try:
            text = resp.json()["response"]
        except (ValueError, KeyError, TypeError):
            raise MalformedReply(f"reply from {url} has no 'response' field", digest) from None
        if not isinstance(text, str):
            raise MalformedReply(f"'response' from {url} is not a string", digest)
        return LlmResponse(text, req.model, latency, False)


# --- scripted policies -------------------------------------------------------

_OPTION = re.compile(r"^([A-Z]+)\. (.+)$")
_GRAB_ID = re.compile(r"\(([^()]+)\)\s*$")


def _section(prompt: str, header: str) -> list[str] | None:
    lines = prompt.splitlines()
    try:
        start = lines.index(header)
    except ValueError:
        return None
    out = []
    for line in lines[start + 1:]:
        if not line.strip():
            break
        out.append(line)
    return out


def parse_options(prompt: str) -> list[tuple[str, str]] | None:
    """Lettered options under the first ``Available actions:`` header, or None
    when the prompt has no such section."""
    lines = _section(prompt, "Available actions:")
    if lines is None:
        return None
    options = [m.groups() for m in map(_OPTION.match, lines) if m]
    if not options:
        raise ValueError("available-actions section has no lettered options")
    return options


def scripted_choice(prompt: str, policy: str = "greedy") -> str:
    """Deterministic stand-in for a model; a pure function of the prompt.

    ``greedy``: deliver when possible, else fetch the smallest object id,
    else explore the first room not yet explored, else wait.
    ``wait``: always wait.
    """
    options = parse_options(prompt)
    if options is None:
        return STATUS_MESSAGE
    by_text = {text: label for label, text in options}
    wait = by_text.get("wait", options[-1][0])
    if policy == "wait":
        return wait
    if policy != "greedy":
        raise ValueError(f"unknown scripted policy {policy!r}")

    for label, text in options:
        if text.startswith("go put "):
            return label
    grabs = []
    for label, text in options:
        if text.startswith("go grab "):
            m = _GRAB_ID.search(text)
            grabs.append((m.group(1) if m else text, label))
    if grabs:
        return min(grabs)[1]
    done = set(_section(prompt, "Actions taken:") or ())
    for label, text in options:
        if text.startswith("go explore ") and text not in done:
            return label
    return wait


class ScriptedBackend(Backend):
    name = "scripted"

    def __init__(self, policy: str = "greedy"):
        if policy not in ("greedy", "wait"):
            raise ValueError(f"unknown scripted policy {policy!r}")
        self.policy = policy

    def generate(self, req: LlmRequest) -> LlmResponse:
        try:
            text = scripted_choice(req.prompt, self.policy)
        except ValueError as exc:
            raise ScriptError(str(exc), cache_key(req)) from None
        return LlmResponse(text, req.model, 0.0, False)


class ReplayBackend(Backend):
    """Serves responses from a directory of ``<digest>.json`` files.

    On a miss the fallback backend (if any) is consulted and its answer is
    recorded atomically for next time.
    """

    name = "replay"

    def __init__(self, cache_dir: str | Path, fallback: Backend | None = None):
        self.cache_dir = Path(cache_dir)
        self.fallback = fallback

    def path_for(self, digest: str) -> Path:
        return self.cache_dir / f"{digest}.json"

    def generate(self, req: LlmRequest) -> LlmResponse:
        digest = cache_key(req)
        path = self.path_for(digest)
        if path.exists():
            entry = json.loads(path.read_text(encoding="utf-8"))
            return LlmResponse(entry["response"]["text"], entry["response"]["model"], 0.0, True)
        if self.fallback is None:
            raise CacheMiss("no cached response and no fallback backend", digest)
        resp = self.fallback.generate(req)
        self._store(path, req, resp)
        return resp

    def _store(self, path: Path, req: LlmRequest, resp: LlmResponse) -> None:
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        entry = {
            "request": asdict(req),
            "response": {"text": resp.text, "model": resp.model},
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        fd, tmp = tempfile.mkstemp(dir=self.cache_dir, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(entry, fh, indent=2, sort_keys=True, ensure_ascii=False)
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        log.debug("cached response %s", path.name)
