"""Chat-completion backends and response parsing.

The remote backend speaks the common ``/v1/chat/completions`` JSON shape
(which also covers local model servers); the scripted backend replays
canned responses by first substring match on the user prompt, which is
what makes the generative pipeline testable offline. Every request and
response pair is appended to a JSON-lines transcript when a logger is
attached.
"""

from __future__ import annotations

import json
import logging
import os
import re
import time
from dataclasses import dataclass
from pathlib import Path

import requests

from .errors import BackendError, EmptyParseError

logger = logging.getLogger(__name__)

API_KEY_ENV = "TAXOFORGE_API_KEY"
CHAT_PATH = "/v1/chat/completions"


@dataclass(frozen=True)
class ChatRequest:
    user: str
    system: str = ""
    temperature: float = 0.0
    max_tokens: int = 1024
    model: str = "default"

    def __post_init__(self):
        if not self.user:
            raise ValueError("user prompt must be non-empty")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class ChatResponse:
    text: str
    finish_reason: str = "stop"


class ScriptedChatBackend:
    """Deterministic mock: first entry whose pattern is a substring of the prompt."""

    def __init__(self, script: list[tuple[str, str]], fallback: str = ""):
        self.script = list(script)
        self.fallback = fallback

    @classmethod
    def from_file(cls, path: str | Path, fallback: str = "") -> "ScriptedChatBackend":
        entries = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls([(e["match"], e["response"]) for e in entries], fallback=fallback)

    def complete(self, req: ChatRequest) -> ChatResponse:
        for pattern, response in self.script:
            if pattern in req.user:
                return ChatResponse(text=response)
        return ChatResponse(text=self.fallback)


class RemoteChatBackend:
    """OpenAI-compatible chat client with bounded retries and backoff."""

    def __init__(
        self,
        base_url: str,
        model: str = "gpt-4",
        timeout: float = 120.0,
        max_retries: int = 3,
    ):
        self.url = base_url.rstrip("/") + CHAT_PATH
        self.model = model
        self.timeout = timeout
        self.max_retries = max_retries

    def complete(self, req: ChatRequest) -> ChatResponse:
        messages = []
        if req.system:
            messages.append({"role": "system", "content": req.system})
        messages.append({"role": "user", "content": req.user})
        payload = {
            "model": req.model if req.model != "default" else self.model,
            "messages": messages,
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(API_KEY_ENV, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        last_error: Exception | None = None
        timed_out = False
        for attempt in range(self.max_retries):
            try:
                resp = requests.post(self.url, json=payload, headers=headers, timeout=self.timeout)
                if resp.ok:
                    choice = resp.json()["choices"][0]
                    reason = choice.get("finish_reason", "stop")
                    return ChatResponse(
                        text=choice["message"]["content"],
                        finish_reason="length" if reason == "length" else "stop",
                    )
                last_error = BackendError(f"HTTP {resp.status_code}: {resp.text[:200]}")
                timed_out = False
            except requests.Timeout as exc:
                last_error = exc
                timed_out = True
            except requests.RequestException as exc:
                last_error = exc
                timed_out = False
            if attempt < self.max_retries - 1:
                time.sleep(2**attempt)
        if timed_out:
            raise TimeoutError(f"chat request timed out after {self.max_retries} attempts")
        raise BackendError(f"chat request failed after {self.max_retries} attempts: {last_error}")


class TranscriptLogger:
    """Appends one JSON line per completed request; deterministic field order."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text("", encoding="utf-8")
        self._seq = 0

    def log(self, req: ChatRequest, resp: ChatResponse) -> None:
        entry = {
            "seq": self._seq,
            "request": {
                "system": req.system,
                "user": req.user,
                "temperature": req.temperature,
                "max_tokens": req.max_tokens,
                "model": req.model,
            },
            "response": {"text": resp.text, "finish_reason": resp.finish_reason},
        }
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")
        self._seq += 1

    @property
    def entries(self) -> int:
        return self._seq


def complete(
    req: ChatRequest,
    backend,
    transcript: TranscriptLogger | None = None,
) -> ChatResponse:
    resp = backend.complete(req)
    if transcript is not None:
        transcript.log(req, resp)
    return resp


_BULLET_RE = re.compile(r"^\s*(?:[-*•]+\s*|\d+[.)]\s*)?")


def parse_name_list(text: str) -> list[str]:
    """Extract type names: split on newlines/commas, strip bullets and quotes.

    Order is preserved; duplicates are dropped case-insensitively, keeping
    the first casing seen. Raises EmptyParseError when nothing survives.
    """
    names: list[str] = []
    seen: set[str] = set()
    for piece in re.split(r"[\n,]", text):
        cleaned = _BULLET_RE.sub("", piece, count=1).strip().strip("\"'").strip()
        if not cleaned:
            continue
        key = cleaned.casefold()
        if key not in seen:
            seen.add(key)
            names.append(cleaned)
    if not names:
        raise EmptyParseError("no names found in response")
    return names
