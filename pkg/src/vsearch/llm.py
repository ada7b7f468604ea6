"""LLM client backends.

ScriptedLlm is a pure function of the prompt, driven by a regex rule table,
and backs every test. RemoteLlm speaks the shared completion protocol.
Model names are carried per call so one backend can serve the routing,
chat, and rerank slots.
"""

from __future__ import annotations

import json
import re
from typing import Protocol

import requests

from .errors import LlmUnavailable

DEFAULT_MAX_TOKENS = 512


class LlmClient(Protocol):
    def complete(self, model: str, prompt: str, max_tokens: int = DEFAULT_MAX_TOKENS) -> str: ...


class ScriptedLlm:
    """Table-driven backend: first rule whose regex matches the prompt wins.

    Rules: [{"pattern": <regex searched in the prompt>, "response": <text>}].
    No match falls back to the default response; with no default the call
    raises LlmUnavailable, which exercises the degraded paths.
    """

    def __init__(self, rules: list[dict], default: str | None = None) -> None:
        self._rules = [(re.compile(r["pattern"], re.DOTALL), r["response"]) for r in rules]
        self._default = default

    @classmethod
    def from_file(cls, path: str) -> "ScriptedLlm":
        with open(path, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
        return cls(spec.get("rules", []), spec.get("default"))

    def complete(self, model: str, prompt: str, max_tokens: int = DEFAULT_MAX_TOKENS) -> str:
        for pattern, response in self._rules:
            if pattern.search(prompt):
                return response
        if self._default is not None:
            return self._default
        raise LlmUnavailable("no scripted rule matched and no default set")


class FailingLlm:
    """Always-unavailable backend for exercising fallback behavior."""

    def complete(self, model: str, prompt: str, max_tokens: int = DEFAULT_MAX_TOKENS) -> str:
        raise LlmUnavailable("backend configured to fail")


class RemoteLlm:
    """HTTP POST {endpoint}/complete {"model","prompt","max_tokens"} -> {"text"}."""

    def __init__(self, endpoint: str, timeout_ms: int = 30000, retries: int = 2) -> None:
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout_ms / 1000.0
        self.retries = retries

    def complete(self, model: str, prompt: str, max_tokens: int = DEFAULT_MAX_TOKENS) -> str:
        payload = {"model": model, "prompt": prompt, "max_tokens": max_tokens}
        last: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                resp = requests.post(
                    self.endpoint + "/complete", json=payload, timeout=self.timeout
                )
            except requests.RequestException as exc:
                last = exc
                continue
            if resp.status_code != 200:
                last = LlmUnavailable(f"status {resp.status_code}")
                continue
            try:
                text = resp.json()["text"]
            except (ValueError, KeyError, TypeError) as exc:
                raise LlmUnavailable(f"malformed response: {exc}") from exc
            if not isinstance(text, str):
                raise LlmUnavailable("malformed response: text is not a string")
            return text
        raise LlmUnavailable(f"completion failed after retries: {last}")
