"""Translation and transcription providers.

Three translator backends share one call shape (text in, English text out):
identity (no-op), reference (deterministic desk-scale stand-in), and remote
(HTTP). The remote ASR client shares the wire conventions.
"""

from __future__ import annotations

import base64
from typing import Protocol

import requests

from .errors import TranslationUnavailable


class Translator(Protocol):
    def translate(self, text: str) -> str: ...


class IdentityTranslator:
    """Returns input unchanged; for corpora already in English."""

    def translate(self, text: str) -> str:
        return text


class ReferenceTranslator:
    """Deterministic stand-in: strips a language prefix from each token.

    Tokens shaped "xx_word" (two-or-more-letter tag, underscore, payload)
    become "word"; anything else passes through. This gives synthetic
    multilingual corpora a visible translation step: the indexed text only
    matches English queries if translation actually ran.
    """

    def translate(self, text: str) -> str:
        out = []
        for token in text.split(" "):
            head, sep, tail = token.partition("_")
            if sep and tail and len(head) >= 2 and head.isalpha() and head.islower():
                out.append(tail)
            else:
                out.append(token)
        return " ".join(out)


class RemoteTranslator:
    """HTTP POST {endpoint}/translate {"text":...,"target":"en"} -> {"text":...}."""

    def __init__(self, endpoint: str, timeout_ms: int = 5000, retries: int = 2) -> None:
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout_ms / 1000.0
        self.retries = retries

    def translate(self, text: str) -> str:
        last: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                resp = requests.post(
                    self.endpoint + "/translate",
                    json={"text": text, "target": "en"},
                    timeout=self.timeout,
                )
            except requests.RequestException as exc:
                last = exc
                continue
            if resp.status_code != 200:
                last = TranslationUnavailable(f"status {resp.status_code}")
                continue
            try:
                body = resp.json()
                translated = body["text"]
            except (ValueError, KeyError, TypeError) as exc:
                raise TranslationUnavailable(f"malformed response: {exc}") from exc
            if not isinstance(translated, str):
                raise TranslationUnavailable("malformed response: text is not a string")
            return translated
        raise TranslationUnavailable(f"translate failed after retries: {last}")


class RemoteAsrClient:
    """HTTP POST {endpoint}/transcribe {"audio":base64} -> {"text","language"}."""

    def __init__(self, endpoint: str, timeout_ms: int = 5000, retries: int = 2) -> None:
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout_ms / 1000.0
        self.retries = retries

    def transcribe(self, audio: bytes) -> tuple[str, str]:
        payload = {"audio": base64.b64encode(audio).decode("ascii")}
        last: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                resp = requests.post(
                    self.endpoint + "/transcribe", json=payload, timeout=self.timeout
                )
            except requests.RequestException as exc:
                last = exc
                continue
            if resp.status_code != 200:
                last = TranslationUnavailable(f"status {resp.status_code}")
                continue
            try:
                body = resp.json()
                return str(body["text"]), str(body["language"])
            except (ValueError, KeyError, TypeError) as exc:
                raise TranslationUnavailable(f"malformed response: {exc}") from exc
        raise TranslationUnavailable(f"transcribe failed after retries: {last}")


def get_translator(kind: str, endpoint: str = "", timeout_ms: int = 5000, retries: int = 2) -> Translator:
    if kind == "identity":
        return IdentityTranslator()
    if kind == "reference":
        return ReferenceTranslator()
    if kind == "remote":
        if not endpoint:
            raise ValueError("remote translator requires an endpoint")
        return RemoteTranslator(endpoint, timeout_ms=timeout_ms, retries=retries)
    raise ValueError(f"unknown translator kind {kind!r}")
