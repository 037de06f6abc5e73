"""Uniform client for every learned component the pipeline talks to.

Chat completion, fill-mask, sentence/word embeddings and NER all sit behind
HTTP endpoints.  Each call is keyed by a stable digest of the canonicalized
request, which drives deterministic record/replay: record mode performs the
HTTP call and stores the payload, replay mode answers from the cassette and
treats an unseen digest as an error.  Tests therefore never need network
access or model weights.
"""

from __future__ import annotations

import json
import logging
import math
import os
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import requests

from .deptree import NamedSpan, canonical_entity_type, normalize_spans
from .util import atomic_write_text, canonical_digest

log = logging.getLogger(__name__)

ROLES = {"system", "user", "assistant"}
MASK_MARKER = "[MASK]"

_RETRYABLE_EXC: tuple = (requests.RequestException, ConnectionError)
try:  # httpx sessions (e.g. in-process ASGI clients) are accepted too
    import httpx

    _RETRYABLE_EXC = _RETRYABLE_EXC + (httpx.HTTPError,)
except ImportError:
    pass


class GatewayError(RuntimeError):
    pass


class TransportError(GatewayError):
    """Endpoint unreachable or persistently failing after the retry budget."""


class CassetteMiss(GatewayError):
    """Replay mode saw a request digest the cassette does not contain."""


@dataclass
class ChatRequest:
    system_prompt: str
    messages: list[tuple[str, str]]  # (role, text)
    temperature: float = 0.0
    max_tokens: int = 512
    n_samples: int = 1
    seed: int | None = None

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        for role, _ in self.messages:
            if role not in ROLES:
                raise ValueError(f"unknown message role {role!r}")

    def canonical(self) -> dict:
        return {
            "system_prompt": self.system_prompt,
            "messages": [[r, t] for r, t in self.messages],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "n_samples": self.n_samples,
            "seed": self.seed,
        }


def request_digest(kind: str, payload: dict) -> str:
    """Stable hash of a canonicalized request; insensitive to dict ordering."""
    return canonical_digest({"kind": kind, "payload": payload})


class Cassette:
    """Append-only digest -> response store, persisted as JSONL."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._entries: dict[str, dict] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    rec = json.loads(line)
                    self._entries.setdefault(rec["digest"], rec)

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, digest: str) -> dict | None:
        return self._entries.get(digest)

    def put(self, digest: str, kind: str, request: dict, response) -> None:
        with self._lock:
            self._entries.setdefault(
                digest, {"digest": digest, "kind": kind, "request": request, "response": response})

    def save(self, path: str | Path | None = None) -> None:
        target = Path(path) if path is not None else self.path
        if target is None:
            raise ValueError("no cassette path to save to")
        lines = [json.dumps(self._entries[d], ensure_ascii=False)
                 for d in sorted(self._entries)]
        atomic_write_text(target, "".join(l + "\n" for l in lines))


@dataclass
class GatewayConfig:
    chat_url: str = "http://127.0.0.1:8901/v1/chat/completions"
    fill_mask_url: str = "http://127.0.0.1:8901/fill-mask"
    embed_url: str = "http://127.0.0.1:8901/embed"
    word_vec_url: str = "http://127.0.0.1:8901/word-vec"
    ner_url: str = "http://127.0.0.1:8901/ner"
    chat_model: str = "gpt-4-class"
    api_key_env: str = "HOPFORGE_API_KEY"
    timeout: float = 60.0
    max_attempts: int = 4
    backoff_base: float = 0.5
    max_parallel: int = 4

    @classmethod
    def from_dict(cls, d: dict) -> "GatewayConfig":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)


class Gateway:
    """Client for the chat / fill-mask / embed / word-vec / NER endpoints.

    mode is one of "live", "record" (live + store responses) or "replay"
    (answer purely from the cassette).
    """

    def __init__(self, config: GatewayConfig | None = None, mode: str = "live",
                 cassette: Cassette | None = None, session=None,
                 sleep=time.sleep, rng: random.Random | None = None):
        if mode not in ("live", "record", "replay"):
            raise ValueError(f"unknown gateway mode {mode!r}")
        if mode in ("record", "replay") and cassette is None:
            raise ValueError(f"{mode} mode requires a cassette")
        self.config = config or GatewayConfig()
        self.mode = mode
        self.cassette = cassette
        self.session = session or requests.Session()
        self._sleep = sleep
        self._rng = rng or random.Random(0)

    # -- transport ---------------------------------------------------------

    def _headers(self) -> dict:
        key = os.environ.get(self.config.api_key_env, "")
        return {"Authorization": f"Bearer {key}"} if key else {}

    def _post(self, url: str, body: dict) -> dict:
        last_exc: Exception | None = None
        for attempt in range(self.config.max_attempts):
            if attempt:
                self._sleep(self.backoff_delay(attempt - 1))
            try:
                resp = self.session.post(url, json=body, headers=self._headers(),
                                         timeout=self.config.timeout)
            except _RETRYABLE_EXC as e:
                last_exc = e
                log.warning("request to %s failed (attempt %d): %s", url, attempt + 1, e)
                continue
            if resp.status_code >= 500:
                last_exc = TransportError(f"{url} -> {resp.status_code}")
                continue
            if resp.status_code >= 400:
                raise GatewayError(f"{url} -> {resp.status_code}: {resp.text[:200]}")
            return resp.json()
        raise TransportError(
            f"{url}: retry budget of {self.config.max_attempts} exhausted") from last_exc

    def backoff_delay(self, i: int) -> float:
        """delay(i) = base * 2^i plus jitter bounded by base."""
        base = self.config.backoff_base
        return base * (2 ** i) + self._rng.uniform(0, base)

    def _call(self, kind: str, payload: dict, build_body, url: str, parse):
        digest = request_digest(kind, payload)
        if self.mode == "replay":
            entry = self.cassette.get(digest)
            if entry is None:
                raise CassetteMiss(f"no cassette entry for {kind} digest {digest}")
            return parse(entry["response"])
        raw = self._post(url, build_body())
        if self.mode == "record":
            self.cassette.put(digest, kind, payload, raw)
        return parse(raw)

    # -- endpoints ---------------------------------------------------------

    def chat(self, req: ChatRequest) -> list[str]:
        """Chat completion; returns exactly n_samples texts, order as received."""
        payload = req.canonical()

        def build_body():
            messages = [{"role": "system", "content": req.system_prompt}]
            messages += [{"role": r, "content": t} for r, t in req.messages]
            body = {"model": self.config.chat_model, "messages": messages,
                    "temperature": req.temperature, "n": req.n_samples,
                    "max_tokens": req.max_tokens}
            if req.seed is not None:
                body["seed"] = req.seed
            return body

        def parse(raw):
            choices = raw["choices"]
            texts = [c["message"]["content"] for c in choices]
            if len(texts) != req.n_samples:
                raise GatewayError(
                    f"chat returned {len(texts)} choices, expected {req.n_samples}")
            return texts

        return self._call("chat", payload, build_body, self.config.chat_url, parse)

    def fill_mask(self, sentence_with_mask: str, top_k: int = 10) -> list[tuple[str, float]]:
        """Top-k (token, probability) fills for the single [MASK] slot."""
        n_masks = sentence_with_mask.count(MASK_MARKER)
        if n_masks != 1:
            raise ValueError(f"input must contain exactly one {MASK_MARKER}, found {n_masks}")
        payload = {"text": sentence_with_mask, "top_k": top_k}

        def parse(raw):
            pairs = [(c["token"], float(c["prob"])) for c in raw["candidates"]]
            for token, prob in pairs:
                if not (0 < prob <= 1):
                    raise GatewayError(f"fill-mask probability {prob} for {token!r} out of (0,1]")
            pairs.sort(key=lambda tp: -tp[1])
            return pairs[:top_k]

        return self._call("fill_mask", payload, lambda: payload,
                          self.config.fill_mask_url, parse)

    def embed(self, texts: list[str]) -> list[list[float]]:
        payload = {"texts": list(texts)}

        def parse(raw):
            vectors = [[float(x) for x in v] for v in raw["vectors"]]
            if len(vectors) != len(texts):
                raise GatewayError("embed returned wrong vector count")
            return vectors

        return self._call("embed", payload, lambda: payload, self.config.embed_url, parse)

    def word_vec(self, words: list[str]) -> list[list[float]]:
        payload = {"words": list(words)}

        def parse(raw):
            vectors = [[float(x) for x in v] for v in raw["vectors"]]
            if len(vectors) != len(words):
                raise GatewayError("word-vec returned wrong vector count")
            return vectors

        return self._call("word_vec", payload, lambda: payload,
                          self.config.word_vec_url, parse)

    def ner(self, text: str) -> list[NamedSpan]:
        """Typed entity spans for a text; overlaps normalized to the longer span."""
        if not text.strip():
            return []
        payload = {"text": text}

        def parse(raw):
            spans = [NamedSpan(int(s["start_token"]), int(s["end_token"]),
                               canonical_entity_type(s["type"])) for s in raw["spans"]]
            return normalize_spans(spans)

        return self._call("ner", payload, lambda: payload, self.config.ner_url, parse)

    def map_indexed(self, fn, items):
        """Apply fn over items through a bounded pool; results in input order."""
        items = list(items)
        if not items:
            return []
        workers = max(1, min(self.config.max_parallel, len(items)))
        results = [None] * len(items)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(fn, item): i for i, item in enumerate(items)}
            for fut, i in futures.items():
                results[i] = fut.result()
        return results


def cosine(u, v) -> float:
    """Cosine similarity of two equal-length, nonzero vectors; result in [-1, 1]."""
    if len(u) != len(v):
        raise ValueError(f"vector length mismatch: {len(u)} vs {len(v)}")
    dot = nu = nv = 0.0
    for a, b in zip(u, v):
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ValueError("vectors must have finite components")
        dot += a * b
        nu += a * a
        nv += b * b
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine undefined for zero vectors")
    return max(-1.0, min(1.0, dot / math.sqrt(nu * nv)))
