"""Provider-agnostic completion access with deterministic replay.

Backends: an HTTP provider (configurable completions/chat endpoint), a
JSON-lines transcript replayer, simple scripted queues for tests, and a
scripted-oracle backend that serves precompiled traces keyed by the question
they answer. Recording wraps any backend and persists every exchange with a
chain hash so a flipped byte is detected on load.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import re
import threading
import time
import urllib.error
import urllib.request
from configparser import ConfigParser
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    CorruptTranscript,
    GatewayError,
    NoValidAction,
    ProviderError,
    ReplayMiss,
)

DEFAULT_MAX_TOKENS = 2048
TOKEN_BYTES_PER_TOKEN = 3.0  # calibrated against the published prompt sizes


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    stop: tuple[str, ...] = ()
    max_tokens: int = DEFAULT_MAX_TOKENS
    temperature: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 2.0:
            raise GatewayError(f"temperature {self.temperature} outside [0, 2]")
        if not self.stop and self.max_tokens <= 0:
            raise GatewayError("need at least one stop string or a token bound")


def estimate_tokens(text: str, bytes_per_token: float = TOKEN_BYTES_PER_TOKEN) -> int:
    """Cheap token estimate used for budget warnings only."""
    if not text:
        return 0
    return math.ceil(len(text.encode("utf-8")) / bytes_per_token)


_WS_RUNS = re.compile(r"\s+")


def request_hash(request: CompletionRequest) -> str:
    """Replay key; whitespace runs in the prompt are collapsed first."""
    payload = {
        "prompt": _WS_RUNS.sub(" ", request.prompt).strip(),
        "stop": list(request.stop),
        "max_tokens": request.max_tokens,
        "temperature": request.temperature,
    }
    blob = json.dumps(payload, sort_keys=True, ensure_ascii=False).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def _truncate_at_stop(text: str, stop: tuple[str, ...]) -> str:
    cut = len(text)
    for s in stop:
        pos = text.find(s)
        if pos != -1:
            cut = min(cut, pos)
    return text[:cut]


class Backend:
    """Anything that can complete text. Subclasses implement raw_complete."""

    name = "backend"

    def raw_complete(self, request: CompletionRequest) -> str:
        raise NotImplementedError

    def complete(self, request: CompletionRequest) -> str:
        return _truncate_at_stop(self.raw_complete(request), request.stop)


def complete(request: CompletionRequest, backend: Backend) -> str:
    """Complete up to (excluding) the first stop string."""
    return backend.complete(request)


# --- HTTP provider -----------------------------------------------------------------


@dataclass
class GatewayConfig:
    url: str = ""
    model: str = ""
    api_key: str = ""
    timeout: float = 60.0
    retries: int = 3
    chat: bool = False

    @classmethod
    def load(cls, path: str | None = None) -> "GatewayConfig":
        """Config file section [gateway], then environment overrides."""
        cfg = cls()
        if path and Path(path).exists():
            parser = ConfigParser()
            parser.read(path)
            if parser.has_section("gateway"):
                section = parser["gateway"]
                cfg.url = section.get("url", cfg.url)
                cfg.model = section.get("model", cfg.model)
                cfg.api_key = section.get("api_key", cfg.api_key)
                cfg.timeout = section.getfloat("timeout", cfg.timeout)
                cfg.retries = section.getint("retries", cfg.retries)
                cfg.chat = section.getboolean("chat", cfg.chat)
        cfg.url = os.environ.get("STRATEGOS_API_URL", cfg.url)
        cfg.model = os.environ.get("STRATEGOS_MODEL", cfg.model)
        cfg.api_key = os.environ.get("STRATEGOS_API_KEY", cfg.api_key)
        return cfg


class HttpBackend(Backend):
    """Speaks a configurable completions (or chat) endpoint."""

    name = "http"

    def __init__(self, config: GatewayConfig):
        if not config.url:
            raise GatewayError("no endpoint configured (STRATEGOS_API_URL)")
        self.config = config

    def raw_complete(self, request: CompletionRequest) -> str:
        body: dict = {
            "model": self.config.model,
            "max_tokens": request.max_tokens,
            "temperature": request.temperature,
        }
        if request.stop:
            body["stop"] = list(request.stop)
        if self.config.chat:
            body["messages"] = [{"role": "user", "content": request.prompt}]
        else:
            body["prompt"] = request.prompt
        data = json.dumps(body).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        last_error: Exception | None = None
        for attempt in range(self.config.retries):
            req = urllib.request.Request(self.config.url, data=data, headers=headers)
            try:
                with urllib.request.urlopen(req, timeout=self.config.timeout) as resp:
                    payload = json.loads(resp.read().decode("utf-8"))
                return self._extract(payload)
            except urllib.error.HTTPError as e:
                body_text = e.read().decode("utf-8", "replace")
                if e.code < 500 or attempt == self.config.retries - 1:
                    raise ProviderError(e.code, body_text)
                last_error = ProviderError(e.code, body_text)
            except (urllib.error.URLError, TimeoutError, OSError) as e:
                if attempt == self.config.retries - 1:
                    raise ProviderError(0, str(e))
                last_error = e
            time.sleep(min(2.0**attempt * 0.1, 2.0))
        raise ProviderError(0, str(last_error))

    @staticmethod
    def _extract(payload: dict) -> str:
        try:
            choice = payload["choices"][0]
        except (KeyError, IndexError, TypeError):
            raise ProviderError(200, f"malformed provider payload: {payload!r}"[:400])
        if "text" in choice:
            return choice["text"]
        if "message" in choice:
            return choice["message"].get("content", "")
        raise ProviderError(200, f"choice carries neither text nor message: {choice!r}"[:400])


# --- transcripts: record / replay ------------------------------------------------------


def _record_blob(record: dict) -> bytes:
    slim = {k: record[k] for k in ("hash", "request", "response", "ts", "backend")}
    return json.dumps(slim, sort_keys=True, ensure_ascii=False).encode("utf-8")


class Transcript:
    """Append-only exchange log with a per-record chain hash."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._chain = ""

    def append(self, request: CompletionRequest, response: str, backend: str) -> None:
        record = {
            "hash": request_hash(request),
            "request": {
                "prompt": request.prompt,
                "stop": list(request.stop),
                "max_tokens": request.max_tokens,
                "temperature": request.temperature,
            },
            "response": response,
            "ts": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
            "backend": backend,
        }
        with self._lock:
            chain = hashlib.sha256(
                (self._chain.encode("utf-8")) + _record_blob(record)
            ).hexdigest()
            record["chain"] = chain
            self._chain = chain
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    @staticmethod
    def load(path: str | Path) -> list[dict]:
        """Load and verify; raises CorruptTranscript on any tampering."""
        records = []
        chain = ""
        with Path(path).open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError:
                    raise CorruptTranscript(f"line {lineno}: not JSON")
                expect = hashlib.sha256(
                    chain.encode("utf-8") + _record_blob(record)
                ).hexdigest()
                if record.get("chain") != expect:
                    raise CorruptTranscript(f"line {lineno}: chain hash mismatch")
                chain = record["chain"]
                records.append(record)
        return records


class RecordingBackend(Backend):
    """Wraps any backend and persists each exchange."""

    name = "record"

    def __init__(self, inner: Backend, path: str | Path):
        self.inner = inner
        self.transcript = Transcript(path)

    def complete(self, request: CompletionRequest) -> str:
        response = self.inner.complete(request)
        self.transcript.append(request, response, self.inner.name)
        return response


class ReplayBackend(Backend):
    """Serves recorded responses keyed by request hash; never retries."""

    name = "replay"

    def __init__(self, path: str | Path):
        self._by_hash: dict[str, str] = {}
        self._order: dict[str, int] = {}
        for i, record in enumerate(Transcript.load(path)):
            self._by_hash.setdefault(record["hash"], record["response"])
            self._order.setdefault(record["hash"], i)
        self._served = 0

    def raw_complete(self, request: CompletionRequest) -> str:
        key = request_hash(request)
        if key not in self._by_hash:
            raise ReplayMiss(
                f"no recorded response for request hash {key[:12]}... "
                f"(first divergent request index {self._served})"
            )
        self._served += 1
        return self._by_hash[key]


def record(path: str | Path, inner: Backend) -> RecordingBackend:
    return RecordingBackend(inner, path)


def replay(path: str | Path) -> ReplayBackend:
    return ReplayBackend(path)


# --- scripted backends --------------------------------------------------------------


class ScriptedBackend(Backend):
    """Returns queued responses in order; for tests and deterministic agents."""

    name = "scripted"

    def __init__(self, responses: list[str]):
        self._queue = list(responses)
        self._lock = threading.Lock()

    def raw_complete(self, request: CompletionRequest) -> str:
        with self._lock:
            if not self._queue:
                raise ReplayMiss("scripted backend exhausted")
            return self._queue.pop(0)


class ScriptedOracleBackend(Backend):
    """Serves oracle-compiled answers registered against their questions.

    The registered answer is returned as a continuation: whatever part of it
    the prompt already contains (after the question) is stripped, so the
    factored intercept loop can re-query mid-trace after splicing results.
    """

    name = "scripted-oracle"

    def __init__(self):
        self._entries: list[tuple[str, str]] = []
        self._lock = threading.Lock()

    def register(self, question: str, answer: str) -> None:
        with self._lock:
            self._entries.append((question.strip(), answer))

    def raw_complete(self, request: CompletionRequest) -> str:
        prompt = request.prompt
        best: tuple[int, str, str] | None = None
        with self._lock:
            entries = list(self._entries)
        for question, answer in entries:
            pos = prompt.rfind(question)
            if pos == -1:
                continue
            if best is None or pos > best[0]:
                best = (pos, question, answer)
        if best is None:
            raise ReplayMiss("no registered question found in prompt")
        pos, question, answer = best
        tail = prompt[pos + len(question):]
        overlap = _longest_overlap(tail.lstrip(), answer)
        return answer[overlap:]


def _longest_overlap(tail: str, answer: str) -> int:
    """Length of the longest prefix of answer that is a suffix of tail."""
    limit = min(len(tail), len(answer))
    for k in range(limit, -1, -1):
        if k == 0:
            return 0
        if tail.endswith(answer[:k]):
            return k
    return 0


# --- constrained final-action selection ------------------------------------------------


_NORMALIZE = re.compile(r"[\s.,;:!?'\"]+")


def _normalize_token(text: str) -> str:
    return _NORMALIZE.sub("", text).lower()


def constrained_action(
    trace_tail: str,
    valid_actions: list[str],
    marker: str = "action:",
    scorer=None,
) -> str:
    """Pick the valid action the trace concluded with.

    Strategy 1: exact match (after normalization) of the text following the
    last action marker. Strategy 2: longest unambiguous prefix match.
    Strategy 3: per-choice scoring when a scorer is available. Raises
    NoValidAction when everything fails; callers record that as an incorrect
    trial, never a crash.
    """
    if not valid_actions:
        raise NoValidAction("no valid actions supplied")
    pos = trace_tail.rfind(marker)
    candidate = ""
    if pos != -1:
        candidate = trace_tail[pos + len(marker):].strip().splitlines()[0] if trace_tail[pos + len(marker):].strip() else ""
    norm_candidate = _normalize_token(candidate)
    by_norm = {}
    for action in valid_actions:
        by_norm.setdefault(_normalize_token(action), action)
    if norm_candidate and norm_candidate in by_norm:
        return by_norm[norm_candidate]
    if norm_candidate:
        prefix_hits = [
            action
            for norm, action in by_norm.items()
            if norm.startswith(norm_candidate) or norm_candidate.startswith(norm)
        ]
        if len(prefix_hits) == 1:
            return prefix_hits[0]
    if scorer is not None:
        scores = {action: scorer(trace_tail, action) for action in valid_actions}
        return max(scores, key=lambda a: (scores[a], -valid_actions.index(a)))
    raise NoValidAction(f"could not map tail {candidate!r} to {valid_actions}")
