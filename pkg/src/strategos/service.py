"""HTTP API for live human-vs-agent negotiation sessions.

Event-sourced JSON-lines persistence (one file per session), per-session
locks, and strict redaction: while a session is open no response contains the
agent's private values or belief state. The human always proposes first.
"""

from __future__ import annotations

import json
import re
import secrets
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .errors import (
    NegotiationError,
    NoOfferToAccept,
    NotYourTurn,
    OverAllocation,
    SessionClosed,
)
from .negotiation import (
    Action,
    NegotiationAgent,
    NegotiationSession,
    PlayerContext,
    Pot,
    generate_contexts,
)

AGENT_NAME = "Alice"
HUMAN_NAME = "Bob"

METHOD_FLAGS = {
    "strategic": {"use_belief": True},
    "strategic-no-belief": {"use_belief": False},
    "fewshot": {"use_belief": False},
}

RATING_DIMENSIONS = ("humanlike", "reasonable", "aggressive", "compromising")


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


@dataclass
class SessionRecord:
    id: str
    session: NegotiationSession
    agent: NegotiationAgent
    method: str
    rating: dict | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionService:
    """Session registry plus the JSON request handlers."""

    def __init__(self, data_dir: str | Path = "./sessions"):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, SessionRecord] = {}
        self._registry_lock = threading.Lock()

    # -- persistence ------------------------------------------------------

    def _persist(self, record: SessionRecord, event: dict) -> None:
        path = self.data_dir / f"{record.id}.jsonl"
        with path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")

    # -- handlers -----------------------------------------------------------

    def create_session(self, body: dict) -> dict:
        method = body.get("method", "strategic")
        if method not in METHOD_FLAGS:
            raise ApiError(400, f"unknown method {method!r}")
        max_offers = int(body.get("max_offers", 6))
        context = body.get("context")
        if context is None or "seed" in (context or {}):
            seed = int((context or {}).get("seed", body.get("seed", 0)))
            pot, agent_values, human_values = generate_contexts(1, seed=seed)[0]
        else:
            try:
                pot = tuple(int(x) for x in context["pot"])
                human_values = tuple(int(x) for x in context["human_values"])
                agent_values = tuple(int(x) for x in context["agent_values"])
            except (KeyError, TypeError, ValueError):
                raise ApiError(
                    400,
                    "context needs pot, human_values and agent_values "
                    "(three integers each) or a seed",
                )
        try:
            session = NegotiationSession(
                pot=Pot(tuple(pot)),
                contexts={
                    AGENT_NAME: PlayerContext(tuple(agent_values)),
                    HUMAN_NAME: PlayerContext(tuple(human_values)),
                },
                first=HUMAN_NAME,
                max_offers=max_offers,
            )
        except NegotiationError as e:
            raise ApiError(400, str(e))
        agent = NegotiationAgent(
            AGENT_NAME, session, backend=None, **METHOD_FLAGS[method]
        )
        record = SessionRecord(
            id=secrets.token_hex(16), session=session, agent=agent, method=method
        )
        with self._registry_lock:
            self._sessions[record.id] = record
        self._persist(
            record,
            {
                "event": "created",
                "method": method,
                "pot": list(pot),
                "human_values": list(human_values),
                "agent_values": list(agent_values),
                "max_offers": max_offers,
            },
        )
        return {
            "id": record.id,
            "pot": list(pot),
            "human_values": list(human_values),
            "first": HUMAN_NAME,
            "max_offers": max_offers,
            "offers_left": session.offers_left(),
        }

    def _record(self, session_id: str) -> SessionRecord:
        with self._registry_lock:
            record = self._sessions.get(session_id)
        if record is None:
            raise ApiError(404, f"unknown session {session_id!r}")
        return record

    def human_action(self, session_id: str, body: dict) -> dict:
        record = self._record(session_id)
        kind = body.get("action")
        if kind not in ("propose", "accept", "reject"):
            raise ApiError(400, f"unknown action {kind!r}")
        if kind == "propose":
            alloc = body.get("allocation")
            if (
                not isinstance(alloc, (list, tuple))
                or len(alloc) != 3
                or not all(isinstance(x, int) and x >= 0 for x in alloc)
            ):
                raise ApiError(400, "allocation must be three nonnegative integers")
            action = Action.propose(alloc)
        else:
            action = Action(kind)
        with record.lock:
            try:
                record.session.apply(HUMAN_NAME, action)
            except OverAllocation as e:
                raise ApiError(422, str(e))
            except (NotYourTurn, SessionClosed, NoOfferToAccept) as e:
                raise ApiError(409, str(e))
            self._persist(
                record,
                {
                    "event": "human_action",
                    "action": kind,
                    "allocation": list(action.allocation) if action.allocation else None,
                },
            )
            agent_reply = None
            if record.session.open and record.session.on_turn() == AGENT_NAME:
                agent_action = record.agent.take_turn()
                agent_reply = {
                    "action": agent_action.kind,
                    "allocation": (
                        list(agent_action.allocation)
                        if agent_action.allocation
                        else None
                    ),
                }
                self._persist(record, {"event": "agent_action", **agent_reply})
            return {
                "human_action": {
                    "action": kind,
                    "allocation": list(action.allocation) if action.allocation else None,
                },
                "agent_reply": agent_reply,
                "session": self.session_state(record),
            }

    def session_state(self, record: SessionRecord) -> dict:
        """Redacted while open; full (rewards, agent values) after close."""
        session = record.session
        state = {
            "id": record.id,
            "method": record.method,
            "outcome": session.outcome,
            "pot": list(session.pot.counts),
            "human_values": list(session.contexts[HUMAN_NAME].values),
            "on_turn": session.on_turn() if session.open else None,
            "offers_left": session.offers_left(),
            "max_offers": session.max_offers,
            "history": [
                {"actor": actor, "allocation": list(alloc), "offer_number": i + 1}
                for i, (actor, alloc) in enumerate(session.history)
            ],
            "rating": record.rating,
        }
        if not session.open:
            state["rewards"] = dict(session.rewards)
            state["agent_values"] = list(session.contexts[AGENT_NAME].values)
            if session.accepted_allocation is not None:
                state["accepted_allocation"] = list(session.accepted_allocation)
                state["accepted_by"] = session.accepted_by
        return state

    def get_session(self, session_id: str) -> dict:
        record = self._record(session_id)
        with record.lock:
            return self.session_state(record)

    def transcript(self, session_id: str) -> str:
        record = self._record(session_id)
        path = self.data_dir / f"{record.id}.jsonl"
        return path.read_text(encoding="utf-8") if path.exists() else ""

    def rate(self, session_id: str, body: dict) -> dict:
        record = self._record(session_id)
        with record.lock:
            if record.session.open:
                raise ApiError(409, "rate after the session closes")
            if record.rating is not None:
                raise ApiError(409, "already rated")
            rating = {}
            for dim in RATING_DIMENSIONS:
                value = body.get(dim)
                if not isinstance(value, int) or not 1 <= value <= 7:
                    raise ApiError(400, f"{dim} must be an integer 1..7")
                rating[dim] = value
            record.rating = rating
            self._persist(record, {"event": "rating", **rating})
            return {"id": record.id, "rating": rating}


_SESSION_PATH = re.compile(r"^/sessions/([0-9a-f]{32})(/action|/transcript|/rating)?$")


def build_handler(service: SessionService, cors_origin: str = "*"):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        def _send(self, status: int, payload, content_type="application/json"):
            body = (
                payload.encode("utf-8")
                if isinstance(payload, str)
                else json.dumps(payload, ensure_ascii=False).encode("utf-8")
            )
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", cors_origin)
            self.end_headers()
            self.wfile.write(body)

        def _body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            if not length:
                return {}
            raw = self.rfile.read(length)
            try:
                doc = json.loads(raw.decode("utf-8"))
            except json.JSONDecodeError:
                raise ApiError(400, "request body is not JSON")
            if not isinstance(doc, dict):
                raise ApiError(400, "request body must be a JSON object")
            return doc

        def do_OPTIONS(self):
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", cors_origin)
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Content-Length", "0")
            self.end_headers()

        def do_POST(self):
            try:
                if self.path == "/sessions":
                    self._send(200, service.create_session(self._body()))
                    return
                m = _SESSION_PATH.match(self.path)
                if m and m.group(2) == "/action":
                    self._send(200, service.human_action(m.group(1), self._body()))
                    return
                if m and m.group(2) == "/rating":
                    self._send(200, service.rate(m.group(1), self._body()))
                    return
                self._send(404, {"error": f"no route {self.path!r}"})
            except ApiError as e:
                self._send(e.status, {"error": e.message})

        def do_GET(self):
            try:
                m = _SESSION_PATH.match(self.path)
                if m and m.group(2) is None:
                    self._send(200, service.get_session(m.group(1)))
                    return
                if m and m.group(2) == "/transcript":
                    self._send(
                        200, service.transcript(m.group(1)), content_type="text/plain"
                    )
                    return
                if self.path == "/health":
                    self._send(200, {"ok": True})
                    return
                self._send(404, {"error": f"no route {self.path!r}"})
            except ApiError as e:
                self._send(e.status, {"error": e.message})

    return Handler


def make_server(
    port: int = 0, data_dir: str | Path = "./sessions", cors_origin: str = "*"
) -> ThreadingHTTPServer:
    service = SessionService(data_dir)
    server = ThreadingHTTPServer(("127.0.0.1", port), build_handler(service, cors_origin))
    server.service = service  # handy for tests
    return server


def serve(port: int = 8080, data_dir: str | Path = "./sessions", cors_origin: str = "*"):
    server = ThreadingHTTPServer(
        ("0.0.0.0", port), build_handler(SessionService(data_dir), cors_origin)
    )
    print(f"strategos session service on :{port}, data in {data_dir}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
