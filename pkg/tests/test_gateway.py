import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from strategos.errors import (
    CorruptTranscript,
    GatewayError,
    NoValidAction,
    ProviderError,
    ReplayMiss,
)
from strategos.gateway import (
    CompletionRequest,
    GatewayConfig,
    HttpBackend,
    RecordingBackend,
    ReplayBackend,
    ScriptedBackend,
    ScriptedOracleBackend,
    Transcript,
    complete,
    constrained_action,
    estimate_tokens,
    request_hash,
)


class TestCompletionRequest:
    def test_temperature_range(self):
        with pytest.raises(GatewayError):
            CompletionRequest(prompt="x", temperature=3.0)

    def test_needs_stop_or_bound(self):
        with pytest.raises(GatewayError):
            CompletionRequest(prompt="x", stop=(), max_tokens=0)


class TestStopStrings:
    def test_completion_never_contains_stop(self):
        backend = ScriptedBackend(["reasoning...\nagent action: a1\nQ: next"])
        out = complete(
            CompletionRequest(prompt="p", stop=("\nQ:",)), backend
        )
        assert "\nQ:" not in out
        assert out.endswith("agent action: a1")

    def test_earliest_stop_wins(self):
        backend = ScriptedBackend(["abcSTOPdefHALTghi"])
        out = complete(CompletionRequest(prompt="p", stop=("HALT", "STOP")), backend)
        assert out == "abc"


class TestConstrainedAction:
    def test_exact(self):
        assert constrained_action("Gopher's action:a1", ["a1", "a2"]) == "a1"

    def test_normalization(self):
        assert constrained_action("action: a1.", ["a1", "a2"]) == "a1"
        assert constrained_action("action: A1!", ["a1", "a2"]) == "a1"

    def test_invalid_output(self):
        with pytest.raises(NoValidAction):
            constrained_action("action: a3", ["a1", "a2"])

    def test_no_marker(self):
        with pytest.raises(NoValidAction):
            constrained_action("no conclusion here", ["a1", "a2"])

    def test_prefix_fallback_unambiguous(self):
        assert constrained_action(
            "action: stag", ["stag-hunt", "hare-run"]
        ) == "stag-hunt"

    def test_prefix_ambiguous_fails(self):
        with pytest.raises(NoValidAction):
            constrained_action("action: a", ["a1", "a2"])

    def test_scorer_fallback(self):
        chosen = constrained_action(
            "garbled tail",
            ["a1", "a2"],
            scorer=lambda tail, action: 1.0 if action == "a2" else 0.0,
        )
        assert chosen == "a2"

    def test_result_is_always_a_member(self):
        for tail in ("action:a1", "action: a2.", "Gopher's action:a1\n"):
            assert constrained_action(tail, ["a1", "a2"]) in ("a1", "a2")


class TestRecordReplay:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "t.jsonl"
        inner = ScriptedBackend(["first", "second"])
        recorder = RecordingBackend(inner, path)
        r1 = CompletionRequest(prompt="alpha", stop=("Z",))
        r2 = CompletionRequest(prompt="beta", stop=("Z",))
        a = recorder.complete(r1)
        b = recorder.complete(r2)
        player = ReplayBackend(path)
        assert player.complete(r1) == a
        assert player.complete(r2) == b

    def test_replay_miss_reports_divergence(self, tmp_path):
        path = tmp_path / "t.jsonl"
        RecordingBackend(ScriptedBackend(["x"]), path).complete(
            CompletionRequest(prompt="original", stop=("Z",))
        )
        player = ReplayBackend(path)
        with pytest.raises(ReplayMiss):
            player.complete(CompletionRequest(prompt="edited", stop=("Z",)))

    def test_corrupt_transcript(self, tmp_path):
        path = tmp_path / "t.jsonl"
        RecordingBackend(ScriptedBackend(["x"]), path).complete(
            CompletionRequest(prompt="p", stop=("Z",))
        )
        raw = path.read_bytes()
        flipped = raw.replace(b'"response": "x"', b'"response": "y"')
        assert flipped != raw
        path.write_bytes(flipped)
        with pytest.raises(CorruptTranscript):
            Transcript.load(path)

    def test_hash_normalizes_whitespace_runs(self):
        a = CompletionRequest(prompt="hello   world\n", stop=("Z",))
        b = CompletionRequest(prompt="hello world", stop=("Z",))
        assert request_hash(a) == request_hash(b)

    def test_replay_serves_whitespace_variant(self, tmp_path):
        path = tmp_path / "t.jsonl"
        RecordingBackend(ScriptedBackend(["resp"]), path).complete(
            CompletionRequest(prompt="two  spaces", stop=("Z",))
        )
        player = ReplayBackend(path)
        assert player.complete(
            CompletionRequest(prompt="two spaces", stop=("Z",))
        ) == "resp"


class TestScriptedOracle:
    def test_serves_continuations(self):
        backend = ScriptedOracleBackend()
        backend.register("Q:what?", "A:step one. step two. done")
        out1 = backend.complete(
            CompletionRequest(prompt="intro\n\nQ:what?\n\nA:", stop=())
        )
        assert out1 == "step one. step two. done"
        out2 = backend.complete(
            CompletionRequest(prompt="intro\n\nQ:what?\n\nA:step one.", stop=())
        )
        # an aligned partial answer resumes exactly where it left off
        assert out2 == " step two. done"

    def test_last_question_wins(self):
        backend = ScriptedOracleBackend()
        backend.register("Q:first?", "A:one")
        backend.register("Q:second?", "A:two")
        out = backend.complete(
            CompletionRequest(prompt="Q:first?\n\nA:one\n\nQ:second?\n\nA:", stop=())
        )
        assert out == "two"

    def test_miss(self):
        backend = ScriptedOracleBackend()
        with pytest.raises(ReplayMiss):
            backend.complete(CompletionRequest(prompt="Q:unknown?", stop=("Z",)))


class _StubHandler(BaseHTTPRequestHandler):
    body = {"choices": [{"text": "stubbed completion"}]}
    status = 200
    fail_times = 0

    def log_message(self, fmt, *args):
        pass

    def do_POST(self):
        cls = type(self)
        if cls.fail_times > 0:
            cls.fail_times -= 1
            self.send_response(503)
            self.send_header("Content-Length", "0")
            self.end_headers()
            return
        payload = json.dumps(cls.body).encode()
        self.send_response(cls.status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)


@pytest.fixture
def stub_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


class TestHttpBackend:
    def test_body_passthrough(self, stub_server):
        _StubHandler.body = {"choices": [{"text": "stubbed completion"}]}
        backend = HttpBackend(GatewayConfig(url=stub_server, model="m"))
        out = backend.complete(CompletionRequest(prompt="p", stop=("Z",)))
        assert out == "stubbed completion"

    def test_chat_shape(self, stub_server):
        _StubHandler.body = {"choices": [{"message": {"content": "chat reply"}}]}
        backend = HttpBackend(GatewayConfig(url=stub_server, model="m", chat=True))
        assert backend.complete(
            CompletionRequest(prompt="p", stop=("Z",))
        ) == "chat reply"

    def test_retries_then_succeeds(self, stub_server):
        _StubHandler.body = {"choices": [{"text": "after retry"}]}
        _StubHandler.fail_times = 2
        backend = HttpBackend(GatewayConfig(url=stub_server, model="m", retries=3))
        assert backend.complete(
            CompletionRequest(prompt="p", stop=("Z",))
        ) == "after retry"

    def test_provider_error_carries_status(self, stub_server):
        _StubHandler.fail_times = 99
        backend = HttpBackend(GatewayConfig(url=stub_server, model="m", retries=2))
        with pytest.raises(ProviderError):
            backend.complete(CompletionRequest(prompt="p", stop=("Z",)))
        _StubHandler.fail_times = 0

    def test_env_config(self, monkeypatch):
        monkeypatch.setenv("STRATEGOS_API_URL", "http://example.invalid")
        monkeypatch.setenv("STRATEGOS_MODEL", "model-x")
        cfg = GatewayConfig.load()
        assert cfg.url == "http://example.invalid"
        assert cfg.model == "model-x"


class TestEstimateTokens:
    def test_empty(self):
        assert estimate_tokens("") == 0

    def test_monotonic(self):
        assert estimate_tokens("aa" * 100) > estimate_tokens("aa")

    def test_pluggable_divisor(self):
        assert estimate_tokens("x" * 300, bytes_per_token=3.0) == 100
