import json
import threading
import urllib.error
import urllib.request

import pytest

from strategos.service import make_server


@pytest.fixture
def api(tmp_path):
    server = make_server(port=0, data_dir=tmp_path)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    port = server.server_address[1]

    def call(method, path, body=None):
        req = urllib.request.Request(
            f"http://127.0.0.1:{port}{path}", method=method
        )
        data = None
        if body is not None:
            data = json.dumps(body).encode("utf-8")
            req.add_header("Content-Type", "application/json")
        try:
            with urllib.request.urlopen(req, data=data, timeout=10) as resp:
                raw = resp.read().decode("utf-8")
                kind = resp.headers.get("Content-Type", "")
                return resp.status, (json.loads(raw) if "json" in kind else raw)
        except urllib.error.HTTPError as e:
            return e.code, json.loads(e.read().decode("utf-8"))

    yield call
    server.shutdown()


CANONICAL = {
    "context": {
        "pot": [1, 4, 1],
        "human_values": [0, 2, 4],
        "agent_values": [4, 1, 2],
    },
    "method": "strategic",
}


class TestSessionLifecycle:
    def test_create_returns_pot_and_hides_agent_values(self, api):
        status, doc = api("POST", "/sessions", CANONICAL)
        assert status == 200
        assert doc["pot"] == [1, 4, 1]
        assert doc["human_values"] == [0, 2, 4]
        assert doc["first"] == "Bob"
        assert "agent_values" not in doc

    def test_seeded_sessions_reproducible(self, api):
        _, a = api("POST", "/sessions", {"context": {"seed": 7}})
        _, b = api("POST", "/sessions", {"context": {"seed": 7}})
        assert a["pot"] == b["pot"]
        assert a["human_values"] == b["human_values"]

    def test_bad_context_is_400(self, api):
        status, doc = api("POST", "/sessions", {"context": {"pot": [1, 2]}})
        assert status == 400

    def test_unknown_method_is_400(self, api):
        status, _ = api("POST", "/sessions", {"method": "psychic"})
        assert status == 400

    def test_ablated_method_accepted(self, api):
        status, doc = api(
            "POST", "/sessions", {**CANONICAL, "method": "strategic-no-belief"}
        )
        assert status == 200

    def test_full_game_and_redaction(self, api):
        _, doc = api("POST", "/sessions", CANONICAL)
        sid = doc["id"]
        status, doc = api(
            "POST",
            f"/sessions/{sid}/action",
            {"action": "propose", "allocation": [0, 3, 1]},
        )
        assert status == 200
        assert doc["agent_reply"]["action"] == "propose"
        state = doc["session"]
        assert state["outcome"] == "open"
        assert "rewards" not in state and "agent_values" not in state
        # accept the agent's counter
        status, doc = api("POST", f"/sessions/{sid}/action", {"action": "accept"})
        assert status == 200
        state = doc["session"]
        assert state["outcome"] == "accepted"
        assert "rewards" in state and "agent_values" in state
        status, doc = api("GET", f"/sessions/{sid}")
        assert "rewards" in doc

    def test_action_errors(self, api):
        _, doc = api("POST", "/sessions", CANONICAL)
        sid = doc["id"]
        status, _ = api(
            "POST",
            f"/sessions/{sid}/action",
            {"action": "propose", "allocation": [9, 9, 9]},
        )
        assert status == 422
        status, _ = api("POST", f"/sessions/{sid}/action", {"action": "accept"})
        assert status == 409  # nothing proposed yet
        status, _ = api("POST", f"/sessions/{sid}/action", {"action": "dance"})
        assert status == 400

    def test_offer_cap_is_409(self, api):
        _, doc = api("POST", "/sessions", {**CANONICAL, "max_offers": 2})
        sid = doc["id"]
        api(
            "POST",
            f"/sessions/{sid}/action",
            {"action": "propose", "allocation": [0, 1, 0]},
        )
        # human's 2nd proposal would be offer 3 (agent counter was 2): 409
        status, doc = api(
            "POST",
            f"/sessions/{sid}/action",
            {"action": "propose", "allocation": [0, 2, 0]},
        )
        assert status == 409

    def test_unknown_session_404(self, api):
        status, _ = api("GET", "/sessions/" + "0" * 32)
        assert status == 404


class TestTranscriptAndRating:
    def finish_session(self, api):
        _, doc = api("POST", "/sessions", CANONICAL)
        sid = doc["id"]
        api(
            "POST",
            f"/sessions/{sid}/action",
            {"action": "propose", "allocation": [0, 3, 1]},
        )
        api("POST", f"/sessions/{sid}/action", {"action": "accept"})
        return sid

    def test_transcript_is_event_jsonl(self, api):
        sid = self.finish_session(api)
        status, text = api("GET", f"/sessions/{sid}/transcript")
        assert status == 200
        events = [json.loads(line) for line in text.splitlines() if line]
        kinds = [e["event"] for e in events]
        assert kinds[0] == "created"
        assert "human_action" in kinds and "agent_action" in kinds

    def test_rating_flow(self, api):
        sid = self.finish_session(api)
        rating = {"humanlike": 7, "reasonable": 6, "aggressive": 2, "compromising": 5}
        status, doc = api("POST", f"/sessions/{sid}/rating", rating)
        assert status == 200 and doc["rating"] == rating
        status, _ = api("POST", f"/sessions/{sid}/rating", rating)
        assert status == 409  # duplicate
        status, doc = api("GET", f"/sessions/{sid}")
        assert doc["rating"] == rating

    def test_rating_while_open_is_409(self, api):
        _, doc = api("POST", "/sessions", CANONICAL)
        status, _ = api(
            "POST",
            f"/sessions/{doc['id']}/rating",
            {"humanlike": 7, "reasonable": 6, "aggressive": 2, "compromising": 5},
        )
        assert status == 409

    def test_rating_validation(self, api):
        sid = self.finish_session(api)
        status, _ = api(
            "POST",
            f"/sessions/{sid}/rating",
            {"humanlike": 9, "reasonable": 6, "aggressive": 2, "compromising": 5},
        )
        assert status == 400
