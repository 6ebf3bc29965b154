import base64
import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from fpc.actions import ActionVector
from fpc.backends import (
    BackendConfig,
    HttpBackend,
    OracleBackend,
    OracleTruth,
    ResponseSchemaError,
    ScriptedBackend,
    StatusError,
    SupervisorTimeoutError,
    TransportError,
    build_backend,
    oracle_respond,
)
from fpc.language import CorrectionDelta, GripperEvent, Thresholds, parse_response
from fpc.runtime import SupervisorQuery, apply_correction

TH = Thresholds()


def query(event=GripperEvent.CLOSE, image=None, t=3):
    return SupervisorQuery(prompt="prompt text", timestep=t, event=event, image_ref=image)


def action(dx=0.0, dy=0.0, dz=0.0, drz=0.0, g=1.0):
    return ActionVector(dx, dy, dz, 0.0, 0.0, drz, g)


class TestBackendConfig:
    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="kind"):
            BackendConfig(kind="telepathy")

    def test_scripted_requires_script(self):
        with pytest.raises(ValueError, match="at least one response"):
            BackendConfig(kind="scripted", script=())

    def test_timeout_positive(self):
        with pytest.raises(ValueError, match="timeout"):
            BackendConfig(timeout_ms=0)

    def test_none_builds_to_none(self):
        assert build_backend(BackendConfig(kind="none")) is None

    def test_oracle_requires_truth(self):
        with pytest.raises(ValueError, match="ground truth"):
            build_backend(BackendConfig(kind="oracle"))


class TestScripted:
    def test_replays_in_order_then_repeats_last(self):
        backend = ScriptedBackend(["No. Move up. Large.", "Yes."])
        out = [backend.respond(query(), action()) for _ in range(4)]
        assert out == ["No. Move up. Large.", "Yes.", "Yes.", "Yes."]

    def test_single_entry_repeats(self):
        backend = ScriptedBackend(["Yes."])
        assert [backend.respond(query(), action()) for _ in range(3)] == ["Yes."] * 3

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ScriptedBackend([])


class TestOracle:
    def test_exact_landing_approves(self):
        truth = lambda event, proposed: OracleTruth(True, CorrectionDelta())
        assert oracle_respond(query(), truth, action(), TH) == "Yes."

    def test_left_and_below_rendered_through_codec(self):
        # target is 0.05 m toward +y and 0.2 m toward -z of the post-action pose
        truth = lambda e, p: OracleTruth(False, CorrectionDelta(0.0, 0.05, -0.2, 0.0))
        assert oracle_respond(query(), truth, action(), TH) == (
            "No. Move left. Small. Move down. Large."
        )

    def test_yaw_misalignment(self):
        truth = lambda e, p: OracleTruth(False, CorrectionDelta(0.0, 0.0, 0.0, -0.02))
        assert oracle_respond(query(), truth, action(), TH) == "No. Rotate clockwise. Small."

    def test_absent_target_approves_and_counts(self):
        backend = OracleBackend(lambda e, p: None, TH)
        assert backend.respond(query(), action()) == "Yes."
        assert backend.blind_queries == 1

    def test_every_response_parses(self):
        rng = np.random.default_rng(8)
        backend = OracleBackend(
            lambda e, p: OracleTruth(False, CorrectionDelta(*rng.uniform(-0.3, 0.3, 4))), TH
        )
        for _ in range(200):
            parsed = parse_response(backend.respond(query(), action()), TH)
            assert parsed is not None

    def test_axis_aligned_correction_reduces_error(self):
        # one-axis offsets inside one bin: applying the parsed correction
        # strictly shrinks the residual whenever it exceeds the small step
        rng = np.random.default_rng(21)
        for _ in range(300):
            axis = int(rng.integers(0, 4))
            sign = 1.0 if rng.integers(0, 2) else -1.0
            mag = float(rng.uniform(0.011, 0.099))
            offsets = [0.0] * 4
            offsets[axis] = sign * mag
            delta = CorrectionDelta(*offsets)
            truth = lambda e, p, d=delta: OracleTruth(False, d)
            response = oracle_respond(query(), truth, action(), TH)
            parsed = parse_response(response, TH)
            corrected = apply_correction(action(), parsed)
            residual = abs(offsets[axis] - (corrected.dx, corrected.dy, corrected.dz, corrected.drz)[axis])
            assert residual < mag


class _Handler(BaseHTTPRequestHandler):
    behavior = "echo"
    text = "Yes."
    seen = []
    fail_times = 0

    def do_POST(self):
        cls = type(self)
        length = int(self.headers.get("Content-Length", 0))
        payload = json.loads(self.rfile.read(length)) if length else {}
        cls.seen.append((self.path, payload))
        if cls.behavior == "slow":
            time.sleep(0.5)
        if cls.fail_times > 0:
            cls.fail_times -= 1
            self.send_response(500)
            self.end_headers()
            return
        if cls.behavior == "error":
            self.send_response(500)
            self.end_headers()
            return
        body = {"text": cls.text} if cls.behavior != "badschema" else {"reply": "Yes."}
        data = json.dumps(body).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


class _QuietServer(ThreadingHTTPServer):
    def handle_error(self, request, client_address):
        pass  # client-side disconnects (timeout test) are expected


@pytest.fixture
def http_server():
    server = _QuietServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _Handler.behavior = "echo"
    _Handler.text = "Yes."
    _Handler.seen = []
    _Handler.fail_times = 0
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


class TestHttp:
    def test_echo(self, http_server):
        backend = HttpBackend(BackendConfig(kind="http", endpoint=http_server))
        assert backend.respond(query(t=7), action()) == "Yes."
        path, payload = _Handler.seen[-1]
        assert path == "/v1/supervise"
        assert payload == {"prompt": "prompt text", "image_b64": None, "timestep": 7}

    def test_image_bytes_base64(self, http_server):
        backend = HttpBackend(BackendConfig(kind="http", endpoint=http_server))
        backend.respond(query(image=b"\x89PNGfake"), action())
        _, payload = _Handler.seen[-1]
        assert base64.b64decode(payload["image_b64"]) == b"\x89PNGfake"

    def test_500_raises_status_error(self, http_server):
        _Handler.behavior = "error"
        backend = HttpBackend(BackendConfig(kind="http", endpoint=http_server))
        with pytest.raises(StatusError, match="500"):
            backend.respond(query(), action())

    def test_missing_text_raises_schema_error(self, http_server):
        _Handler.behavior = "badschema"
        backend = HttpBackend(BackendConfig(kind="http", endpoint=http_server))
        with pytest.raises(ResponseSchemaError, match="text"):
            backend.respond(query(), action())

    def test_timeout(self, http_server):
        _Handler.behavior = "slow"
        backend = HttpBackend(BackendConfig(kind="http", endpoint=http_server, timeout_ms=100))
        with pytest.raises(SupervisorTimeoutError):
            backend.respond(query(), action())

    def test_retry_recovers_from_transient_500(self, http_server):
        _Handler.fail_times = 1
        backend = HttpBackend(BackendConfig(kind="http", endpoint=http_server, retries=1))
        assert backend.respond(query(), action()) == "Yes."

    def test_unreachable_is_transport_error(self):
        backend = HttpBackend(
            BackendConfig(kind="http", endpoint="http://127.0.0.1:1", timeout_ms=200)
        )
        with pytest.raises(TransportError):
            backend.respond(query(), action())

    def test_endpoint_from_env(self, http_server, monkeypatch):
        monkeypatch.setenv("FPC_SUPERVISOR_URL", http_server)
        backend = HttpBackend(BackendConfig(kind="http"))
        assert backend.respond(query(), action()) == "Yes."

    def test_explicit_endpoint_beats_env(self, http_server, monkeypatch):
        monkeypatch.setenv("FPC_SUPERVISOR_URL", "http://127.0.0.1:1")
        backend = HttpBackend(BackendConfig(kind="http", endpoint=http_server))
        assert backend.respond(query(), action()) == "Yes."

    def test_missing_endpoint_rejected(self, monkeypatch):
        monkeypatch.delenv("FPC_SUPERVISOR_URL", raising=False)
        with pytest.raises(ValueError, match="endpoint"):
            HttpBackend(BackendConfig(kind="http"))
