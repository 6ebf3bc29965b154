"""Interchangeable supervisor backends: ground-truth oracle, scripted fixture,
HTTP client.

All backends expose respond(query, proposed_action) -> str and raise some
SupervisorError subclass on failure; the runtime fails open on any of them.
The oracle answers exclusively through the public correction grammar — it
never leaks numeric deltas — so closed-loop runs exercise the same text path
a live vision-language endpoint would.
"""

from __future__ import annotations

import base64
import os
from dataclasses import dataclass

import requests

from .actions import ActionVector
from .language import (
    CorrectionDelta,
    GripperEvent,
    Thresholds,
    compose_answer,
    discretize,
)

ENV_SUPERVISOR_URL = "FPC_SUPERVISOR_URL"
SUPERVISE_PATH = "/v1/supervise"

BACKEND_KINDS = ("none", "oracle", "scripted", "http")


class SupervisorError(Exception):
    """Base for backend failures; the runtime executes uncorrected on these."""


class TransportError(SupervisorError):
    """Connection-level failure."""


class StatusError(SupervisorError):
    """Non-2xx HTTP status."""


class ResponseSchemaError(SupervisorError):
    """Reply did not match the expected JSON shape."""


class SupervisorTimeoutError(SupervisorError):
    """Backend did not answer within the configured timeout."""


@dataclass(frozen=True)
class BackendConfig:
    """Which backend to run and how. `script` only applies to kind="scripted",
    `endpoint` only to kind="http" (falls back to FPC_SUPERVISOR_URL)."""

    kind: str = "none"
    endpoint: str | None = None
    timeout_ms: int = 5000
    retries: int = 0
    script: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "script", tuple(self.script))
        if self.kind not in BACKEND_KINDS:
            raise ValueError(f"backend kind must be one of {BACKEND_KINDS}, got {self.kind!r}")
        if self.timeout_ms <= 0:
            raise ValueError(f"timeout_ms must be > 0, got {self.timeout_ms!r}")
        if self.retries < 0:
            raise ValueError(f"retries must be >= 0, got {self.retries!r}")
        if self.kind == "scripted" and not self.script:
            raise ValueError("scripted backend requires at least one response")


@dataclass(frozen=True)
class OracleTruth:
    """Ground-truth view for one keyframe: whether the proposed action already
    satisfies the event, and the residual correction if not."""

    satisfied: bool
    delta: CorrectionDelta


def oracle_respond(query, truth, proposed: ActionVector, thresholds: Thresholds) -> str:
    """Render the true required correction through the public grammar.

    `truth` maps (event, proposed_action) to an OracleTruth, or None when the
    event's target does not exist. Satisfied or blind queries approve;
    otherwise the residual is binned and composed, which saturates any
    correction at the Large step — the grammar's expressiveness limit.
    """
    view = truth(query.event, proposed)
    if view is None or view.satisfied:
        return "Yes."
    return compose_answer(discretize(view.delta, thresholds))


class OracleBackend:
    """Answers from simulator ground truth via a truth callable.

    Counts blind queries (events whose target object/region is missing) in
    .blind_queries and approves them.
    """

    def __init__(self, truth, thresholds: Thresholds = Thresholds()):
        self._truth = truth
        self._thresholds = thresholds
        self.blind_queries = 0

    def respond(self, query, proposed: ActionVector) -> str:
        if self._truth(query.event, proposed) is None:
            self.blind_queries += 1
        return oracle_respond(query, self._truth, proposed, self._thresholds)


class ScriptedBackend:
    """Replays canned responses in order; repeats the last one when exhausted."""

    def __init__(self, script):
        self._script = tuple(script)
        if not self._script:
            raise ValueError("scripted backend requires at least one response")
        self._cursor = 0

    def respond(self, query, proposed: ActionVector) -> str:
        response = self._script[min(self._cursor, len(self._script) - 1)]
        self._cursor += 1
        return response


def _encode_image(image_ref) -> str | None:
    if image_ref is None:
        return None
    if isinstance(image_ref, bytes):
        return base64.b64encode(image_ref).decode("ascii")
    try:
        with open(image_ref, "rb") as fh:
            return base64.b64encode(fh.read()).decode("ascii")
    except OSError:
        return None


class HttpBackend:
    """POSTs {"prompt", "image_b64", "timestep"} to <endpoint>/v1/supervise and
    returns the reply's "text" verbatim. Transport, status and timeout
    failures are retried up to cfg.retries times; schema mismatches are not."""

    def __init__(self, cfg: BackendConfig):
        endpoint = cfg.endpoint or os.environ.get(ENV_SUPERVISOR_URL)
        if not endpoint:
            raise ValueError(
                f"http backend requires an endpoint (flag/config or ${ENV_SUPERVISOR_URL})"
            )
        self._url = endpoint.rstrip("/") + SUPERVISE_PATH
        self._timeout_s = cfg.timeout_ms / 1000.0
        self._retries = cfg.retries
        self._session = requests.Session()

    @property
    def url(self) -> str:
        return self._url

    def respond(self, query, proposed: ActionVector) -> str:
        payload = {
            "prompt": query.prompt,
            "image_b64": _encode_image(query.image_ref),
            "timestep": query.timestep,
        }
        last_error: SupervisorError = TransportError("no attempt made")
        for _ in range(self._retries + 1):
            try:
                reply = self._session.post(self._url, json=payload, timeout=self._timeout_s)
            except requests.Timeout as exc:
                last_error = SupervisorTimeoutError(str(exc))
                continue
            except requests.RequestException as exc:
                last_error = TransportError(str(exc))
                continue
            if not 200 <= reply.status_code < 300:
                last_error = StatusError(f"HTTP {reply.status_code} from {self._url}")
                continue
            try:
                body = reply.json()
            except ValueError as exc:
                raise ResponseSchemaError(f"reply is not JSON: {exc}") from exc
            if not isinstance(body, dict) or not isinstance(body.get("text"), str):
                raise ResponseSchemaError('reply must be a JSON object with a "text" string')
            return body["text"]
        raise last_error


def build_backend(cfg: BackendConfig, truth=None, thresholds: Thresholds = Thresholds()):
    """Instantiate the configured backend; kind="none" yields None (run
    unsupervised). The oracle kind requires a truth callable."""
    if cfg.kind == "none":
        return None
    if cfg.kind == "scripted":
        return ScriptedBackend(cfg.script)
    if cfg.kind == "http":
        return HttpBackend(cfg)
    if cfg.kind == "oracle":
        if truth is None:
            raise ValueError("oracle backend requires simulator ground truth")
        return OracleBackend(truth, thresholds)
    raise ValueError(f"unknown backend kind {cfg.kind!r}")
