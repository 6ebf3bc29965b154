"""Keyframe-triggered supervision loop: trigger, query, parse, apply.

The loop is fail-open by contract: any backend or parse failure executes the
proposed action unchanged, so a dead supervisor degrades to unsupervised
execution instead of blocking the control loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .actions import ActionVector
from .backends import SupervisorError
from .language import (
    GripperEvent,
    MalformedResponseError,
    Thresholds,
    Verdict,
    build_prompt,
    parse_response,
)

DEFAULT_TRIGGER_DELTA_G = 0.5


@dataclass
class LoopStats:
    """Monotone counters over one episode's supervision loop."""

    steps: int = 0
    keyframes: int = 0
    client_calls: int = 0
    corrections: int = 0
    approvals: int = 0
    malformed: int = 0


@dataclass
class LoopState:
    """Per-episode trigger state. g_prev starts at 0 (gripper open)."""

    g_prev: float = 0.0
    delta_g: float = DEFAULT_TRIGGER_DELTA_G
    stats: LoopStats = field(default_factory=LoopStats)

    def __post_init__(self):
        if not 0.0 <= self.g_prev <= 1.0:
            raise ValueError(f"g_prev must be in [0, 1], got {self.g_prev!r}")
        if not 0.0 < self.delta_g <= 1.0:
            raise ValueError(f"delta_g must be in (0, 1], got {self.delta_g!r}")


@dataclass(frozen=True)
class SupervisorQuery:
    """What a backend sees at a keyframe."""

    prompt: str
    timestep: int
    event: GripperEvent
    image_ref: str | bytes | None = None

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("query prompt must be nonempty")


def is_keyframe(g_t: float, state: LoopState) -> bool:
    """True when the commanded gripper value jumps past the trigger threshold."""
    return abs(g_t - state.g_prev) > state.delta_g


def binarize_gripper(action: ActionVector, threshold: float = 0.5) -> ActionVector:
    """Snap a fused (continuous) gripper command to {0, 1} at the policy
    boundary. Returns the same object when nothing changes."""
    g = 1.0 if action.g >= threshold else 0.0
    if g == action.g:
        return action
    return replace(action, g=g)


def apply_correction(action: ActionVector, parsed) -> ActionVector:
    """Add the parsed per-axis steps onto dx, dy, dz, drz.

    drx, dry and the gripper are never touched; approvals return the action
    object unchanged (bit-identical).
    """
    if parsed.verdict is Verdict.APPROVE:
        return action
    delta = parsed.delta
    return replace(
        action,
        dx=action.dx + delta.dx,
        dy=action.dy + delta.dy,
        dz=action.dz + delta.dz,
        drz=action.drz + delta.drz,
    )


def supervise_step(
    action: ActionVector,
    image_ref,
    instruction: str,
    state: LoopState,
    client,
    thresholds: Thresholds = Thresholds(),
    timestep: int | None = None,
) -> ActionVector:
    """One control step: pass through off-keyframes, consult the supervisor on
    keyframes, and return the action to execute.

    `client` is any object with respond(query, proposed_action) -> str, or
    None to run unsupervised. The trigger state updates to the commanded
    gripper value after every step, keyframe or not. Backend failures and
    malformed responses count in stats.malformed and fall through to the
    uncorrected action.
    """
    state.stats.steps += 1
    if timestep is None:
        timestep = state.stats.steps
    g_t = action.g
    executed = action
    if is_keyframe(g_t, state):
        state.stats.keyframes += 1
        event = GripperEvent.CLOSE if g_t > state.g_prev else GripperEvent.OPEN
        if client is not None:
            query = SupervisorQuery(
                prompt=build_prompt(instruction, event),
                timestep=timestep,
                event=event,
                image_ref=image_ref,
            )
            state.stats.client_calls += 1
            try:
                response = client.respond(query, action)
                parsed = parse_response(response, thresholds)
            except (SupervisorError, MalformedResponseError):
                state.stats.malformed += 1
            else:
                if parsed.verdict is Verdict.APPROVE:
                    state.stats.approvals += 1
                else:
                    state.stats.corrections += 1
                    executed = apply_correction(action, parsed)
    state.g_prev = g_t
    return executed
