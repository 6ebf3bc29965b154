"""Episode scanning and QA-pair generation around gripper-change events.

Episodes are plain JSONL; each retained frame near a gripper transition gets
a prompt plus the binned correction that would steer it to the next
transition's action. Generation is deterministic and per-episode independent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .actions import ActionVector
from .language import (
    CorrectionDelta,
    GripperEvent,
    Thresholds,
    build_prompt,
    compose_answer,
    discretize,
)

DEFAULT_DELTA_G = 0.5
DEFAULT_WINDOW = 3

ACTION_SEMANTICS = ("relative", "absolute")


class SchemaError(ValueError):
    """A JSONL line violates the episode or record schema."""

    def __init__(self, path, line_no: int, message: str):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{self.path}:{line_no}: {message}")


@dataclass(frozen=True)
class Step:
    """One recorded timestep: 1-based index, opaque image reference, action."""

    index: int
    image_ref: str
    action: ActionVector

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"step index must be >= 1, got {self.index}")


@dataclass(frozen=True)
class Episode:
    """A recorded trajectory with a shared instruction.

    action_semantics records whether actions are per-step deltas or absolute
    poses; target arithmetic is identical either way, the flag is provenance.
    """

    id: str
    instruction: str
    steps: tuple[Step, ...]
    action_semantics: str = "relative"

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if self.action_semantics not in ACTION_SEMANTICS:
            raise ValueError(f"unknown action_semantics {self.action_semantics!r}")
        if len(self.steps) < 2:
            raise ValueError(f"episode needs at least 2 steps, got {len(self.steps)}")
        for expected, step in enumerate(self.steps, start=1):
            if step.index != expected:
                raise ValueError(
                    f"step indices must be exactly 1..T; position {expected} "
                    f"has index {step.index}"
                )

    @property
    def length(self) -> int:
        return len(self.steps)

    def step_at(self, t: int) -> Step:
        return self.steps[t - 1]


@dataclass(frozen=True)
class ChangeEvent:
    """A gripper transition: the timestep it lands on and its direction."""

    t: int
    kind: GripperEvent


@dataclass(frozen=True)
class QARecord:
    """One generated training sample with its provenance and the raw delta."""

    episode_id: str
    t: int
    c_star: int
    image_ref: str
    prompt: str
    answer: str
    delta: CorrectionDelta


@dataclass
class GenerationReport:
    episodes: int = 0
    events: int = 0
    records: int = 0
    skips: int = 0

    def merge(self, other: "GenerationReport") -> None:
        self.episodes += other.episodes
        self.events += other.events
        self.records += other.records
        self.skips += other.skips

    def as_dict(self) -> dict:
        return {
            "episodes": self.episodes,
            "events": self.events,
            "records": self.records,
            "skips": self.skips,
        }


@dataclass(frozen=True)
class GenerationConfig:
    delta_g: float = DEFAULT_DELTA_G
    window: int = DEFAULT_WINDOW
    thresholds: Thresholds = field(default_factory=Thresholds)

    def __post_init__(self):
        if not 0.0 < self.delta_g <= 1.0:
            raise ValueError(f"delta_g must be in (0, 1], got {self.delta_g!r}")
        if self.window < 0:
            raise ValueError(f"window must be >= 0, got {self.window!r}")


def detect_changes(episode: Episode, delta_g: float = DEFAULT_DELTA_G) -> list[ChangeEvent]:
    """Timesteps where the gripper command jumps by more than delta_g,
    ascending, each tagged close (rising) or open (falling)."""
    events = []
    for prev, cur in zip(episode.steps, episode.steps[1:]):
        if abs(cur.action.g - prev.action.g) > delta_g:
            kind = GripperEvent.CLOSE if cur.action.g > prev.action.g else GripperEvent.OPEN
            events.append(ChangeEvent(cur.index, kind))
    return events


def retained_frames(
    changes: Sequence[ChangeEvent], window: int, length: int
) -> list[int]:
    """Union of the [c-window, c] frame windows, clipped to [1, length]."""
    if window < 0:
        raise ValueError(f"window must be >= 0, got {window}")
    keep: set[int] = set()
    for change in changes:
        lo = max(1, change.t - window)
        hi = min(length, change.t)
        keep.update(range(lo, hi + 1))
    return sorted(keep)


def corrective_target(
    episode: Episode, t: int, changes: Sequence[ChangeEvent]
) -> tuple[ChangeEvent, CorrectionDelta] | None:
    """The next gripper change at or after t, and the action difference that
    would reach it. Returns None when no future change exists (the frame is
    skipped, not labeled)."""
    target = next((c for c in changes if c.t >= t), None)
    if target is None:
        return None
    a_target = episode.step_at(target.t).action
    a_now = episode.step_at(t).action
    delta = CorrectionDelta(
        a_target.dx - a_now.dx,
        a_target.dy - a_now.dy,
        a_target.dz - a_now.dz,
        a_target.drz - a_now.drz,
    )
    return target, delta


def generate(
    episode: Episode, cfg: GenerationConfig = GenerationConfig()
) -> tuple[list[QARecord], GenerationReport]:
    """Run the full pipeline on one episode.

    Frames that coincide with their own target event always answer "Yes."
    (zero self-difference). Records come out sorted by timestep.
    """
    changes = detect_changes(episode, cfg.delta_g)
    frames = retained_frames(changes, cfg.window, episode.length)
    records: list[QARecord] = []
    skips = 0
    for t in frames:
        resolved = corrective_target(episode, t, changes)
        if resolved is None:
            skips += 1
            continue
        event, delta = resolved
        prompt = build_prompt(episode.instruction, event.kind)
        answer = compose_answer(discretize(delta, cfg.thresholds))
        records.append(
            QARecord(
                episode_id=episode.id,
                t=t,
                c_star=event.t,
                image_ref=episode.step_at(t).image_ref,
                prompt=prompt,
                answer=answer,
                delta=delta,
            )
        )
    report = GenerationReport(
        episodes=1, events=len(changes), records=len(records), skips=skips
    )
    return records, report


def generate_dataset(
    episodes: Iterable[Episode], cfg: GenerationConfig = GenerationConfig()
) -> tuple[list[QARecord], GenerationReport]:
    """Generate over many episodes; records sorted by (episode_id, t)."""
    all_records: list[QARecord] = []
    total = GenerationReport()
    for episode in episodes:
        records, report = generate(episode, cfg)
        all_records.extend(records)
        total.merge(report)
    all_records.sort(key=lambda r: (r.episode_id, r.t))
    return all_records, total


# ---------------------------------------------------------------------------
# JSONL I/O
# ---------------------------------------------------------------------------


def _require(condition: bool, path, line_no: int, message: str) -> None:
    if not condition:
        raise SchemaError(path, line_no, message)


def _episode_from_obj(obj, path, line_no: int) -> Episode:
    _require(isinstance(obj, dict), path, line_no, "episode must be a JSON object")
    for key in ("id", "instruction", "steps"):
        _require(key in obj, path, line_no, f"missing field {key!r}")
    _require(isinstance(obj["id"], str), path, line_no, "'id' must be a string")
    _require(isinstance(obj["instruction"], str), path, line_no, "'instruction' must be a string")
    semantics = obj.get("action_semantics", "relative")
    _require(
        semantics in ACTION_SEMANTICS,
        path,
        line_no,
        f"'action_semantics' must be one of {ACTION_SEMANTICS}, got {semantics!r}",
    )
    raw_steps = obj["steps"]
    _require(isinstance(raw_steps, list), path, line_no, "'steps' must be a list")
    steps = []
    for pos, raw in enumerate(raw_steps):
        _require(isinstance(raw, dict), path, line_no, f"step {pos} must be an object")
        for key in ("t", "image", "action"):
            _require(key in raw, path, line_no, f"step {pos} missing field {key!r}")
        _require(
            isinstance(raw["t"], int) and not isinstance(raw["t"], bool),
            path, line_no, f"step {pos}: 't' must be an integer",
        )
        _require(isinstance(raw["image"], str), path, line_no, f"step {pos}: 'image' must be a string")
        action = raw["action"]
        _require(
            isinstance(action, list) and len(action) == 7,
            path, line_no,
            f"step {pos}: 'action' must be a 7-element array, got "
            f"{len(action) if isinstance(action, list) else type(action).__name__}",
        )
        _require(
            all(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in action),
            path, line_no, f"step {pos}: 'action' must contain finite numbers",
        )
        try:
            steps.append(Step(raw["t"], raw["image"], ActionVector.from_sequence(action)))
        except ValueError as exc:
            raise SchemaError(path, line_no, f"step {pos}: {exc}") from exc
    try:
        return Episode(obj["id"], obj["instruction"], tuple(steps), semantics)
    except ValueError as exc:
        raise SchemaError(path, line_no, str(exc)) from exc


def _iter_jsonl(path) -> Iterable[tuple[int, object]]:
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield line_no, json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(path, line_no, f"invalid JSON: {exc.msg}") from exc


def read_episodes(path) -> list[Episode]:
    """Load episodes from JSONL; malformed lines raise SchemaError with the
    offending path:line."""
    return [_episode_from_obj(obj, path, line_no) for line_no, obj in _iter_jsonl(path)]


def episode_to_obj(episode: Episode) -> dict:
    return {
        "id": episode.id,
        "instruction": episode.instruction,
        "action_semantics": episode.action_semantics,
        "steps": [
            {"t": s.index, "image": s.image_ref, "action": list(s.action.as_tuple())}
            for s in episode.steps
        ],
    }


def write_episodes(episodes: Iterable[Episode], path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for episode in episodes:
            fh.write(json.dumps(episode_to_obj(episode), sort_keys=True))
            fh.write("\n")
            count += 1
    return count


def record_to_obj(record: QARecord) -> dict:
    return {
        "episode_id": record.episode_id,
        "t": record.t,
        "c_star": record.c_star,
        "image": record.image_ref,
        "prompt": record.prompt,
        "answer": record.answer,
        "delta": list(record.delta.as_tuple()),
    }


def write_records(records: Iterable[QARecord], path) -> int:
    """Write QA records as JSONL; returns the number written."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_obj(record), sort_keys=True))
            fh.write("\n")
            count += 1
    return count


def read_records(path) -> list[QARecord]:
    records = []
    for line_no, obj in _iter_jsonl(path):
        _require(isinstance(obj, dict), path, line_no, "record must be a JSON object")
        for key in ("episode_id", "t", "c_star", "image", "prompt", "answer", "delta"):
            _require(key in obj, path, line_no, f"missing field {key!r}")
        delta = obj["delta"]
        _require(
            isinstance(delta, list) and len(delta) == 4,
            path, line_no, "'delta' must be a 4-element array",
        )
        records.append(
            QARecord(
                episode_id=obj["episode_id"],
                t=obj["t"],
                c_star=obj["c_star"],
                image_ref=obj["image"],
                prompt=obj["prompt"],
                answer=obj["answer"],
                delta=CorrectionDelta(*(float(v) for v in delta)),
            )
        )
    return records
