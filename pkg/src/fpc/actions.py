"""Action vectors and the prediction-history buffer.

Commands are 7-D: [dx, dy, dz, drx, dry, drz, g] — translation in meters,
incremental rotation in radians, gripper in [0, 1] — all in the robot base
frame. The buffer stores one fixed-horizon chunk per control step and can
slice out every stored prediction that targets a given timestep.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

DEFAULT_HORIZON = 15

_COMPONENTS = ("dx", "dy", "dz", "drx", "dry", "drz", "g")


class ChunkGapError(ValueError):
    """Pushed chunk is not consecutive with the newest buffered chunk."""


@dataclass(frozen=True)
class ActionVector:
    """One end-effector command. Immutable, so it is safe to share across
    threads and to compare bit-for-bit in pass-through tests."""

    dx: float
    dy: float
    dz: float
    drx: float
    dry: float
    drz: float
    g: float

    def __post_init__(self):
        for name in _COMPONENTS:
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValueError(f"non-finite action component {name}={value!r}")
        if not 0.0 <= self.g <= 1.0:
            raise ValueError(f"gripper command outside [0, 1]: {self.g!r}")

    def pose(self) -> tuple[float, float, float, float, float, float]:
        """The 6-D pose delta (everything but the gripper)."""
        return (self.dx, self.dy, self.dz, self.drx, self.dry, self.drz)

    def as_tuple(self) -> tuple[float, ...]:
        return (self.dx, self.dy, self.dz, self.drx, self.dry, self.drz, self.g)

    @classmethod
    def from_sequence(cls, values) -> "ActionVector":
        vals = list(values)
        if len(vals) != 7:
            raise ValueError(f"action must have 7 components, got {len(vals)}")
        return cls(*(float(v) for v in vals))


ZERO_ACTION = ActionVector(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class PredictionChunk:
    """A fixed-horizon plan: actions[j] is the command intended for timestep
    issued_at + j."""

    issued_at: int
    actions: tuple[ActionVector, ...]

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        if self.issued_at < 0:
            raise ValueError(f"issued_at must be >= 0, got {self.issued_at}")
        if len(self.actions) < 1:
            raise ValueError("chunk must contain at least one action")

    @property
    def horizon(self) -> int:
        return len(self.actions)


@dataclass(frozen=True)
class AlignedPredictions:
    """Predictions for one target timestep, newest-first.

    Element k came from the chunk issued k steps before the target, so list
    position doubles as the recency index used for decay weighting. The list
    is truncated (never padded) at the first unavailable chunk; `notes`
    records why. `requested` preserves the caller's asked-for depth.
    """

    actions: tuple[ActionVector, ...]
    requested: int
    notes: tuple[str, ...] = ()

    @property
    def count(self) -> int:
        return len(self.actions)


class PredictionBuffer:
    """Newest-first ring of consecutive prediction chunks.

    Single-writer: callers serialize push(); stored chunks are immutable.
    Push raises ChunkGapError on a non-consecutive timestep — reset the
    buffer at episode boundaries instead of pushing across the gap.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = int(capacity)
        self._chunks: deque[PredictionChunk] = deque()

    def __len__(self) -> int:
        return len(self._chunks)

    @property
    def chunks(self) -> tuple[PredictionChunk, ...]:
        """Snapshot, newest first."""
        return tuple(self._chunks)

    @property
    def newest_issued_at(self) -> int | None:
        return self._chunks[0].issued_at if self._chunks else None

    def clear(self) -> None:
        self._chunks.clear()

    def push(self, chunk: PredictionChunk) -> None:
        if self._chunks:
            expected = self._chunks[0].issued_at + 1
            if chunk.issued_at != expected:
                raise ChunkGapError(
                    f"expected issued_at {expected}, got {chunk.issued_at}; "
                    "reset the buffer on episode boundaries"
                )
        self._chunks.appendleft(chunk)
        while len(self._chunks) > self.capacity:
            self._chunks.pop()

    def aligned_predictions(self, t: int, n: int) -> AlignedPredictions:
        """All stored predictions for timestep t, from the n most recent chunks.

        Element k is chunk(t-k).actions[k]: what the policy predicted for time
        t when it last saw the world at time t-k. Missing or horizon-exceeded
        chunks truncate the result with a note; they are never padded over.
        """
        if n < 1:
            raise ValueError(f"history depth must be >= 1, got {n}")
        if n > self.capacity:
            raise ValueError(
                f"history depth {n} exceeds buffer capacity {self.capacity}"
            )
        actions: list[ActionVector] = []
        notes: list[str] = []
        newest = self.newest_issued_at
        for k in range(n):
            want = t - k
            if newest is None or want > newest or want < 0:
                notes.append(f"k={k}: no chunk issued at timestep {want}")
                break
            idx = newest - want
            if idx >= len(self._chunks):
                notes.append(f"k={k}: chunk for timestep {want} already evicted")
                break
            chunk = self._chunks[idx]
            offset = t - chunk.issued_at
            if offset < 0 or offset >= chunk.horizon:
                notes.append(
                    f"k={k}: horizon exceeded (offset {offset} outside "
                    f"0..{chunk.horizon - 1})"
                )
                break
            actions.append(chunk.actions[offset])
        return AlignedPredictions(tuple(actions), n, tuple(notes))
