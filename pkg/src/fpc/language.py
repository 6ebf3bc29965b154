"""Correction grammar: continuous deltas <-> discrete direction/magnitude text.

All directions are in the robot base frame: +x forward, -x backward, +y left,
-y right, +z up, -z down, +rz counterclockwise, -rz clockwise. Yaw is the only
rotation the grammar can express; magnitudes are two-bin (Small/Large). The
prompt template is versioned so prompts are byte-reproducible.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum

AXES = ("x", "y", "z", "rz")

# direction token -> (axis, sign)
DIRECTION_SIGNS: dict[str, tuple[str, float]] = {
    "forward": ("x", 1.0),
    "backward": ("x", -1.0),
    "left": ("y", 1.0),
    "right": ("y", -1.0),
    "up": ("z", 1.0),
    "down": ("z", -1.0),
    "counterclockwise": ("rz", 1.0),
    "clockwise": ("rz", -1.0),
}

_POSITIVE_TOKEN = {"x": "forward", "y": "left", "z": "up", "rz": "counterclockwise"}
_NEGATIVE_TOKEN = {"x": "backward", "y": "right", "z": "down", "rz": "clockwise"}

_WORD_RE = re.compile(r"[a-z]+")


class Magnitude(str, Enum):
    SMALL = "Small"
    LARGE = "Large"


class GripperEvent(str, Enum):
    CLOSE = "close"
    OPEN = "open"


class Verdict(str, Enum):
    APPROVE = "approve"
    CORRECT = "correct"


class MalformedResponseError(ValueError):
    """Supervisor response starts with neither Yes nor No (or fails strict
    grammar validation)."""


@dataclass(frozen=True)
class Thresholds:
    """Magnitude bins and the step sizes they decode back to.

    small/large bound the bins (shared by translation in meters and yaw in
    radians); step_small/step_large are what Small/Large tokens decode to.
    Defaults decode each bin to its lower boundary.
    """

    small: float = 0.01
    large: float = 0.1
    step_small: float = 0.01
    step_large: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.small < self.large:
            raise ValueError(
                f"need 0 < small < large, got small={self.small!r} large={self.large!r}"
            )
        if not 0.0 < self.step_small <= self.step_large:
            raise ValueError(
                f"need 0 < step_small <= step_large, got "
                f"{self.step_small!r}, {self.step_large!r}"
            )

    def step(self, magnitude: Magnitude) -> float:
        return self.step_large if magnitude is Magnitude.LARGE else self.step_small


@dataclass(frozen=True)
class CorrectionDelta:
    """Continuous correction on the expressible axes: translation plus yaw."""

    dx: float = 0.0
    dy: float = 0.0
    dz: float = 0.0
    drz: float = 0.0

    def __post_init__(self):
        for name in ("dx", "dy", "dz", "drz"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"non-finite correction component {name}")

    def component(self, axis: str) -> float:
        return {"x": self.dx, "y": self.dy, "z": self.dz, "rz": self.drz}[axis]

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.dx, self.dy, self.dz, self.drz)

    def is_zero(self) -> bool:
        return self.dx == 0.0 and self.dy == 0.0 and self.dz == 0.0 and self.drz == 0.0


ZERO_DELTA = CorrectionDelta()


@dataclass(frozen=True)
class Clause:
    """One (axis, direction, magnitude) correction statement."""

    axis: str
    direction: str
    magnitude: Magnitude

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"unknown axis {self.axis!r}")
        mapped = DIRECTION_SIGNS.get(self.direction)
        if mapped is None or mapped[0] != self.axis:
            raise ValueError(
                f"direction {self.direction!r} is not valid for axis {self.axis!r}"
            )

    @property
    def sign(self) -> float:
        return DIRECTION_SIGNS[self.direction][1]


@dataclass(frozen=True)
class CorrectionText:
    """Discretized correction: at most one clause per axis, in x, y, z, rz order."""

    clauses: tuple[Clause, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(self.clauses))
        order = [AXES.index(c.axis) for c in self.clauses]
        if sorted(set(order)) != order:
            raise ValueError("clauses must be unique per axis and in x, y, z, rz order")

    def is_empty(self) -> bool:
        return not self.clauses


@dataclass(frozen=True)
class ParsedCorrection:
    """Typed view of a supervisor response: verdict plus per-axis deltas."""

    verdict: Verdict
    delta: CorrectionDelta
    raw_text: str

    def __post_init__(self):
        if self.verdict is Verdict.APPROVE and not self.delta.is_zero():
            raise ValueError("approval must carry a zero delta")


def discretize(delta: CorrectionDelta, thresholds: Thresholds = Thresholds()) -> CorrectionText:
    """Bin a continuous correction into clauses.

    Per axis: magnitudes at or below the small threshold produce no clause;
    between the thresholds, a Small clause; above the large threshold, a
    Large clause. Direction comes from the sign.
    """
    clauses = []
    for axis in AXES:
        value = delta.component(axis)
        magnitude = abs(value)
        if magnitude <= thresholds.small:
            continue
        direction = _POSITIVE_TOKEN[axis] if value > 0 else _NEGATIVE_TOKEN[axis]
        bin_ = Magnitude.SMALL if magnitude <= thresholds.large else Magnitude.LARGE
        clauses.append(Clause(axis, direction, bin_))
    return CorrectionText(tuple(clauses))


def compose_answer(text: CorrectionText) -> str:
    """Render clauses as the canonical answer string.

    No clauses -> "Yes."; otherwise "No." followed by one
    "Move <dir>. <Mag>." (or "Rotate <dir>. <Mag>." for yaw) per clause.
    """
    if text.is_empty():
        return "Yes."
    parts = ["No."]
    for clause in text.clauses:
        verb = "Rotate" if clause.axis == "rz" else "Move"
        parts.append(f"{verb} {clause.direction}. {clause.magnitude.value}.")
    return " ".join(parts)


# Versioned prompt template. Placeholders are substituted literally (not via
# str.format) so instructions containing braces survive.
PROMPT_TEMPLATE_V1 = (
    "My task is to {instruction}. Should the robot arm {event} its gripper in "
    "the next step? If not, please specify the direction and magnitude of the "
    "gripper's movement and rotation.\n"
    "The direction must be chosen from the following options: move up, move "
    "down, move left, move right, rotate clockwise, and rotate "
    "counterclockwise. At most one option can be selected from each pair: "
    "move up or move down, move left or move right, and rotate clockwise or "
    "rotate counterclockwise. The magnitude should be either large or small. "
    "Your response should start with 'Yes' or 'No'. If the answer is 'No', "
    "then include the direction and magnitude of both movement and rotation.\n"
    "Here are some example responses: Example 1: Yes. Example 2: No. Move up. "
    "Large. Move left. Small. Example 3: No. Move down. Large. Rotate "
    "clockwise. Small."
)


def build_prompt(instruction: str, event: GripperEvent) -> str:
    """Assemble the three-part supervision prompt for one keyframe.

    Deterministic: identical inputs produce byte-identical prompts.
    """
    if not instruction or not instruction.strip():
        raise ValueError("instruction must be nonempty")
    event = GripperEvent(event)
    return PROMPT_TEMPLATE_V1.replace("{instruction}", instruction).replace(
        "{event}", event.value
    )


_STRICT_RE = re.compile(
    r"^No\.("
    r" (?:Move (?:forward|backward|left|right|up|down)"
    r"|Rotate (?:clockwise|counterclockwise))\. (?:Small|Large)\."
    r")+$"
)


def parse_response(
    text: str, thresholds: Thresholds = Thresholds(), strict: bool = False
) -> ParsedCorrection:
    """Parse a supervisor response into a verdict and signed per-axis steps.

    Lenient by default: the verdict comes from the leading word
    (case-insensitive, punctuation-tolerant); direction tokens anywhere in
    the rest each bind to the next Small/Large token before another direction
    (defaulting to Small), later mentions of an axis override earlier ones,
    and unrecognized text is ignored. strict=True instead requires the exact
    canonical grammar compose_answer emits, with clauses in axis order.

    Raises MalformedResponseError when the response starts with neither Yes
    nor No.
    """
    if text is None or not text.strip():
        raise MalformedResponseError("empty response")
    stripped = text.strip()
    lowered = stripped.lower()
    for variant in ("counter-clockwise", "counter clockwise"):
        lowered = lowered.replace(variant, "counterclockwise")
    words = _WORD_RE.findall(lowered)
    if not words:
        raise MalformedResponseError(f"no words in response: {stripped[:60]!r}")

    if words[0] == "yes":
        if strict and stripped != "Yes.":
            raise MalformedResponseError(f"strict mode: expected 'Yes.', got {stripped!r}")
        return ParsedCorrection(Verdict.APPROVE, ZERO_DELTA, text)
    if words[0] != "no":
        raise MalformedResponseError(
            f"response must start with Yes or No: {stripped[:60]!r}"
        )

    if strict:
        if not _STRICT_RE.match(stripped):
            raise MalformedResponseError(f"strict mode: malformed clauses: {stripped!r}")
        axes_seen = [DIRECTION_SIGNS[w][0] for w in words if w in DIRECTION_SIGNS]
        order = [AXES.index(a) for a in axes_seen]
        if sorted(set(order)) != order:
            raise MalformedResponseError(
                f"strict mode: duplicate or out-of-order axes: {stripped!r}"
            )

    deltas = {axis: 0.0 for axis in AXES}
    for idx, word in enumerate(words):
        if idx == 0 or word not in DIRECTION_SIGNS:
            continue
        axis, sign = DIRECTION_SIGNS[word]
        magnitude = Magnitude.SMALL
        for follower in words[idx + 1:]:
            if follower in DIRECTION_SIGNS:
                break
            if follower == "large":
                magnitude = Magnitude.LARGE
                break
            if follower == "small":
                break
        deltas[axis] = sign * thresholds.step(magnitude)

    delta = CorrectionDelta(deltas["x"], deltas["y"], deltas["z"], deltas["rz"])
    return ParsedCorrection(Verdict.CORRECT, delta, text)
