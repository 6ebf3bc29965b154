"""Dual-stream fusion of aligned action predictions.

The pose channel is averaged under weights that combine cosine similarity to
the newest prediction with exponential recency decay; the gripper channel is
averaged under the decay weights alone, because pose similarity says nothing
about gripper intent. Invoked once per control step, this is the package's
hot loop: a compiled kernel is used when available, with a pure-Python twin
selected at import otherwise (or when FPC_PURE_PY is set).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Sequence

from .actions import ActionVector

if os.environ.get("FPC_PURE_PY"):
    from . import _fusion_py as _kernel_mod
else:
    try:
        from . import _fusion_cy as _kernel_mod  # type: ignore[no-redef]
    except ImportError:
        from . import _fusion_py as _kernel_mod  # type: ignore[no-redef]

fuse_kernel = _kernel_mod.fuse_kernel

DEFAULT_EPSILON = 1e-7


def kernel_name() -> str:
    """Which kernel fuse() dispatches to: "compiled" or "pure"."""
    return _kernel_mod.KERNEL_NAME


@dataclass(frozen=True)
class FusionParams:
    """Weighting constants and the history depth.

    alpha scales the similarity before the sigmoid; lam is the recency decay
    rate; beta regularizes against overconfident weights; epsilon stabilizes
    the cosine denominator; n is how many historical predictions to fuse.
    n must not exceed the prediction horizon — enforced where the horizon is
    known (configuration load), not here.
    """

    alpha: float = 0.1
    lam: float = 0.01
    beta: float = 0.01
    epsilon: float = DEFAULT_EPSILON
    n: int = 4

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be > 0, got {self.alpha!r}")
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ValueError(f"lam must be > 0, got {self.lam!r}")
        if not (math.isfinite(self.beta) and 0.0 <= self.beta < 1.0):
            raise ValueError(f"beta must be in [0, 1), got {self.beta!r}")
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError(f"epsilon must be > 0, got {self.epsilon!r}")
        if self.n < 1:
            raise ValueError(f"history depth n must be >= 1, got {self.n!r}")


@dataclass(frozen=True)
class FusionResult:
    """Fused action plus the weights that produced it.

    pose_weights and gripper_weights are simplex vectors (nonnegative, sum 1)
    over however many predictions were actually fused. clamp_activated reports
    whether the nonnegativity clamp fired for any raw pose weight; with valid
    parameters it never does.
    """

    fused: ActionVector
    pose_weights: tuple[float, ...]
    gripper_weights: tuple[float, ...]
    similarities: tuple[float, ...]
    clamp_activated: bool = False


def _validated_poses(poses: Sequence[Sequence[float]], params: FusionParams) -> list[tuple[float, ...]]:
    if len(poses) == 0:
        raise ValueError("at least one pose is required")
    if len(poses) > params.n:
        raise ValueError(f"got {len(poses)} poses but history depth n={params.n}")
    out = []
    for k, pose in enumerate(poses):
        row = tuple(float(v) for v in pose)
        if len(row) != 6:
            raise ValueError(f"pose {k} must have 6 components, got {len(row)}")
        if not all(math.isfinite(v) for v in row):
            raise ValueError(f"pose {k} has non-finite components: {row}")
        out.append(row)
    return out


def fusion_weights(
    poses: Sequence[Sequence[float]], params: FusionParams
) -> tuple[tuple[float, ...], tuple[float, ...], tuple[float, ...]]:
    """Weights for a newest-first pose history, without averaging anything.

    Returns (pose_weights, gripper_weights, similarities). Gripper weights
    depend only on the decay rate and the history length, never on the pose
    values — the zero gripper placeholders below are irrelevant to them.
    """
    rows = _validated_poses(poses, params)
    _, _, pose_w, grip_w, sims, _ = fuse_kernel(
        rows, [0.0] * len(rows), params.alpha, params.lam, params.beta, params.epsilon
    )
    return tuple(pose_w), tuple(grip_w), tuple(sims)


def fuse(predictions: Sequence[ActionVector], params: FusionParams) -> FusionResult:
    """Fuse a newest-first history of predictions for the same timestep.

    Single-element histories run the full weight computation and return the
    input unchanged (the weight is exactly 1); identical inputs fuse to
    themselves exactly. Every fused component stays inside the componentwise
    range of the inputs, up to float rounding.
    """
    if len(predictions) == 0:
        raise ValueError("at least one prediction is required")
    if len(predictions) > params.n:
        raise ValueError(
            f"got {len(predictions)} predictions but history depth n={params.n}"
        )
    poses = [p.pose() for p in predictions]
    grips = [p.g for p in predictions]
    fused_pose, ghat, pose_w, grip_w, sims, clamped = fuse_kernel(
        poses, grips, params.alpha, params.lam, params.beta, params.epsilon
    )
    # ghat is a convex combination of values in [0, 1]; the clamp only ever
    # shaves float dust at the boundaries.
    if ghat < 0.0:
        ghat = 0.0
    elif ghat > 1.0:
        ghat = 1.0
    fused = ActionVector(
        fused_pose[0], fused_pose[1], fused_pose[2],
        fused_pose[3], fused_pose[4], fused_pose[5], ghat,
    )
    return FusionResult(fused, tuple(pose_w), tuple(grip_w), tuple(sims), clamped)
