"""Pure-Python fusion kernel.

Mirrors the compiled kernel in fpc._fusion_cy operation for operation, so the
two produce bit-identical results on the same platform. Keep the arithmetic
order in sync when editing either one.
"""

from __future__ import annotations

from math import exp, sqrt

KERNEL_NAME = "pure"


def fuse_kernel(poses, grips, alpha, lam, beta, eps):
    """Weight and average a newest-first prediction history.

    poses: sequence of 6-float sequences (pose deltas), newest first.
    grips: matching gripper values in [0, 1].

    Pose weights combine cosine similarity to the newest pose (sigmoid-scaled
    by alpha) with exponential recency decay exp(-lam*k), regularized by beta
    and clamped at zero before normalization. Gripper weights use the decay
    term alone. Both averages are anchored at the newest prediction so that
    identical inputs fuse to themselves bit-exactly.

    Returns (fused_pose, fused_grip, pose_weights, grip_weights,
    similarities, clamp_activated).
    """
    n = len(poses)
    p0 = poses[0]

    norm0_sq = 0.0
    for i in range(6):
        norm0_sq += p0[i] * p0[i]
    norm0 = sqrt(norm0_sq)

    sims = []
    weights = []
    decays = []
    clamped = False
    weight_sum = 0.0
    decay_sum = 0.0
    for k in range(n):
        pk = poses[k]
        dot = 0.0
        normk_sq = 0.0
        for i in range(6):
            dot += pk[i] * p0[i]
            normk_sq += pk[i] * pk[i]
        sim = dot / (sqrt(normk_sq) * norm0 + eps)
        s = 1.0 / (1.0 + exp(-alpha * sim))
        d = exp(-lam * k)
        raw = (1.0 - beta) * s * d
        if raw < 0.0:
            clamped = True
            raw = 0.0
        sims.append(sim)
        weights.append(raw)
        decays.append(d)
        weight_sum += raw
        decay_sum += d

    pose_w = [w / weight_sum for w in weights]
    grip_w = [d / decay_sum for d in decays]

    fused = [0.0] * 6
    for i in range(6):
        anchor = p0[i]
        acc = 0.0
        for k in range(n):
            acc += pose_w[k] * (poses[k][i] - anchor)
        # acc == 0.0 keeps the anchor's bits (including signed zero) untouched
        fused[i] = anchor if acc == 0.0 else anchor + acc

    g0 = grips[0]
    gacc = 0.0
    for k in range(n):
        gacc += grip_w[k] * (grips[k] - g0)
    ghat = g0 if gacc == 0.0 else g0 + gacc

    return fused, ghat, pose_w, grip_w, sims, clamped
