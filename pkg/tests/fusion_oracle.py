"""Independent straight-line scalar reference for the fusion math.

Implements the weighting and averaging formulas literally (plain weighted
sums, no anchoring tricks, no code shared with the library kernels) so the
library can be checked against a separately written path. Keep it boring.
"""

import math


def reference_fuse(poses, grips, alpha, lam, beta, eps):
    n = len(poses)
    p0 = poses[0]
    norm0 = math.sqrt(sum(v * v for v in p0))

    sims = []
    sigmoids = []
    decays = []
    for k in range(n):
        pk = poses[k]
        dot = sum(a * b for a, b in zip(pk, p0))
        normk = math.sqrt(sum(v * v for v in pk))
        sim = dot / (normk * norm0 + eps)
        sims.append(sim)
        sigmoids.append(1.0 / (1.0 + math.exp(-alpha * sim)))
        decays.append(math.exp(-lam * k))

    raw = [(1.0 - beta) * sigmoids[k] * decays[k] for k in range(n)]
    clamped = [max(0.0, r) for r in raw]
    total = sum(clamped)
    pose_weights = [c / total for c in clamped]

    decay_total = sum(decays)
    grip_weights = [d / decay_total for d in decays]

    pose = [sum(pose_weights[k] * poses[k][i] for k in range(n)) for i in range(6)]
    grip = sum(grip_weights[k] * grips[k] for k in range(n))

    return {
        "pose": pose,
        "grip": grip,
        "pose_weights": pose_weights,
        "grip_weights": grip_weights,
        "similarities": sims,
        "raw_products": raw,
    }
