# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled fusion kernel.

Twin of fpc._fusion_py: same operation order, same libm calls, so results are
bit-identical to the pure-Python kernel. Keep the two in sync when editing.
"""

from libc.math cimport exp, sqrt
from libc.stdlib cimport free, malloc

KERNEL_NAME = "compiled"


def fuse_kernel(poses, grips, double alpha, double lam, double beta, double eps):
    """See fpc._fusion_py.fuse_kernel; identical contract and arithmetic."""
    cdef Py_ssize_t n = len(poses)
    cdef Py_ssize_t k, i
    # layout: n*6 pose values, then n grips, n weights, n decays, n sims
    cdef double *buf = <double *> malloc(n * 10 * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef double *p = buf
    cdef double *g = buf + n * 6
    cdef double *w = buf + n * 7
    cdef double *dec = buf + n * 8
    cdef double *sim = buf + n * 9

    cdef double norm0_sq, norm0, dot, normk_sq, s, d, raw
    cdef double weight_sum, decay_sum, acc, anchor, g0, gacc, ghat
    cdef bint clamped = False

    try:
        for k in range(n):
            row = poses[k]
            for i in range(6):
                p[k * 6 + i] = row[i]
            g[k] = grips[k]

        norm0_sq = 0.0
        for i in range(6):
            norm0_sq += p[i] * p[i]
        norm0 = sqrt(norm0_sq)

        weight_sum = 0.0
        decay_sum = 0.0
        for k in range(n):
            dot = 0.0
            normk_sq = 0.0
            for i in range(6):
                dot += p[k * 6 + i] * p[i]
                normk_sq += p[k * 6 + i] * p[k * 6 + i]
            sim[k] = dot / (sqrt(normk_sq) * norm0 + eps)
            s = 1.0 / (1.0 + exp(-alpha * sim[k]))
            d = exp(-lam * <double> k)
            raw = (1.0 - beta) * s * d
            if raw < 0.0:
                clamped = True
                raw = 0.0
            w[k] = raw
            dec[k] = d
            weight_sum += raw
            decay_sum += d

        for k in range(n):
            w[k] = w[k] / weight_sum
            dec[k] = dec[k] / decay_sum

        fused = [0.0] * 6
        for i in range(6):
            anchor = p[i]
            acc = 0.0
            for k in range(n):
                acc += w[k] * (p[k * 6 + i] - anchor)
            # acc == 0.0 keeps the anchor's bits (including signed zero) untouched
            fused[i] = anchor if acc == 0.0 else anchor + acc

        g0 = g[0]
        gacc = 0.0
        for k in range(n):
            gacc += dec[k] * (g[k] - g0)
        ghat = g0 if gacc == 0.0 else g0 + gacc

        pose_w = [w[k] for k in range(n)]
        grip_w = [dec[k] for k in range(n)]
        sims = [sim[k] for k in range(n)]
    finally:
        free(buf)

    return fused, ghat, pose_w, grip_w, sims, clamped
