# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the kernels in ``fallback.py``.

Expression order matches fallback.py statement by statement; both sides
round once per operation (build with -ffp-contract=off so no fused
multiply-adds are emitted).
"""

import numpy as np

cimport cython
from libc.math cimport exp, isfinite, tanh


cdef inline float _act32(float z, int act_id) nogil:
    cdef double zd
    if act_id == 0:  # relu
        return z if z > 0.0 else 0.0
    zd = z
    if act_id == 1:  # tanh
        return <float> tanh(zd)
    if zd < -709.0:  # sigmoid underflow guard, see fallback.py
        return 0.0
    return <float> (1.0 / (1.0 + exp(-zd)))


cdef inline int _forward(const float[:, ::1] w1, const float[::1] b1,
                         const float[:, ::1] w2, const float[::1] b2,
                         const float* x, float* hidden, float* out,
                         int in_size, int h_size, int out_size,
                         int act_id) nogil:
    cdef int i, j
    cdef float acc
    for i in range(h_size):
        acc = b1[i]
        for j in range(in_size):
            acc = acc + w1[i, j] * x[j]
        hidden[i] = _act32(acc, act_id)
    for i in range(out_size):
        acc = b2[i]
        for j in range(h_size):
            acc = acc + w2[i, j] * hidden[j]
        out[i] = acc
    return 0


def ann_forward(const float[:, ::1] w1, const float[::1] b1,
                const float[:, ::1] w2, const float[::1] b2,
                const float[::1] x, int act_id):
    cdef int in_size = w1.shape[1]
    cdef int h_size = w1.shape[0]
    cdef int out_size = w2.shape[0]
    hidden_arr = np.empty(h_size, dtype=np.float32)
    out_arr = np.empty(out_size, dtype=np.float32)
    cdef float[::1] hidden = hidden_arr
    cdef float[::1] out = out_arr
    cdef float[::1] xin = np.ascontiguousarray(x, dtype=np.float32)
    _forward(w1, b1, w2, b2, &xin[0], &hidden[0], &out[0],
             in_size, h_size, out_size, act_id)
    return out_arr


def oscillator_run(const float[:, ::1] w1, const float[::1] b1,
                   const float[:, ::1] w2, const float[::1] b2,
                   const float[::1] seed, long iterations, int act_id,
                   float guard_lo, float guard_hi):
    cdef int in_size = w1.shape[1]
    cdef int h_size = w1.shape[0]
    cdef int out_size = w2.shape[0]
    cdef long it
    cdef int i
    cdef long fail = -1
    out_arr = np.zeros((iterations, out_size), dtype=np.float32)
    cdef float[:, ::1] out = out_arr
    cur_arr = np.array(seed, dtype=np.float32, copy=True)
    cdef float[::1] cur = cur_arr
    hidden_arr = np.empty(h_size, dtype=np.float32)
    cdef float[::1] hidden = hidden_arr
    nxt_arr = np.empty(out_size, dtype=np.float32)
    cdef float[::1] nxt = nxt_arr
    with nogil:
        for it in range(iterations):
            _forward(w1, b1, w2, b2, &cur[0], &hidden[0], &nxt[0],
                     in_size, h_size, out_size, act_id)
            for i in range(out_size):
                out[it, i] = nxt[i]
                cur[i] = nxt[i]
            for i in range(out_size):
                if (not isfinite(nxt[i])) or nxt[i] < guard_lo or nxt[i] > guard_hi:
                    fail = it
                    break
            if fail >= 0:
                break
    return out_arr, fail


def rk4_chen(const double[::1] x0, double a, double b, double c,
             double dt, long substeps, long steps):
    cdef double h = dt / substeps
    cdef double half = 0.5 * h
    cdef double sixth = h / 6.0
    cdef double s0 = x0[0], s1 = x0[1], s2 = x0[2]
    cdef double k10, k11, k12, k20, k21, k22, k30, k31, k32, k40, k41, k42
    cdef double t0, t1, t2
    cdef long step, sub
    cdef long fail = -1
    states_arr = np.zeros((steps + 1, 3), dtype=np.float64)
    cdef double[:, ::1] states = states_arr
    states[0, 0] = s0
    states[0, 1] = s1
    states[0, 2] = s2
    with nogil:
        for step in range(1, steps + 1):
            for sub in range(substeps):
                k10 = a * (s1 - s0)
                k11 = (c - a) * s0 - s0 * s2 + c * s1
                k12 = s0 * s1 - b * s2
                t0 = s0 + half * k10
                t1 = s1 + half * k11
                t2 = s2 + half * k12
                k20 = a * (t1 - t0)
                k21 = (c - a) * t0 - t0 * t2 + c * t1
                k22 = t0 * t1 - b * t2
                t0 = s0 + half * k20
                t1 = s1 + half * k21
                t2 = s2 + half * k22
                k30 = a * (t1 - t0)
                k31 = (c - a) * t0 - t0 * t2 + c * t1
                k32 = t0 * t1 - b * t2
                t0 = s0 + h * k30
                t1 = s1 + h * k31
                t2 = s2 + h * k32
                k40 = a * (t1 - t0)
                k41 = (c - a) * t0 - t0 * t2 + c * t1
                k42 = t0 * t1 - b * t2
                s0 = s0 + sixth * (k10 + 2.0 * k20 + 2.0 * k30 + k40)
                s1 = s1 + sixth * (k11 + 2.0 * k21 + 2.0 * k31 + k41)
                s2 = s2 + sixth * (k12 + 2.0 * k22 + 2.0 * k32 + k42)
            states[step, 0] = s0
            states[step, 1] = s1
            states[step, 2] = s2
            if not (isfinite(s0) and isfinite(s1) and isfinite(s2)):
                fail = step
                break
    return states_arr, fail
