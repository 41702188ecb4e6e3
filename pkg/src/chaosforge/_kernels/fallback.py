"""Pure-Python reference kernels.

These define the numeric contract that the compiled extension and the
generated C++ must match bit-for-bit:

* network math runs in IEEE-754 single precision, one rounding per
  operation, accumulating in ascending index order with the bias as the
  initial accumulator value;
* smooth activations are evaluated in double precision via libm and
  rounded to single once (``float32(tanh(float64(z)))``), so the same
  libm call on the C side reproduces identical bits;
* the Chen RK-4 kernel runs in double precision with a fixed expression
  order.

Keep every expression order in sync with ``_fastcore.pyx`` and the C++
templates under ``chaosforge/templates/``.
"""

import math

import numpy as np

ACT_RELU = 0
ACT_TANH = 1
ACT_SIGMOID = 2

ACTIVATION_IDS = {"relu": ACT_RELU, "tanh": ACT_TANH, "sigmoid": ACT_SIGMOID}

_F32 = np.float32
_ZERO32 = np.float32(0.0)

# exp(709) is the largest libm-exp argument that stays finite in double;
# below the cutoff the sigmoid underflows to +0.0f on both sides anyway.
_SIGMOID_CUTOFF = -709.0


def _act32(z, act_id):
    if act_id == ACT_RELU:
        return z if z > _ZERO32 else _ZERO32
    zd = float(z)
    if act_id == ACT_TANH:
        return _F32(math.tanh(zd))
    if zd < _SIGMOID_CUTOFF:
        return _ZERO32
    return _F32(1.0 / (1.0 + math.exp(-zd)))


def ann_forward(w1, b1, w2, b2, x, act_id):
    """Single-precision forward pass with fixed accumulation order.

    Arrays are float32; accumulator starts at the bias and adds
    ``w[i, j] * x[j]`` for ascending j, each product and sum rounded to
    single precision.
    """
    h_size, in_size = w1.shape
    out_size = w2.shape[0]
    hidden = np.empty(h_size, dtype=np.float32)
    for i in range(h_size):
        acc = b1[i]
        row = w1[i]
        for j in range(in_size):
            acc = _F32(acc + _F32(row[j] * x[j]))
        hidden[i] = _act32(acc, act_id)
    out = np.empty(out_size, dtype=np.float32)
    for i in range(out_size):
        acc = b2[i]
        row = w2[i]
        for j in range(h_size):
            acc = _F32(acc + _F32(row[j] * hidden[j]))
        out[i] = acc
    return out


def oscillator_run(w1, b1, w2, b2, seed, iterations, act_id, guard_lo, guard_hi):
    """Closed-loop iteration: output feeds back as the next input.

    Returns ``(outputs, fail_index)`` where outputs is an
    ``iterations x I`` float32 matrix and fail_index is the first
    iteration whose output is non-finite or outside
    ``[guard_lo, guard_hi]`` (-1 when the run completes).
    """
    dim = len(seed)
    out = np.zeros((iterations, dim), dtype=np.float32)
    current = np.array(seed, dtype=np.float32, copy=True)
    lo = _F32(guard_lo)
    hi = _F32(guard_hi)
    for it in range(iterations):
        current = ann_forward(w1, b1, w2, b2, current, act_id)
        out[it] = current
        for v in current:
            if not math.isfinite(v) or v < lo or v > hi:
                return out, it
    return out, -1


def rk4_chen(x0, a, b, c, dt, substeps, steps):
    """Double-precision RK-4 trajectory of the Chen system.

    Each stored step advances time by ``dt`` using ``substeps`` internal
    RK-4 stages of size ``dt / substeps``.  Returns ``(states, fail_index)``
    with states of shape ``(steps + 1, 3)``; fail_index is the first stored
    step whose state is non-finite (-1 on success).
    """
    h = dt / substeps
    half = 0.5 * h
    sixth = h / 6.0
    states = np.zeros((steps + 1, 3), dtype=np.float64)
    s0, s1, s2 = float(x0[0]), float(x0[1]), float(x0[2])
    states[0] = (s0, s1, s2)

    def rhs(y0, y1, y2):
        return (
            a * (y1 - y0),
            (c - a) * y0 - y0 * y2 + c * y1,
            y0 * y1 - b * y2,
        )

    for step in range(1, steps + 1):
        for _ in range(substeps):
            k10, k11, k12 = rhs(s0, s1, s2)
            k20, k21, k22 = rhs(s0 + half * k10, s1 + half * k11, s2 + half * k12)
            k30, k31, k32 = rhs(s0 + half * k20, s1 + half * k21, s2 + half * k22)
            k40, k41, k42 = rhs(s0 + h * k30, s1 + h * k31, s2 + h * k32)
            s0 = s0 + sixth * (k10 + 2.0 * k20 + 2.0 * k30 + k40)
            s1 = s1 + sixth * (k11 + 2.0 * k21 + 2.0 * k31 + k41)
            s2 = s2 + sixth * (k12 + 2.0 * k22 + 2.0 * k32 + k42)
        states[step] = (s0, s1, s2)
        if not (math.isfinite(s0) and math.isfinite(s1) and math.isfinite(s2)):
            return states, step
    return states, -1
