"""Closed-loop oscillator and PRNG bit extraction.

The loop selects the external seed on the first iteration and feeds the
network's own output back as the input afterwards.  It runs in normalized
coordinates and single precision, matching the generated hardware core
bit-for-bit.
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from . import _kernels
from .ann import forward
from .errors import NonFiniteError
from .integrator import denormalize

__all__ = [
    "OscillatorState",
    "BitStream",
    "step",
    "generate",
    "extract_bits",
    "GUARD_LO",
    "GUARD_HI",
]

# Runaway guard: normalized coordinates live in [0, 1]; leaving that range
# by more than 10x its width means the feedback loop has diverged.
GUARD_LO = np.float32(-10.0)
GUARD_HI = np.float32(11.0)


@dataclass
class OscillatorState:
    model: "AnnModel"
    seed: np.ndarray  # (I,) float32, normalized coordinates
    current: np.ndarray = None
    iteration: int = 0

    def __post_init__(self):
        if self.model.output_size != self.model.input_size:
            raise ValueError("oscillator requires a model with O == I")
        self.seed = np.ascontiguousarray(self.seed, dtype=np.float32)
        if self.seed.shape != (self.model.input_size,):
            raise ValueError(
                f"seed has shape {self.seed.shape}, expected "
                f"({self.model.input_size},)"
            )
        if self.current is None:
            self.current = self.seed.copy()


@dataclass
class BitStream:
    """Packed MSB-first bit sequence extracted from oscillator outputs."""

    data: bytes
    n_bits: int
    bits_per_value: int
    source_dims: List[int]

    def to_bit_array(self):
        bits = np.unpackbits(np.frombuffer(self.data, dtype=np.uint8))
        return bits[: self.n_bits]


def step(state):
    """Advance one iteration; returns the new current vector.

    The first iteration consumes the seed (MUX select = external); later
    iterations feed the previous output back.  Raises NonFiniteError when
    the output is non-finite or escapes the divergence guard.
    """
    inp = state.seed if state.iteration == 0 else state.current
    out = forward(state.model, inp)
    state.iteration += 1
    state.current = out
    for v in out:
        if not np.isfinite(v) or v < GUARD_LO or v > GUARD_HI:
            raise NonFiniteError(
                f"oscillator diverged at iteration {state.iteration - 1}",
                index=state.iteration - 1,
            )
    return out


def generate(state, iterations):
    """Run ``iterations`` steps; rows are successive outputs.

    Bit-deterministic for a fixed model and seed.  Raises NonFiniteError
    with the failing iteration index if the divergence guard trips.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if state.iteration != 0:
        raise ValueError("generate requires a fresh oscillator state")
    model = state.model
    out, fail = _kernels.oscillator_run(
        model.w1,
        model.b1,
        model.w2,
        model.b2,
        state.seed,
        iterations,
        model.activation_id,
        GUARD_LO,
        GUARD_HI,
    )
    if fail >= 0:
        raise NonFiniteError(
            f"oscillator diverged at iteration {fail}", index=int(fail)
        )
    state.iteration = iterations
    state.current = out[-1].copy()
    return out


def generate_raw(state, iterations):
    """Like :func:`generate` but rows are denormalized to raw coordinates."""
    out = generate(state, iterations)
    return denormalize(out, state.model.norm_min, state.model.norm_max)


def extract_bits(outputs, bits_per_value=8, dims=None):
    """Take the low mantissa bits of each selected float32 value.

    For every output row and every dimension in ``dims`` (in the given
    order) the low ``bits_per_value`` bits of the IEEE-754 single-precision
    bit pattern are appended most-significant-first.  The packed stream is
    padded with zero bits to a whole byte at the very end.
    """
    if not 1 <= bits_per_value <= 23:
        raise ValueError("bits_per_value must lie in [1, 23]")
    outputs = np.asarray(outputs, dtype=np.float32)
    if outputs.ndim == 1:
        outputs = outputs[:, None]
    if dims is None:
        dims = list(range(outputs.shape[1]))
    dims = list(dims)
    patterns = outputs[:, dims].view(np.uint32)
    # bit k of the stream (per value, MSB first) is pattern bit
    # (bits_per_value - 1 - k)
    shifts = np.arange(bits_per_value - 1, -1, -1, dtype=np.uint32)
    bits = ((patterns[:, :, None] >> shifts) & np.uint32(1)).astype(np.uint8)
    flat = bits.reshape(-1)
    packed = np.packbits(flat)  # zero-pads the final partial byte
    return BitStream(
        data=packed.tobytes(),
        n_bits=int(flat.size),
        bits_per_value=bits_per_value,
        source_dims=dims,
    )
