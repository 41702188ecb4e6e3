"""RK-4 integration of chaotic systems and training-dataset construction.

Integration runs in double precision; datasets are stored in single
precision to match the hardware target.  Consecutive stored states are one
time step ``dt`` apart; ``substeps`` internal RK-4 stages per stored step
control integration accuracy independently of the sampling cadence.
"""

import struct
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegenerateDimensionError, NonFiniteError

__all__ = [
    "Trajectory",
    "Dataset",
    "rk4_step",
    "integrate",
    "build_dataset",
    "normalize",
    "denormalize",
    "save_dataset",
    "load_dataset",
    "DATASET_MAGIC",
]

# Dataset file layout: magic, little-endian u32 N, u64 M, u64 train_count,
# N x (f32 min, f32 max), then M rows of 2N f32 values (input then target).
DATASET_MAGIC = b"HENNCDS1"


@dataclass
class Trajectory:
    states: np.ndarray  # (steps+1, N) float64
    dt: float
    t0: float = 0.0

    @property
    def x0(self):
        return self.states[0]

    def __len__(self):
        return len(self.states)


@dataclass
class Dataset:
    """Consecutive-timestep sample pairs with normalization metadata.

    ``inputs[k]`` is the state one step before ``targets[k]``; the first
    ``train_count`` pairs are the chronological training split.  When the
    dataset is normalized, ``norm_min``/``norm_max`` hold the per-dimension
    raw-coordinate bounds fitted on the training portion.
    """

    inputs: np.ndarray  # (M, N) float32
    targets: np.ndarray  # (M, N) float32
    split_ratio: float
    train_count: int
    norm_min: np.ndarray  # (N,) float32
    norm_max: np.ndarray  # (N,) float32
    normalized: bool = True

    @property
    def test_count(self):
        return len(self.inputs) - self.train_count

    @property
    def dimension(self):
        return self.inputs.shape[1]

    def train_pairs(self):
        return self.inputs[: self.train_count], self.targets[: self.train_count]

    def test_pairs(self):
        return self.inputs[self.train_count:], self.targets[self.train_count:]


def rk4_step(system, state, dt):
    """One classical RK-4 step: X + (dt/6)(k1 + 2 k2 + 2 k3 + k4).

    Raises NonFiniteError if any stage derivative or the result is
    non-finite.
    """
    x = np.asarray(state, dtype=np.float64)
    half = 0.5 * dt
    k1 = system.rhs(x)
    k2 = system.rhs(x + half * k1)
    k3 = system.rhs(x + half * k2)
    k4 = system.rhs(x + dt * k3)
    result = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    for arr in (k1, k2, k3, k4, result):
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError("non-finite value in RK-4 step")
    return result


def integrate(system, x0, dt, steps, substeps=1):
    """Integrate ``system`` for ``steps`` stored steps of size ``dt``.

    Each stored step is computed with ``substeps`` internal RK-4 stages of
    size ``dt / substeps``.  The Chen system dispatches to the compiled
    kernel; the generic path produces bit-identical results.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    if dt <= 0:
        raise ValueError("dt must be positive")
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.shape != (system.dimension,):
        raise ValueError(
            f"x0 has shape {x0.shape}, expected ({system.dimension},)"
        )

    if system.name == "chen":
        p = system.params
        states, fail = _kernels.rk4_chen(
            x0, p["a"], p["b"], p["c"], dt, substeps, steps
        )
        if fail >= 0:
            raise NonFiniteError(
                f"integration diverged at step {fail}", index=int(fail)
            )
        return Trajectory(states=states, dt=dt)

    states = np.zeros((steps + 1, system.dimension), dtype=np.float64)
    states[0] = x0
    x = x0
    h = dt / substeps
    for step in range(1, steps + 1):
        try:
            for _ in range(substeps):
                x = rk4_step(system, x, h)
        except NonFiniteError:
            raise NonFiniteError(
                f"integration diverged at step {step}", index=step
            ) from None
        states[step] = x
    return Trajectory(states=states, dt=dt)


def _train_count(split_ratio, n_pairs):
    # round-half-up keeps the split deterministic across platforms
    return int(np.floor(split_ratio * n_pairs + 0.5))


def build_dataset(trajectory, split_ratio=0.8, normalize_flag=True):
    """Pair consecutive states into (input, target) samples.

    The first ``round(split_ratio * M)`` pairs form the training split
    (chronological, unshuffled).  With ``normalize_flag`` the per-dimension
    min/max is fitted on the training-portion states only and applied to
    every stored value; a dimension that is constant over the fit window
    raises DegenerateDimensionError.
    """
    states = np.asarray(trajectory.states, dtype=np.float64)
    if len(states) < 2:
        raise ValueError("trajectory must contain at least 2 states")
    if not 0.0 < split_ratio < 1.0:
        raise ValueError("split_ratio must be in (0, 1)")
    n_pairs = len(states) - 1
    train_count = _train_count(split_ratio, n_pairs)

    if normalize_flag:
        # fit window: every state visible to the training pairs
        fit = states[: train_count + 1]
        lo = fit.min(axis=0)
        hi = fit.max(axis=0)
        degenerate = np.nonzero(hi == lo)[0]
        if degenerate.size:
            raise DegenerateDimensionError(
                f"dimension(s) {degenerate.tolist()} constant over the "
                "training portion; cannot min-max normalize"
            )
        scaled = (states - lo) / (hi - lo)
        inputs = scaled[:-1].astype(np.float32)
        targets = scaled[1:].astype(np.float32)
        norm_min = lo.astype(np.float32)
        norm_max = hi.astype(np.float32)
    else:
        inputs = states[:-1].astype(np.float32)
        targets = states[1:].astype(np.float32)
        norm_min = np.zeros(states.shape[1], dtype=np.float32)
        norm_max = np.ones(states.shape[1], dtype=np.float32)

    return Dataset(
        inputs=inputs,
        targets=targets,
        split_ratio=split_ratio,
        train_count=train_count,
        norm_min=norm_min,
        norm_max=norm_max,
        normalized=normalize_flag,
    )


def normalize(values, norm_min, norm_max):
    """Map raw coordinates into [0, 1] with the stored per-dimension stats."""
    v = np.asarray(values, dtype=np.float64)
    lo = np.asarray(norm_min, dtype=np.float64)
    hi = np.asarray(norm_max, dtype=np.float64)
    return ((v - lo) / (hi - lo)).astype(np.float32)


def denormalize(values, norm_min, norm_max):
    """Inverse of :func:`normalize`."""
    v = np.asarray(values, dtype=np.float64)
    lo = np.asarray(norm_min, dtype=np.float64)
    hi = np.asarray(norm_max, dtype=np.float64)
    return (v * (hi - lo) + lo).astype(np.float32)


def save_dataset(dataset, path):
    """Write the binary dataset file (see DATASET_MAGIC comment)."""
    m, n = dataset.inputs.shape
    with open(path, "wb") as fh:
        fh.write(DATASET_MAGIC)
        fh.write(struct.pack("<IQQ", n, m, dataset.train_count))
        stats = np.empty((n, 2), dtype="<f4")
        stats[:, 0] = dataset.norm_min
        stats[:, 1] = dataset.norm_max
        fh.write(stats.tobytes())
        rows = np.empty((m, 2 * n), dtype="<f4")
        rows[:, :n] = dataset.inputs
        rows[:, n:] = dataset.targets
        fh.write(rows.tobytes())


def load_dataset(path) -> Dataset:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != DATASET_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        n, m, train_count = struct.unpack("<IQQ", fh.read(4 + 8 + 8))
        stats = np.frombuffer(fh.read(8 * n), dtype="<f4").reshape(n, 2)
        rows = np.frombuffer(fh.read(8 * n * m), dtype="<f4").reshape(m, 2 * n)
        trailing = fh.read(1)
        if trailing:
            raise ValueError(f"{path}: trailing bytes after {m} rows")
    norm_min = stats[:, 0].copy()
    norm_max = stats[:, 1].copy()
    normalized = not (np.all(norm_min == 0.0) and np.all(norm_max == 1.0))
    return Dataset(
        inputs=rows[:, :n].copy(),
        targets=rows[:, n:].copy(),
        split_ratio=train_count / m if m else 0.0,
        train_count=int(train_count),
        norm_min=norm_min,
        norm_max=norm_max,
        normalized=normalized,
    )
