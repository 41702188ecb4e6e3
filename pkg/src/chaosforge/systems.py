"""Chaotic ODE systems and operation-count accounting.

A system is an autonomous N-dimensional right-hand side dX/dt = f(X) with
named parameters.  Each built-in system documents a hand count of the
multiplications and additions inside f (the "dynamic" terms); the counts
feed the RK-4 cost model, where subtractions count as additions.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict

import numpy as np

__all__ = [
    "ChaoticSystem",
    "OpCount",
    "chen_rhs",
    "chen_system",
    "lorenz_rhs",
    "lorenz_system",
    "builtin_system",
    "BUILTIN_SYSTEMS",
    "count_rk4_ops",
    "count_ann_ops",
    "CHEN_DEFAULTS",
]

# Standard literature parameter values; the source system is usually quoted
# without numbers, so these are package defaults, overridable via config.
CHEN_DEFAULTS = {"a": 35.0, "b": 3.0, "c": 28.0}
LORENZ_DEFAULTS = {"sigma": 10.0, "rho": 28.0, "beta": 8.0 / 3.0}


@dataclass(frozen=True)
class OpCount:
    multiplications: int
    additions: int

    def __post_init__(self):
        if self.multiplications < 0 or self.additions < 0:
            raise ValueError("operation counts must be nonnegative")

    def as_tuple(self):
        return (self.multiplications, self.additions)


@dataclass(frozen=True)
class ChaoticSystem:
    """An N-dimensional autonomous ODE with named parameters.

    ``rhs`` maps a length-N state vector to a length-N derivative vector.
    ``dyn_mul_count``/``dyn_add_count`` are the hand-counted multiply/add
    operations inside one rhs evaluation (parameter-only subexpressions such
    as ``c - a`` included, subtractions counted as additions).
    """

    name: str
    dimension: int
    params: Dict[str, float] = field(default_factory=dict)
    rhs: Callable[[np.ndarray], np.ndarray] = None
    dyn_mul_count: int = 0
    dyn_add_count: int = 0

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if self.dyn_mul_count < 0 or self.dyn_add_count < 0:
            raise ValueError("dynamic op counts must be nonnegative")
        for key, value in self.params.items():
            if not np.isfinite(value):
                raise ValueError(f"parameter {key!r} is not finite")

    def __call__(self, state):
        return self.rhs(np.asarray(state, dtype=np.float64))


def chen_rhs(state, a, b, c):
    """Chen system right-hand side.

        dX1/dt = a*(X2 - X1)
        dX2/dt = (c - a)*X1 - X1*X3 + c*X2
        dX3/dt = X1*X2 - b*X3

    Hand count of dynamic terms: 6 multiplications
    (a*(..), (c-a)*X1, X1*X3, c*X2, X1*X2, b*X3) and 5 additions
    (X2-X1, c-a, the two +/- in dX2, and the - in dX3).
    """
    x1 = float(state[0])
    x2 = float(state[1])
    x3 = float(state[2])
    return np.array(
        [
            a * (x2 - x1),
            (c - a) * x1 - x1 * x3 + c * x2,
            x1 * x2 - b * x3,
        ]
    )


def lorenz_rhs(state, sigma, rho, beta):
    """Lorenz-63 right-hand side (not acceptance-gated; same interface).

    Dynamic terms: 5 multiplications, 4 additions.
    """
    x = float(state[0])
    y = float(state[1])
    z = float(state[2])
    return np.array([sigma * (y - x), x * (rho - z) - y, x * y - beta * z])


def chen_system(a=None, b=None, c=None):
    p = dict(CHEN_DEFAULTS)
    if a is not None:
        p["a"] = float(a)
    if b is not None:
        p["b"] = float(b)
    if c is not None:
        p["c"] = float(c)
    return ChaoticSystem(
        name="chen",
        dimension=3,
        params=p,
        rhs=lambda s, _p=p: chen_rhs(s, _p["a"], _p["b"], _p["c"]),
        dyn_mul_count=6,
        dyn_add_count=5,
    )


def lorenz_system(sigma=None, rho=None, beta=None):
    p = dict(LORENZ_DEFAULTS)
    if sigma is not None:
        p["sigma"] = float(sigma)
    if rho is not None:
        p["rho"] = float(rho)
    if beta is not None:
        p["beta"] = float(beta)
    return ChaoticSystem(
        name="lorenz",
        dimension=3,
        params=p,
        rhs=lambda s, _p=p: lorenz_rhs(s, _p["sigma"], _p["rho"], _p["beta"]),
        dyn_mul_count=5,
        dyn_add_count=4,
    )


BUILTIN_SYSTEMS = {"chen": chen_system, "lorenz": lorenz_system}


def builtin_system(name, params=None):
    """Instantiate a built-in system by name with optional parameter overrides."""
    try:
        factory = BUILTIN_SYSTEMS[name]
    except KeyError:
        raise KeyError(
            f"unknown system {name!r}; built-ins: {sorted(BUILTIN_SYSTEMS)}"
        ) from None
    return factory(**(params or {}))


def count_rk4_ops(system):
    """Multiply/add counts for one RK-4 step of ``system``.

    Static terms (argument construction and the state update) cost
    3N^2 + 3N multiplications and 3N^2 + 4N additions; the four rhs
    evaluations contribute the dynamic terms four times each.
    """
    n = system.dimension
    return OpCount(
        multiplications=3 * n * n + 3 * n + 4 * system.dyn_mul_count,
        additions=3 * n * n + 4 * n + 4 * system.dyn_add_count,
    )


def count_ann_ops(layer_sizes):
    """Multiply/add counts for one forward pass of a dense feedforward net.

    For layer sizes n_1..n_L: muls = sum n_i * n_{i-1}, adds = sum
    n_i * (n_{i-1} + 1); the +1 is the bias add of each neuron.
    """
    sizes = list(layer_sizes)
    if len(sizes) < 2:
        raise ValueError("need at least an input and an output layer")
    if any(int(s) < 1 for s in sizes):
        raise ValueError("layer sizes must be positive")
    muls = sum(sizes[i] * sizes[i - 1] for i in range(1, len(sizes)))
    adds = sum(sizes[i] * (sizes[i - 1] + 1) for i in range(1, len(sizes)))
    return OpCount(multiplications=muls, additions=adds)
