"""chaosforge: neural-network chaotic oscillators, from ODE to hardware core.

Pipeline: integrate a chaotic system (RK-4), build a consecutive-timestep
dataset, train a small feedforward surrogate, run it as a closed-loop
pseudo-random oscillator, explore candidate hardware microarchitectures
with analytic latency/cost estimators, and emit HLS-style C++ cores with
bit-exact testbenches.
"""

__version__ = "0.1.0"

from ._kernels import backend_name

__all__ = ["__version__", "backend_name"]
