"""Kernel backend selection.

Imports the compiled extension when it is available and falls back to the
pure-Python implementations otherwise.  Set ``CHAOSFORGE_PURE_PYTHON=1``
to force the fallback (used by the equivalence tests and the benchmark).
Both backends are bit-for-bit identical; see fallback.py for the contract.
"""

import os

from . import fallback

__all__ = [
    "ann_forward",
    "oscillator_run",
    "rk4_chen",
    "backend_name",
    "ACT_RELU",
    "ACT_TANH",
    "ACT_SIGMOID",
    "ACTIVATION_IDS",
]

ACT_RELU = fallback.ACT_RELU
ACT_TANH = fallback.ACT_TANH
ACT_SIGMOID = fallback.ACT_SIGMOID
ACTIVATION_IDS = fallback.ACTIVATION_IDS

_forced_pure = os.environ.get("CHAOSFORGE_PURE_PYTHON", "") not in ("", "0")

if not _forced_pure:
    try:
        from . import _fastcore as _impl

        backend_name = "compiled"
    except ImportError:
        _impl = fallback
        backend_name = "python"
else:
    _impl = fallback
    backend_name = "python"

ann_forward = _impl.ann_forward
oscillator_run = _impl.oscillator_run
rk4_chen = _impl.rk4_chen
