"""C++ source emission for a selected candidate design.

Two files per bundle: a synthesizable-style core computing one oscillator
iteration, and a standalone testbench that replays reference vectors from
the software simulator and checks every output word bit-for-bit.  Emission
is deterministic: identical inputs yield byte-identical sources, recorded
in a manifest of input hashes.
"""

import hashlib
import json
import re
from dataclasses import dataclass
from importlib.resources import files
from pathlib import Path

import numpy as np

from . import __version__
from .ann import float_to_hex
from .errors import OutputExistsError, UnsupportedArchError
from .oscillator import OscillatorState, generate

__all__ = [
    "CodegenRequest",
    "GeneratedBundle",
    "generate_core",
    "generate_testbench",
    "generate_bundle",
    "write_bundle",
]

_IDENTIFIER = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_TOKEN = re.compile(r"\{\{([A-Z0-9_]+)\}\}")

_ACTIVATION_BODIES = {
    "relu": "    return z > 0.0f ? z : 0.0f;",
    "tanh": "    return (float) std::tanh((double) z);",
    "sigmoid": (
        "    const double zd = (double) z;\n"
        "    if (zd < -709.0) {  // exp would overflow; sigmoid underflows to +0\n"
        "        return 0.0f;\n"
        "    }\n"
        "    return (float) (1.0 / (1.0 + std::exp(-zd)));"
    ),
}


@dataclass
class CodegenRequest:
    model: "AnnModel"
    design: "CandidateDesign"
    core_name: str
    iterations: int = 1000
    seed: np.ndarray = None  # normalized I-vector for the testbench stimulus
    resource_mode: str = "with_dsp"

    def __post_init__(self):
        if self.model.output_size != self.model.input_size:
            raise UnsupportedArchError(
                "oscillator codegen requires O == I "
                f"(got O={self.model.output_size}, I={self.model.input_size})"
            )
        if not _IDENTIFIER.match(self.core_name):
            raise ValueError(f"core_name {self.core_name!r} is not a C identifier")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        max_p = int(np.log2(self.model.hidden_size))
        if not 0 <= self.design.p <= max_p:
            raise ValueError(
                f"design P={self.design.p} outside [0, {max_p}] for "
                f"H={self.model.hidden_size}"
            )
        if self.resource_mode not in ("with_dsp", "no_dsp"):
            raise ValueError("resource_mode must be with_dsp or no_dsp")
        if self.seed is None:
            self.seed = np.full(
                self.model.input_size, 0.5, dtype=np.float32
            )
        self.seed = np.ascontiguousarray(self.seed, dtype=np.float32)
        if self.seed.shape != (self.model.input_size,):
            raise ValueError("seed shape does not match the model input size")


@dataclass
class GeneratedBundle:
    core_name: str
    core_source: str
    testbench_source: str
    manifest: dict


def _template(name):
    return files("chaosforge").joinpath(f"templates/{name}").read_text()


def _render(template, mapping):
    def sub(match):
        key = match.group(1)
        if key not in mapping:
            raise KeyError(f"template token {{{{{key}}}}} has no substitution")
        return mapping[key]

    text = _TOKEN.sub(sub, template)
    leftover = _TOKEN.search(text)
    if leftover:
        raise ValueError(f"unresolved template token {leftover.group(0)}")
    return text


def _hex_block(values, per_line=8, indent="    "):
    words = [f"0x{float_to_hex(v)}u" for v in np.asarray(values).reshape(-1)]
    lines = []
    for start in range(0, len(words), per_line):
        lines.append(indent + ", ".join(words[start : start + per_line]) + ",")
    return "\n".join(lines)


def _pragma_lines(req):
    """Loop pragmas implementing the MAC budget of the selected design.

    P = 0 serializes everything onto one multiplier and one adder; P >= 1
    spreads each layer over 2^P * I MAC lanes (hidden: 2^P neurons with the
    I-wide inner loop fully unrolled; output: all O neurons with the inner
    loop unrolled by 2^P).
    """
    p = req.design.p
    lanes = 1 << p
    if p == 0:
        alloc = (
            "#pragma HLS ALLOCATION operation instances=fmul limit=1\n"
            "#pragma HLS ALLOCATION operation instances=fadd limit=1"
        )
        return {
            "ALLOCATION_PRAGMAS": alloc,
            "HIDDEN_NEURON_PRAGMA": "",
            "HIDDEN_MAC_PRAGMA": "",
            "OUTPUT_NEURON_PRAGMA": "",
            "OUTPUT_MAC_PRAGMA": "",
        }
    return {
        "ALLOCATION_PRAGMAS": "",
        "HIDDEN_NEURON_PRAGMA": f"#pragma HLS unroll factor={lanes}",
        "HIDDEN_MAC_PRAGMA": "#pragma HLS unroll",
        "OUTPUT_NEURON_PRAGMA": "#pragma HLS unroll",
        "OUTPUT_MAC_PRAGMA": f"#pragma HLS unroll factor={lanes}",
    }


def _bind_pragmas(req):
    impl = "dsp" if req.resource_mode == "with_dsp" else "fabric"
    line = (
        f"#pragma HLS BIND_OP variable=acc op=fmul impl={impl}\n"
        f"#pragma HLS BIND_OP variable=acc op=fadd impl=fabric"
    )
    return {"BIND_PRAGMAS_L1": line, "BIND_PRAGMAS_L2": line}


def generate_core(req):
    """The synthesizable-style core source."""
    model = req.model
    act = model.hidden_activation
    p_comment = (
        "single time-multiplexed multiply-accumulate pair"
        if req.design.p == 0
        else f"{req.design.multipliers} multipliers / {req.design.adders} adders"
    )
    mapping = {
        "CORE_NAME": req.core_name,
        "I": str(model.input_size),
        "H": str(model.hidden_size),
        "O": str(model.output_size),
        "P": str(req.design.p),
        "P_COMMENT": p_comment,
        "RESOURCE_MODE": req.resource_mode,
        "CMATH_INCLUDE": "#include <cmath>\n" if act != "relu" else "",
        "W1_BITS": _hex_block(model.w1),
        "B1_BITS": _hex_block(model.b1),
        "W2_BITS": _hex_block(model.w2),
        "B2_BITS": _hex_block(model.b2),
        "ACTIVATION_BODY": _ACTIVATION_BODIES[act],
    }
    mapping.update(_pragma_lines(req))
    mapping.update(_bind_pragmas(req))
    return _render(_template("core.cpp.tmpl"), mapping)


def reference_vectors(req):
    """Expected outputs for the testbench stimulus (simulator ground truth)."""
    state = OscillatorState(model=req.model, seed=req.seed)
    return generate(state, req.iterations)


def generate_testbench(req, expected=None):
    """The self-checking testbench source."""
    if expected is None:
        expected = reference_vectors(req)
    expected = np.asarray(expected, dtype=np.float32)
    if expected.shape != (req.iterations, req.model.output_size):
        raise ValueError("expected-vector shape does not match the request")
    mapping = {
        "CORE_NAME": req.core_name,
        "I": str(req.model.input_size),
        "O": str(req.model.output_size),
        "ITERATIONS": str(req.iterations),
        "SEED_BITS": _hex_block(req.seed),
        "EXPECTED_BITS": _hex_block(expected),
    }
    return _render(_template("testbench.cpp.tmpl"), mapping)


def _sha256(text):
    return hashlib.sha256(text.encode()).hexdigest()


def generate_bundle(req):
    """Core + testbench sources plus a manifest of input hashes."""
    core = generate_core(req)
    expected = reference_vectors(req)
    testbench = generate_testbench(req, expected)
    model = req.model
    model_digest = hashlib.sha256()
    for arr in (model.w1, model.b1, model.w2, model.b2,
                model.norm_min, model.norm_max):
        model_digest.update(np.ascontiguousarray(arr).tobytes())
    manifest = {
        "tool": "chaosforge",
        "tool_version": __version__,
        "core_name": req.core_name,
        "arch": list(model.arch),
        "hidden_activation": model.hidden_activation,
        "parallelism": req.design.p,
        "multipliers": req.design.multipliers,
        "adders": req.design.adders,
        "resource_mode": req.resource_mode,
        "testbench_iterations": req.iterations,
        "inputs": {
            "model_sha256": model_digest.hexdigest(),
            "seed_bits": [float_to_hex(v) for v in req.seed],
            "core_template_sha256": _sha256(_template("core.cpp.tmpl")),
            "testbench_template_sha256": _sha256(_template("testbench.cpp.tmpl")),
        },
        "outputs": {
            "core_sha256": _sha256(core),
            "testbench_sha256": _sha256(testbench),
        },
    }
    return GeneratedBundle(
        core_name=req.core_name,
        core_source=core,
        testbench_source=testbench,
        manifest=manifest,
    )


def write_bundle(bundle, out_dir, force=False):
    """Write <core>.cpp, <core>_tb.cpp and manifest.json into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        out / f"{bundle.core_name}.cpp": bundle.core_source,
        out / f"{bundle.core_name}_tb.cpp": bundle.testbench_source,
        out / "manifest.json": json.dumps(bundle.manifest, indent=1) + "\n",
    }
    if not force:
        existing = [str(p) for p in paths if p.exists()]
        if existing:
            raise OutputExistsError(
                f"refusing to overwrite {existing}; pass force=True / --force"
            )
    for path, text in paths.items():
        path.write_text(text)
    return sorted(str(p) for p in paths)
