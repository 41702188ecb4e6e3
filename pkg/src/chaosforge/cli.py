"""Pipeline command-line front end.

Subcommands mirror the pipeline stages::

    chaosforge dataset  --config project.json   # integrate + pair + save
    chaosforge train    --config project.json   # fit the surrogate
    chaosforge explore  --config project.json   # candidate table + CSV
    chaosforge codegen  --config project.json   # C++ core + testbench
    chaosforge run      --config project.json   # oscillator CSV / bit file
    chaosforge randtest --config project.json   # randomness battery

Every command validates the whole config before any side effect.  Exit
codes: 0 success, 1 validation error, 2 runtime failure.
"""

import argparse
import copy
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, ann, codegen, dse, integrator, oscillator, randtest
from ._kernels import backend_name
from .errors import ChaosForgeError, ConfigError
from .systems import BUILTIN_SYSTEMS, builtin_system

DEFAULT_CONFIG = {
    "system": {
        "name": "chen",
        "params": {},
        "x0": [1.0, 1.0, 1.0],
        "dt": 0.02,
        "steps": 100000,
        "substeps": 1,
    },
    "dataset": {"split_ratio": 0.8, "normalize": True},
    "train": {
        "arch": [3, 8, 3],
        "activation": "relu",
        "learning_rate": 1e-4,
        "beta1": 0.9,
        "beta2": 0.999,
        "eps": 1e-8,
        "epochs": 200,
        "batch_size": 64,
        "seed": 4,
    },
    "dse": {"mode": "with_dsp", "selection": "pareto", "coefficients": None},
    "codegen": {
        "core_name": "chaos_osc",
        "parallelism": None,
        "selection": "min_latency",
        "resource_mode": "with_dsp",
        "testbench_iterations": 1000,
        "seed_vector": None,
    },
    "run": {
        "iterations": 1000,
        "seed_vector": None,
        "format": "csv",
        "coordinates": "normalized",
        "bits_per_value": 8,
        "dims": None,
    },
    "randtest": {"block_size": 128},
    "paths": {
        "dataset": "dataset.bin",
        "model": "model.json",
        "out_dir": "generated",
        "sequence": "sequence.csv",
        "bits": "bits.bin",
        "report": "randtest.json",
        "explore_csv": "candidates.csv",
    },
}


def _merge_defaults(defaults, overrides, path=""):
    if not isinstance(overrides, dict):
        raise ConfigError(f"config section {path or '<root>'} must be an object")
    merged = copy.deepcopy(defaults)
    for key, value in overrides.items():
        if key not in defaults:
            raise ConfigError(f"unknown config key {path + key!r}")
        if isinstance(defaults[key], dict) and key != "params":
            merged[key] = _merge_defaults(defaults[key], value, path + key + ".")
        else:
            merged[key] = value
    return merged


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


def validate_config(cfg):
    """Type/range checks over the whole effective config."""
    sys_cfg = cfg["system"]
    _require(sys_cfg["name"] in BUILTIN_SYSTEMS,
             f"system.name must be one of {sorted(BUILTIN_SYSTEMS)}")
    _require(isinstance(sys_cfg["params"], dict), "system.params must be an object")
    _require(isinstance(sys_cfg["x0"], list) and len(sys_cfg["x0"]) >= 1,
             "system.x0 must be a list of numbers")
    _require(float(sys_cfg["dt"]) > 0, "system.dt must be positive")
    _require(int(sys_cfg["steps"]) >= 1, "system.steps must be >= 1")
    _require(int(sys_cfg["substeps"]) >= 1, "system.substeps must be >= 1")

    ds = cfg["dataset"]
    _require(0.0 < float(ds["split_ratio"]) < 1.0,
             "dataset.split_ratio must lie in (0, 1)")
    _require(isinstance(ds["normalize"], bool), "dataset.normalize must be boolean")

    tr = cfg["train"]
    arch = tr["arch"]
    _require(isinstance(arch, list) and len(arch) == 3
             and all(int(v) >= 1 for v in arch),
             "train.arch must be [I, H, O] with positive sizes")
    _require(tr["activation"] in ann.ACTIVATIONS,
             f"train.activation must be one of {sorted(ann.ACTIVATIONS)}")
    _require(float(tr["learning_rate"]) > 0, "train.learning_rate must be positive")
    _require(int(tr["epochs"]) >= 1, "train.epochs must be >= 1")
    _require(int(tr["batch_size"]) >= 1, "train.batch_size must be >= 1")

    _require(cfg["dse"]["mode"] in dse.MODES,
             f"dse.mode must be one of {dse.MODES}")
    _require(cfg["dse"]["selection"] in dse.SELECTIONS,
             f"dse.selection must be one of {dse.SELECTIONS}")
    h = int(arch[1])
    _require(h >= 1 and (h & (h - 1)) == 0,
             "train.arch hidden size must be a power of two for DSE")

    cg = cfg["codegen"]
    _require(cg["selection"] in ("min_latency", "min_cost"),
             "codegen.selection must be min_latency or min_cost")
    _require(cg["resource_mode"] in dse.MODES,
             f"codegen.resource_mode must be one of {dse.MODES}")
    _require(int(cg["testbench_iterations"]) >= 1,
             "codegen.testbench_iterations must be >= 1")
    if cg["parallelism"] is not None:
        _require(int(cg["parallelism"]) >= 0, "codegen.parallelism must be >= 0")

    rn = cfg["run"]
    _require(int(rn["iterations"]) >= 1, "run.iterations must be >= 1")
    _require(rn["format"] in ("csv", "bits"), "run.format must be csv or bits")
    _require(rn["coordinates"] in ("normalized", "raw"),
             "run.coordinates must be normalized or raw")
    _require(1 <= int(rn["bits_per_value"]) <= 23,
             "run.bits_per_value must lie in [1, 23]")
    if rn["dims"] is not None:
        _require(isinstance(rn["dims"], list) and rn["dims"],
                 "run.dims must be a non-empty list of dimension indices")

    _require(int(cfg["randtest"]["block_size"]) >= 20,
             "randtest.block_size must be >= 20")
    return cfg


def load_config(path, seed_override=None, out_override=None):
    try:
        with open(path) as fh:
            user_cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    cfg = _merge_defaults(DEFAULT_CONFIG, user_cfg)
    if seed_override is not None:
        cfg["train"]["seed"] = seed_override
    if out_override is not None:
        cfg["paths"]["out_dir"] = out_override
    validate_config(cfg)
    cfg["_base_dir"] = str(Path(path).resolve().parent)
    return cfg


def _path(cfg, key):
    """Config paths resolve relative to the config file's directory."""
    p = Path(cfg["paths"][key])
    if not p.is_absolute():
        p = Path(cfg["_base_dir"]) / p
    return p


def _build_system(cfg):
    return builtin_system(cfg["system"]["name"], cfg["system"]["params"])


def _train_config(cfg):
    tr = cfg["train"]
    return ann.TrainConfig(
        learning_rate=float(tr["learning_rate"]),
        beta1=float(tr["beta1"]),
        beta2=float(tr["beta2"]),
        eps=float(tr["eps"]),
        epochs=int(tr["epochs"]),
        batch_size=int(tr["batch_size"]),
        rng_seed=int(tr["seed"]),
        hidden_activation=tr["activation"],
    )


def _coeff_table(cfg):
    coeff_path = cfg["dse"]["coefficients"]
    if coeff_path is None:
        return dse.default_coefficients()
    p = Path(coeff_path)
    if not p.is_absolute():
        p = Path(cfg["_base_dir"]) / p
    return dse.load_coefficients(p)


def _seed_vector(spec, model):
    if spec is None:
        return np.full(model.input_size, 0.5, dtype=np.float32)
    vec = np.asarray(spec, dtype=np.float32)
    if vec.shape != (model.input_size,):
        raise ConfigError(
            f"seed_vector must have {model.input_size} entries"
        )
    return vec


def cmd_dataset(cfg, args):
    system = _build_system(cfg)
    s = cfg["system"]
    x0 = np.asarray(s["x0"], dtype=np.float64)
    if x0.shape != (system.dimension,):
        raise ConfigError(
            f"system.x0 must have {system.dimension} entries for {system.name}"
        )
    traj = integrator.integrate(
        system, x0, float(s["dt"]), int(s["steps"]), int(s["substeps"])
    )
    ds = integrator.build_dataset(
        traj,
        split_ratio=float(cfg["dataset"]["split_ratio"]),
        normalize_flag=cfg["dataset"]["normalize"],
    )
    out_path = _path(cfg, "dataset")
    integrator.save_dataset(ds, out_path)
    print(f"system: {system.name} dt={s['dt']} steps={s['steps']} "
          f"substeps={s['substeps']}")
    print(f"pairs: {len(ds.inputs)}  train: {ds.train_count}  "
          f"test: {ds.test_count}")
    for d in range(ds.dimension):
        print(f"dim {d}: min={ds.norm_min[d]:.6g} max={ds.norm_max[d]:.6g}")
    print(f"wrote {out_path}")
    return 0


def cmd_train(cfg, args):
    ds_path = _path(cfg, "dataset")
    if not ds_path.exists():
        raise ConfigError(f"dataset file not found: {ds_path} (run `dataset` first)")
    ds = integrator.load_dataset(ds_path)
    tcfg = _train_config(cfg)
    arch = tuple(int(v) for v in cfg["train"]["arch"])
    model, metrics = ann.train(ds, arch, tcfg)
    model_path = _path(cfg, "model")
    ann.save_model(model, model_path)
    print(f"arch: {arch[0]}-{arch[1]}-{arch[2]} activation={tcfg.hidden_activation} "
          f"seed={tcfg.rng_seed} epochs={tcfg.epochs} backend={backend_name}")
    print(f"test MSE:  {metrics.mse:.6e}")
    print(f"test MAE:  {metrics.mae:.6e}")
    print(f"test RMSE: {metrics.rmse:.6e}")
    print(f"test R2:   {metrics.r2:.6f}")
    print(f"wrote {model_path}")
    return 0


def cmd_explore(cfg, args):
    table = _coeff_table(cfg)
    arch = cfg["train"]["arch"]
    i_size, h_size = int(arch[0]), int(arch[1])
    mode = cfg["dse"]["mode"]
    selection = cfg["dse"]["selection"]
    candidates = dse.enumerate_designs(i_size, h_size, mode, table, selection)
    print(f"I={i_size} H={h_size} mode={mode} selection={selection}")
    print(f"{'P':>2} {'muls':>6} {'adds':>6} {'latency_cycles':>15} "
          f"{'luts':>10} {'dsps':>6}")
    for c in candidates:
        print(f"{c.p:>2} {c.multipliers:>6} {c.adders:>6} "
              f"{c.est_latency_cycles:>15.1f} {c.est_lut:>10.1f} {c.est_dsp:>6}")
    csv_path = _path(cfg, "explore_csv")
    with open(csv_path, "w") as fh:
        fh.write("P,multipliers,adders,est_latency_cycles,est_lut,est_dsp\n")
        for c in candidates:
            fh.write(f"{c.p},{c.multipliers},{c.adders},"
                     f"{c.est_latency_cycles:.6g},{c.est_lut:.6g},{c.est_dsp}\n")
    print(f"wrote {csv_path}")
    return 0


def _select_design(cfg, model):
    table = _coeff_table(cfg)
    cg = cfg["codegen"]
    mode = cg["resource_mode"]
    if cg["parallelism"] is not None:
        p = int(cg["parallelism"])
        p_max = dse.p_max_for(model.hidden_size)
        if p > p_max:
            raise ConfigError(
                f"codegen.parallelism={p} exceeds log2(H)={p_max}"
            )
        muls, adds = dse.mac_count(p, model.input_size)
        return dse.CandidateDesign(
            p=p,
            use_dsp=(mode == "with_dsp"),
            multipliers=muls,
            adders=adds,
            est_latency_cycles=dse.estimate_latency(
                model.input_size, model.hidden_size, p, table.latency[mode]
            ),
            est_lut=dse.estimate_lut(
                model.input_size, model.hidden_size, p, table.lut[mode]
            ),
            est_dsp=muls if mode == "with_dsp" else 0,
        )
    candidates = dse.enumerate_designs(
        model.input_size, model.hidden_size, mode, table, "pareto"
    )
    key = (
        (lambda c: c.est_latency_cycles)
        if cg["selection"] == "min_latency"
        else (lambda c: c.est_lut)
    )
    return min(candidates, key=key)


def cmd_codegen(cfg, args):
    model_path = _path(cfg, "model")
    if not model_path.exists():
        raise ConfigError(f"model file not found: {model_path} (run `train` first)")
    model = ann.load_model(model_path)
    design = _select_design(cfg, model)
    cg = cfg["codegen"]
    req = codegen.CodegenRequest(
        model=model,
        design=design,
        core_name=cg["core_name"],
        iterations=int(cg["testbench_iterations"]),
        seed=_seed_vector(cg["seed_vector"], model),
        resource_mode=cg["resource_mode"],
    )
    bundle = codegen.generate_bundle(req)
    # echo the effective (post-default) config into the manifest; paths
    # describe workspace layout, not the artifact, and would break
    # byte-identical regeneration across directories
    bundle.manifest["effective_config"] = {
        k: v for k, v in cfg.items() if not k.startswith("_") and k != "paths"
    }
    out_dir = _path(cfg, "out_dir")
    written = codegen.write_bundle(bundle, out_dir, force=args.force)
    print(f"design: P={design.p} muls={design.multipliers} "
          f"est_latency={design.est_latency_cycles:.1f} cyc "
          f"est_lut={design.est_lut:.1f}")
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_run(cfg, args):
    model_path = _path(cfg, "model")
    if not model_path.exists():
        raise ConfigError(f"model file not found: {model_path} (run `train` first)")
    model = ann.load_model(model_path)
    rn = cfg["run"]
    seed = _seed_vector(rn["seed_vector"], model)
    state = oscillator.OscillatorState(model=model, seed=seed)
    outputs = oscillator.generate(state, int(rn["iterations"]))
    if rn["format"] == "csv":
        values = outputs
        if rn["coordinates"] == "raw":
            values = integrator.denormalize(outputs, model.norm_min, model.norm_max)
        seq_path = _path(cfg, "sequence")
        with open(seq_path, "w") as fh:
            header = ",".join(f"X{d + 1}" for d in range(model.output_size))
            fh.write(f"iteration,{header}\n")
            for it, row in enumerate(values):
                cells = ",".join(f"{float(v):.9g}" for v in row)
                fh.write(f"{it},{cells}\n")
        print(f"wrote {seq_path} ({len(values)} rows, "
              f"{rn['coordinates']} coordinates)")
    else:
        dims = rn["dims"] or list(range(model.output_size))
        bad = [d for d in dims if not 0 <= int(d) < model.output_size]
        if bad:
            raise ConfigError(
                f"run.dims entries {bad} outside [0, {model.output_size - 1}]"
            )
        stream = oscillator.extract_bits(
            outputs, int(rn["bits_per_value"]), [int(d) for d in dims]
        )
        bits_path = _path(cfg, "bits")
        with open(bits_path, "wb") as fh:
            fh.write(stream.data)
        print(f"wrote {bits_path} ({stream.n_bits} bits from "
              f"{rn['iterations']} iterations x dims {dims} x "
              f"{rn['bits_per_value']} bits)")
    return 0


def cmd_randtest(cfg, args):
    bits_path = _path(cfg, "bits")
    if not bits_path.exists():
        raise ConfigError(
            f"bit file not found: {bits_path} (run `run` with format=bits first)"
        )
    raw = np.frombuffer(bits_path.read_bytes(), dtype=np.uint8)
    bits = np.unpackbits(raw)
    reports = randtest.run_all(bits, int(cfg["randtest"]["block_size"]))
    print(f"{'test':<16} {'n':>9} {'statistic':>14} {'p_value':>12} verdict")
    for rep in reports:
        verdict = "pass" if rep.passed else (
            "n/a" if not rep.applicable else "FAIL"
        )
        print(f"{rep.test_name:<16} {rep.n:>9} {rep.statistic:>14.4f} "
              f"{rep.p_value:>12.6f} {verdict}")
    doc = {
        "alpha": randtest.ALPHA,
        "n_bits": int(bits.size),
        "source": str(bits_path),
        "reports": [rep.as_dict() for rep in reports],
    }
    report_path = _path(cfg, "report")
    with open(report_path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    print(json.dumps(doc))
    print(f"wrote {report_path}")
    return 0


COMMANDS = {
    "dataset": cmd_dataset,
    "train": cmd_train,
    "explore": cmd_explore,
    "codegen": cmd_codegen,
    "run": cmd_run,
    "randtest": cmd_randtest,
}


class _Parser(argparse.ArgumentParser):
    # spec'd exit codes: validation errors (including usage) exit 1
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def build_parser():
    parser = _Parser(
        prog="chaosforge",
        description="chaotic-oscillator surrogate pipeline "
        f"(v{__version__}, kernels: {backend_name})",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", required=True, help="project config JSON")
        p.add_argument("--seed", type=int, default=None,
                       help="override train.seed")
        p.add_argument("--out", default=None,
                       help="override paths.out_dir")
        p.add_argument("--force", action="store_true",
                       help="overwrite existing outputs")
        p.add_argument("--jobs", type=int, default=1,
                       help="worker count (reserved; stages are currently "
                            "single-threaded)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.jobs is not None and args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return 1
    if args.seed is not None and args.seed < 0:
        print("error: --seed must be a nonnegative integer", file=sys.stderr)
        return 1
    try:
        cfg = load_config(args.config, args.seed, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ChaosForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
