import json

import pytest

from chaosforge import cli
from chaosforge.integrator import load_dataset


def write_config(tmp_path, **overrides):
    cfg = {
        "system": {"steps": 400},
        "train": {"epochs": 5},
        "codegen": {"testbench_iterations": 20},
        "run": {"iterations": 200},
    }
    for section, values in overrides.items():
        cfg.setdefault(section, {}).update(values)
    path = tmp_path / "project.json"
    path.write_text(json.dumps(cfg))
    return path


def run_cli(*argv):
    return cli.main(list(argv))


class TestConfig:
    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"sytsem": {"steps": 10}}))
        assert run_cli("dataset", "--config", str(path)) == 1

    def test_bad_value_rejected_before_side_effects(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"dataset": {"split_ratio": 1.5}}))
        assert run_cli("dataset", "--config", str(path)) == 1
        assert not (tmp_path / "dataset.bin").exists()

    def test_missing_config(self, tmp_path):
        assert run_cli("dataset", "--config", str(tmp_path / "none.json")) == 1

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert run_cli("dataset", "--config", str(path)) == 1

    def test_unknown_system_name(self, tmp_path):
        path = write_config(tmp_path, system={"name": "roessler"})
        assert run_cli("dataset", "--config", str(path)) == 1

    def test_non_power_of_two_hidden(self, tmp_path):
        path = write_config(tmp_path, train={"arch": [3, 6, 3]})
        assert run_cli("dataset", "--config", str(path)) == 1

    def test_usage_error_exits_one(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.build_parser().parse_args(["dataset"])  # missing --config
        assert exc.value.code == 1

    def test_negative_seed_rejected(self, tmp_path):
        path = write_config(tmp_path)
        assert run_cli("dataset", "--config", str(path), "--seed", "-1") == 1

    def test_bad_jobs_rejected(self, tmp_path):
        path = write_config(tmp_path)
        assert run_cli("dataset", "--config", str(path), "--jobs", "0") == 1


class TestPipeline:
    @pytest.fixture()
    def project(self, tmp_path):
        path = write_config(tmp_path)
        assert run_cli("dataset", "--config", str(path)) == 0
        assert run_cli("train", "--config", str(path)) == 0
        return tmp_path, path

    def test_dataset_counts(self, tmp_path, capsys):
        path = write_config(tmp_path, system={"steps": 10})
        assert run_cli("dataset", "--config", str(path)) == 0
        out = capsys.readouterr().out
        assert "pairs: 10" in out
        ds = load_dataset(tmp_path / "dataset.bin")
        assert len(ds.inputs) == 10
        assert ds.train_count == 8

    def test_train_is_reproducible(self, project):
        tmp_path, path = project
        first = (tmp_path / "model.json").read_bytes()
        assert run_cli("train", "--config", str(path)) == 0
        assert (tmp_path / "model.json").read_bytes() == first

    def test_seed_override_changes_model(self, project):
        tmp_path, path = project
        first = (tmp_path / "model.json").read_bytes()
        assert run_cli("train", "--config", str(path), "--seed", "99") == 0
        second = (tmp_path / "model.json").read_bytes()
        assert second != first
        assert json.loads(second)["rng_seed"] == 99

    def test_train_missing_dataset(self, tmp_path):
        path = write_config(tmp_path)
        assert run_cli("train", "--config", str(path)) == 1

    def test_train_arch_mismatch_is_runtime_error(self, project):
        tmp_path, path = project
        cfg = json.loads(path.read_text())
        cfg["train"]["arch"] = [4, 8, 4]
        path.write_text(json.dumps(cfg))
        assert run_cli("train", "--config", str(path)) == 2

    def test_explore_table_and_csv(self, project, capsys):
        tmp_path, path = project
        assert run_cli("explore", "--config", str(path)) == 0
        out = capsys.readouterr().out
        csv_path = tmp_path / "candidates.csv"
        rows = csv_path.read_text().strip().splitlines()
        assert rows[0] == "P,multipliers,adders,est_latency_cycles,est_lut,est_dsp"
        assert len(rows) == 1 + 4  # H=8 -> P in {0,1,2,3}

    def test_explore_min_cost_single_row(self, tmp_path, capsys):
        path = write_config(tmp_path, dse={"selection": "min_cost"})
        run_cli("dataset", "--config", str(path))
        assert run_cli("explore", "--config", str(path)) == 0
        rows = (tmp_path / "candidates.csv").read_text().strip().splitlines()
        assert len(rows) == 2
        assert rows[1].startswith("0,1,1,")  # P=0, one multiplier, one adder

    def test_codegen_writes_bundle_and_refuses_overwrite(self, project):
        tmp_path, path = project
        assert run_cli("codegen", "--config", str(path)) == 0
        gen = tmp_path / "generated"
        core = (gen / "chaos_osc.cpp").read_bytes()
        assert (gen / "chaos_osc_tb.cpp").exists()
        manifest = json.loads((gen / "manifest.json").read_text())
        assert manifest["effective_config"]["train"]["epochs"] == 5
        # second run without --force fails, with --force is byte-identical
        assert run_cli("codegen", "--config", str(path)) == 2
        assert run_cli("codegen", "--config", str(path), "--force") == 0
        assert (gen / "chaos_osc.cpp").read_bytes() == core

    def test_codegen_explicit_parallelism(self, project):
        tmp_path, path = project
        cfg = json.loads(path.read_text())
        cfg["codegen"]["parallelism"] = 2
        path.write_text(json.dumps(cfg))
        assert run_cli("codegen", "--config", str(path), "--force") == 0
        manifest = json.loads(
            (tmp_path / "generated" / "manifest.json").read_text())
        assert manifest["parallelism"] == 2

    def test_codegen_missing_model(self, tmp_path):
        path = write_config(tmp_path)
        run_cli("dataset", "--config", str(path))
        assert run_cli("codegen", "--config", str(path)) == 1

    def test_codegen_parallelism_beyond_range(self, project):
        tmp_path, path = project
        cfg = json.loads(path.read_text())
        cfg["codegen"]["parallelism"] = 4  # log2(8) = 3
        path.write_text(json.dumps(cfg))
        assert run_cli("codegen", "--config", str(path), "--force") == 1

    def test_run_dims_out_of_range(self, project):
        tmp_path, path = project
        cfg = json.loads(path.read_text())
        cfg["run"].update({"format": "bits", "dims": [0, 3]})
        path.write_text(json.dumps(cfg))
        assert run_cli("run", "--config", str(path)) == 1

    def test_run_csv(self, project):
        tmp_path, path = project
        assert run_cli("run", "--config", str(path)) == 0
        rows = (tmp_path / "sequence.csv").read_text().strip().splitlines()
        assert rows[0] == "iteration,X1,X2,X3"
        assert len(rows) == 1 + 200

    def test_run_bits_file_size(self, tmp_path):
        path = write_config(tmp_path, run={"format": "bits",
                                           "iterations": 1000})
        run_cli("dataset", "--config", str(path))
        run_cli("train", "--config", str(path))
        assert run_cli("run", "--config", str(path)) == 0
        blob = (tmp_path / "bits.bin").read_bytes()
        assert len(blob) * 8 == 1000 * 3 * 8  # 24000 bits

    def test_randtest_report(self, tmp_path, capsys):
        path = write_config(tmp_path, run={"format": "bits",
                                           "iterations": 1000})
        run_cli("dataset", "--config", str(path))
        run_cli("train", "--config", str(path))
        run_cli("run", "--config", str(path))
        assert run_cli("randtest", "--config", str(path)) == 0
        report = json.loads((tmp_path / "randtest.json").read_text())
        assert report["n_bits"] == 24000
        names = [r["test"] for r in report["reports"]]
        assert names == ["monobit", "block_frequency", "runs"]
        for r in report["reports"]:
            assert 0.0 <= r["p_value"] <= 1.0

    def test_randtest_missing_bits(self, tmp_path):
        path = write_config(tmp_path)
        assert run_cli("randtest", "--config", str(path)) == 1

    def test_end_to_end_artifacts_reproducible(self, tmp_path):
        # identical configs and seeds reproduce identical bytes
        path = write_config(tmp_path, run={"format": "bits"})
        for _ in range(2):
            run_cli("dataset", "--config", str(path))
            run_cli("train", "--config", str(path))
            run_cli("run", "--config", str(path))
        first = {}
        for name in ("dataset.bin", "model.json", "bits.bin"):
            first[name] = (tmp_path / name).read_bytes()
        run_cli("dataset", "--config", str(path))
        run_cli("train", "--config", str(path))
        run_cli("run", "--config", str(path))
        for name, blob in first.items():
            assert (tmp_path / name).read_bytes() == blob
