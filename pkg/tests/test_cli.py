import json
import subprocess
import sys

import numpy as np
import pytest

from tvaraug import write_dataset
from tvaraug.cli import run

from util import make_source_dataset


@pytest.fixture
def source_csv(tmp_path):
    rng = np.random.default_rng(301)
    ds = make_source_dataset(rng, n_units=5, n_steps=30, n_channels=2)
    path = tmp_path / "src.csv"
    write_dataset(ds, str(path))
    return str(path)


class TestExitCodes:
    def test_no_arguments_is_usage_error(self):
        assert run([]) == 2

    def test_unknown_subcommand(self):
        assert run(["frobnicate"]) == 2

    def test_help_exits_zero(self, capsys):
        assert run(["--help"]) == 0
        assert "stats" in capsys.readouterr().out

    def test_version_exits_zero(self, capsys):
        assert run(["--version"]) == 0

    def test_missing_input_file(self, tmp_path):
        assert run(["stats", str(tmp_path / "nope.csv")]) == 2

    def test_malformed_csv(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("unit,time,s1\na,0,zzz\na,1,2.0\n")
        assert run(["stats", str(bad)]) == 2

    def test_corrupt_model(self, tmp_path):
        bad = tmp_path / "m.json"
        bad.write_text("{oops")
        assert run(["generate", str(bad), "-L", "2",
                    "-o", str(tmp_path / "x.csv")]) == 2


class TestStats:
    def test_stdout_csv(self, source_csv, capsys):
        assert run(["stats", source_csv]) == 0
        out = capsys.readouterr().out
        lines = out.strip().splitlines()
        assert lines[0] == "time,channel,mean,var"
        assert len(lines) == 1 + 30 * 2

    def test_file_output_round_trips_floats(self, source_csv, tmp_path):
        out = tmp_path / "stats.csv"
        assert run(["stats", source_csv, "-o", str(out)]) == 0
        rows = out.read_text().strip().splitlines()[1:]
        first = rows[0].split(",")
        assert first[0] == "0"
        float(first[2]), float(first[3])


class TestPipeline:
    def test_fit_generate_validate(self, source_csv, tmp_path):
        model = tmp_path / "model.json"
        out = tmp_path / "synthetic.csv"
        assert run(["fit", source_csv, "-o", str(model)]) == 0
        doc = json.loads(model.read_text())
        assert doc["format_version"] == 1
        assert len(doc["channels"]) == 2

        assert run(["generate", str(model), "-L", "5", "--seed", "7",
                    "-o", str(out)]) == 0
        text = out.read_text()
        assert text.startswith("unit,time,s1,s2\n")
        assert "aug_0001" in text and "aug_0005" in text

        report = tmp_path / "report.json"
        rc = run(["validate", str(model), "-K", "4000", "--seed", "1",
                  "--report", str(report)])
        assert rc in (0, 1)
        doc = json.loads(report.read_text())
        assert doc["kind"] == "monte_carlo"
        assert doc["checks"]["variance"]["var_at_origin"] == 0.0

    def test_generate_is_byte_identical(self, source_csv, tmp_path):
        model = tmp_path / "model.json"
        run(["fit", source_csv, "-o", str(model)])
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(["generate", str(model), "-L", "4", "--seed", "3",
                    "-o", str(a)]) == 0
        assert run(["generate", str(model), "-L", "4", "--seed", "3",
                    "-o", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_generate_requires_sample_count(self, source_csv, tmp_path):
        model = tmp_path / "model.json"
        run(["fit", source_csv, "-o", str(model)])
        assert run(["generate", str(model),
                    "-o", str(tmp_path / "x.csv")]) == 2

    def test_fit_requires_output(self, source_csv):
        assert run(["fit", source_csv]) == 2

    def test_validate_against_source(self, source_csv, tmp_path):
        model = tmp_path / "model.json"
        run(["fit", source_csv, "-o", str(model)])
        report = tmp_path / "rep.json"
        rc = run(["validate", str(model), "--against", source_csv,
                  "-K", "8000", "--seed", "2", "--report", str(report)])
        doc = json.loads(report.read_text())
        assert doc["kind"] == "source_comparison"
        assert rc in (0, 1)

    def test_validate_fails_against_wrong_source(self, source_csv, tmp_path):
        rng = np.random.default_rng(999)
        other = make_source_dataset(rng, n_units=4, n_steps=30,
                                    n_channels=2, noise_scale=3.0)
        other_csv = tmp_path / "other.csv"
        write_dataset(other, str(other_csv))
        model = tmp_path / "model.json"
        run(["fit", str(other_csv), "-o", str(model)])
        assert run(["validate", str(model), "--against", source_csv,
                    "-K", "2000", "--seed", "5"]) == 1

    def test_sinusoid_fit_flag(self, source_csv, tmp_path):
        model = tmp_path / "model.json"
        assert run(["fit", source_csv, "-o", str(model),
                    "--interp-mode", "sinusoid", "--sinusoid-order",
                    "10"]) == 0
        doc = json.loads(model.read_text())
        assert doc["channels"][0]["p1"]["kind"] == "sinusoid"


class TestConfig:
    def test_config_values_used_and_flags_override(self, source_csv,
                                                   tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "params": {"r1_mean": 0.02},
            "params_per_channel": {"s2": {"lambda2": 2.0}},
            "n_samples": 3,
            "seed": 11,
            "output": {"model": str(tmp_path / "m.json"),
                       "series": str(tmp_path / "s.csv")},
        }))
        assert run(["fit", source_csv, "--config", str(cfg)]) == 0
        doc = json.loads((tmp_path / "m.json").read_text())
        assert doc["channels"][0]["params"]["r1_mean"] == 0.02
        assert doc["channels"][0]["params"]["lambda2"] == 1.0
        assert doc["channels"][1]["params"]["lambda2"] == 2.0

        assert run(["generate", str(tmp_path / "m.json"),
                    "--config", str(cfg)]) == 0
        rows = (tmp_path / "s.csv").read_text().strip().splitlines()
        assert len(rows) == 1 + 3 * 30

        # flag overrides config sample count
        assert run(["generate", str(tmp_path / "m.json"), "-L", "1",
                    "--config", str(cfg),
                    "-o", str(tmp_path / "s2.csv")]) == 0
        rows = (tmp_path / "s2.csv").read_text().strip().splitlines()
        assert len(rows) == 1 + 1 * 30

    def test_unknown_top_level_key(self, source_csv, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("{\"fit_mod\": \"x\"}")
        assert run(["fit", source_csv, "-o", str(tmp_path / "m.json"),
                    "--config", str(cfg)]) == 2

    def test_unknown_nested_key(self, source_csv, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("{\"params\": {\"r9\": 1}}")
        assert run(["fit", source_csv, "-o", str(tmp_path / "m.json"),
                    "--config", str(cfg)]) == 2

    def test_rate_out_of_range_rejected_early(self, source_csv, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("{\"params\": {\"r1_cov\": 1.0}}")
        assert run(["fit", source_csv, "-o", str(tmp_path / "m.json"),
                    "--config", str(cfg)]) == 2

    def test_stray_per_channel_name(self, source_csv, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("{\"params_per_channel\": {\"zz\": {\"lambda2\": 2}}}")
        assert run(["fit", source_csv, "-o", str(tmp_path / "m.json"),
                    "--config", str(cfg)]) == 2

    def test_config_not_json(self, source_csv, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("not json at all")
        assert run(["stats", source_csv, "--config", str(cfg)]) == 2

    def test_schema_and_alignment_from_config(self, tmp_path):
        data = tmp_path / "d.csv"
        data.write_text("id,cycle,rul,v1\n"
                        "a,0,2,1.0\na,1,1,2.0\na,2,0,3.0\n"
                        "b,0,1,5.0\nb,1,0,6.0\n")
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "schema": {"unit": "id", "time": "cycle", "channels": ["v1"]},
            "alignment": "by_rul",
        }))
        out = tmp_path / "st.csv"
        assert run(["stats", str(data), "--config", str(cfg),
                    "-o", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        # two common steps, times -1 and 0
        assert lines[1].startswith("-1,v1,")
        assert lines[2].startswith("0,v1,")


class TestConsoleScript:
    def test_module_entry_point(self, source_csv):
        proc = subprocess.run(
            [sys.executable, "-m", "tvaraug", "stats", source_csv],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert proc.stdout.startswith("time,channel,mean,var")
