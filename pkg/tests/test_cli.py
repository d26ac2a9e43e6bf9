"""Command-line interface: config parsing, outputs, determinism, exit codes."""

import subprocess
import sys

import numpy as np
import pytest

from l1lab import DecaySequence, DiagonalOperator, lemma_suite, save_sample, vi_suite
from l1lab.cli_experiments import ConfigError, load_config, main

POWER_CONFIG = """\
[problem]
N = 150
delta = 1e-3
seed = 0

[problem.sigma_model]
nu_hat = 1.0
K = 1.0

[problem.tail_model]
mu_hat = 2.0
K1 = 1.0

[sweep]
delta_min = 1e-4
delta_max = 1e-2
num_points = 4
seeds = [0, 1]
"""

SPARSE_CONFIG = """\
[problem]
N = 100
delta = 1e-3
seed = 0
sparse_support = [[1, 1.0], [3, 0.5], [6, -0.25]]

[problem.sigma_model]
nu_hat = 1.0

[sweep]
delta_min = 1e-5
delta_max = 1e-2
num_points = 4
seeds = [0, 1]
"""


def write_config(tmp_path, text, name="exp.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def parse_kv(out):
    pairs = {}
    for line in out.strip().splitlines():
        key, _, value = line.partition("=")
        pairs[key] = value
    return pairs


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    rows = [dict(zip(header, line.split(","))) for line in lines[1:]]
    return header, rows


class TestConfigErrors:
    def test_missing_file_exit_2_names_path(self, tmp_path, capsys):
        missing = tmp_path / "nope.toml"
        assert main(["solve", "--config", str(missing)]) == 2
        assert str(missing) in capsys.readouterr().err

    def test_invalid_toml_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "[problem\nN = 3")
        assert main(["solve", "--config", cfg]) == 2
        assert "not valid TOML" in capsys.readouterr().err

    def test_unknown_key_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG + "\n[outputs]\ntypo_key = 1\n")
        assert main(["solve", "--config", cfg, "--alpha", "0.1"]) == 2
        assert "typo_key" in capsys.readouterr().err

    def test_unknown_problem_key_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG.replace("seed = 0", "seed = 0\nbogus = 2"))
        assert main(["solve", "--config", cfg, "--alpha", "0.1"]) == 2
        assert "bogus" in capsys.readouterr().err

    def test_both_solution_models_exit_2(self, tmp_path, capsys):
        text = POWER_CONFIG.replace(
            "seed = 0", "seed = 0\nsparse_support = [[1, 1.0]]"
        )
        cfg = write_config(tmp_path, text)
        assert main(["solve", "--config", cfg, "--alpha", "0.1"]) == 2
        assert "exactly one" in capsys.readouterr().err

    def test_neither_solution_model_exit_2(self, tmp_path, capsys):
        text = POWER_CONFIG.replace("[problem.tail_model]\nmu_hat = 2.0\nK1 = 1.0\n", "")
        cfg = write_config(tmp_path, text)
        assert main(["solve", "--config", cfg, "--alpha", "0.1"]) == 2
        assert "exactly one" in capsys.readouterr().err

    def test_missing_problem_section_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "[outputs]\ndir = 'x'\n")
        assert main(["solve", "--config", cfg]) == 2
        assert "[problem]" in capsys.readouterr().err

    def test_invalid_param_choice_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG + "\n[param_choice]\ntau1 = 3.0\ntau2 = 2.0\n")
        assert main(["solve", "--config", cfg, "--alpha", "0.1"]) == 2
        assert "param_choice" in capsys.readouterr().err

    def test_support_index_out_of_range_exit_2(self, tmp_path, capsys):
        text = SPARSE_CONFIG.replace("[[1, 1.0], [3, 0.5], [6, -0.25]]", "[[101, 1.0]]")
        cfg = write_config(tmp_path, text)
        assert main(["solve", "--config", cfg, "--alpha", "0.1"]) == 2
        assert "101" in capsys.readouterr().err

    def test_boolean_where_number_expected_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG.replace("delta = 1e-3", "delta = true"))
        assert main(["solve", "--config", cfg, "--alpha", "0.1"]) == 2
        assert "delta" in capsys.readouterr().err

    def test_bad_seeds_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG.replace("seeds = [0, 1]", 'seeds = ["a"]'))
        assert main(["rate-sweep", "--config", cfg]) == 2
        assert "seeds" in capsys.readouterr().err

    def test_load_config_is_importable_api(self, tmp_path):
        cfg = load_config(write_config(tmp_path, POWER_CONFIG))
        assert cfg.problem.n == 150
        assert cfg.sweep.num_points == 4
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.toml")


class TestSolve:
    def test_fixed_alpha_output(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG)
        assert main(["solve", "--config", cfg, "--alpha", "0.05"]) == 0
        kv = parse_kv(capsys.readouterr().out)
        assert kv["rule"] == "fixed"
        assert float(kv["alpha"]) == 0.05
        assert float(kv["residual"]) > 0.0
        assert float(kv["l1_error"]) > 0.0
        assert int(kv["support_size"]) >= 0
        assert float(kv["certificate"]) <= 1e-10

    def test_strong_discrepancy_rule(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG)
        assert main(["solve", "--config", cfg]) == 0
        kv = parse_kv(capsys.readouterr().out)
        assert kv["rule"] == "strong_discrepancy"
        delta = float(kv["delta"])
        assert 1.0 * delta <= float(kv["residual"]) <= 1.5 * delta

    def test_delta_override(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG)
        assert main(["solve", "--config", cfg, "--delta", "1e-2"]) == 0
        assert parse_kv(capsys.readouterr().out)["delta"] == "0.01"

    def test_no_delta_anywhere_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG.replace("delta = 1e-3\n", ""))
        assert main(["solve", "--config", cfg]) == 2
        assert "delta" in capsys.readouterr().err

    def test_infeasible_window_exit_2_names_bound(self, tmp_path, capsys):
        # noise far above the signal with tau1 > 1: every residual, even the
        # zero solution's, stays under the window's lower edge
        text = SPARSE_CONFIG + "\n[param_choice]\ntau1 = 1.5\ntau2 = 2.0\ntau = 1.8\n"
        cfg = write_config(tmp_path, text)
        assert main(["solve", "--config", cfg, "--delta", "50.0"]) == 2
        assert "lower" in capsys.readouterr().err

    def test_nonpositive_alpha_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG)
        assert main(["solve", "--config", cfg, "--alpha", "-1.0"]) == 2
        assert "alpha" in capsys.readouterr().err


class TestRateSweep:
    def test_pass_line_and_csv_schema(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG)
        out = tmp_path / "out"
        assert main(["rate-sweep", "--config", cfg, "--out", str(out)]) == 0
        stdout = capsys.readouterr().out
        kv = parse_kv(stdout)
        assert "slope" in kv and "csv" in kv
        assert kv["slope"].split()[-0] != ""
        assert "pass=true" in stdout
        header, rows = read_csv(out / "rate_sweep.csv")
        assert header == [
            "delta", "seed", "alpha", "residual", "l1_error", "phi_delta", "ratio", "status",
        ]
        assert len(rows) == 8
        for row in rows:
            assert row["status"] == "ok"
            assert float(row["ratio"]) > 0.0
            # repr round trip: written floats parse back bit for bit
            assert repr(float(row["l1_error"])) == row["l1_error"]

    def test_sparse_sweep_passes(self, tmp_path, capsys):
        cfg = write_config(tmp_path, SPARSE_CONFIG)
        out = tmp_path / "out"
        assert main(["rate-sweep", "--config", cfg, "--out", str(out)]) == 0
        kv = parse_kv(capsys.readouterr().out.replace(" ", "\n"))
        assert float(kv["slope"]) >= 0.9
        assert float(kv["predicted"]) == 1.0

    def test_saturated_sweep_fails_with_exit_1(self, tmp_path, capsys):
        # noise at or above ||y|| keeps every solve at the null solution, so
        # the error is flat, the fitted slope is 0, and the check fails
        cfg = write_config(
            tmp_path,
            """\
[problem]
N = 50
delta = 1e-3
seed = 0
sparse_support = [[1, 1.0]]

[problem.sigma_model]
nu_hat = 1.0
K = 1.0

[sweep]
delta_min = 1.44
delta_max = 4.0
num_points = 3
seeds = [0, 1]
""",
        )
        out = tmp_path / "out"
        assert main(["rate-sweep", "--config", cfg, "--out", str(out)]) == 1
        stdout = capsys.readouterr().out
        assert "pass=false" in stdout
        kv = parse_kv(stdout.replace(" ", "\n"))
        assert float(kv["slope"]) < 0.9
        _, rows = read_csv(out / "rate_sweep.csv")
        assert all(row["status"] == "ok" for row in rows)

    def test_missing_sweep_section_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG.split("[sweep]")[0])
        assert main(["rate-sweep", "--config", cfg]) == 2
        assert "sweep" in capsys.readouterr().err

    def test_emit_phi_grid(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG + "\n[outputs]\nemit_phi_grid = true\n")
        out = tmp_path / "out"
        assert main(["rate-sweep", "--config", cfg, "--out", str(out)]) == 0
        header, rows = read_csv(out / "phi_grid.csv")
        assert header == ["t", "phi"]
        assert len(rows) == 200

    def test_byte_identical_reruns(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["rate-sweep", "--config", cfg, "--out", str(out_a)]) == 0
        assert main(["rate-sweep", "--config", cfg, "--out", str(out_b)]) == 0
        capsys.readouterr()
        assert (out_a / "rate_sweep.csv").read_bytes() == (out_b / "rate_sweep.csv").read_bytes()


class TestDistFn:
    def test_csv_schema_and_monotone(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG)
        out = tmp_path / "out"
        assert main([
            "dist-fn", "--config", cfg, "--out", str(out), "--r-grid", "0.5,1,2,4,8",
        ]) == 0
        stdout = capsys.readouterr().out
        assert "sigma_last=" in stdout
        header, rows = read_csv(out / "dist_fn.csv")
        assert header == ["R", "d_value", "N"]
        assert [row["N"] for row in rows] == ["150"] * 5
        vals = [float(row["d_value"]) for row in rows]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
        # all-ones subgradient: values sit on the closed-form envelope
        scale = float(np.sqrt(np.sum(np.arange(1.0, 151.0) ** 2)))
        for row in rows:
            envelope = max(0.0, 1.0 - float(row["R"]) / scale)
            assert float(row["d_value"]) >= envelope - 1e-8

    def test_config_grid_used_without_flag(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            POWER_CONFIG + "\n[outputs]\n\n[outputs.emit_dist_fn]\nR_grid = [1.0, 2.0]\n",
        )
        out = tmp_path / "out"
        assert main(["dist-fn", "--config", cfg, "--out", str(out)]) == 0
        capsys.readouterr()
        _, rows = read_csv(out / "dist_fn.csv")
        assert len(rows) == 2

    def test_no_grid_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG)
        assert main(["dist-fn", "--config", cfg]) == 2
        assert "radius grid" in capsys.readouterr().err

    def test_bad_grid_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG)
        assert main(["dist-fn", "--config", cfg, "--r-grid", "4,2,1"]) == 2
        assert "ascending" in capsys.readouterr().err
        assert main(["dist-fn", "--config", cfg, "--r-grid", "1,zap"]) == 2

    def test_byte_identical_reruns(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        args = ["dist-fn", "--config", cfg, "--r-grid", "0.5,1,2"]
        assert main(args + ["--out", str(out_a)]) == 0
        assert main(args + ["--out", str(out_b)]) == 0
        capsys.readouterr()
        assert (out_a / "dist_fn.csv").read_bytes() == (out_b / "dist_fn.csv").read_bytes()


class TestPhiGrid:
    def test_rows_and_monotone(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG)
        out = tmp_path / "out"
        assert main([
            "phi-grid", "--config", cfg, "--out", str(out),
            "--t-min", "1e-6", "--t-max", "1e-1", "--num-points", "50",
        ]) == 0
        capsys.readouterr()
        header, rows = read_csv(out / "phi_grid.csv")
        assert header == ["t", "phi"]
        assert len(rows) == 50
        phis = [float(row["phi"]) for row in rows]
        assert all(b >= a for a, b in zip(phis, phis[1:]))

    def test_bad_range_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG)
        assert main([
            "phi-grid", "--config", cfg, "--t-min", "1.0", "--t-max", "0.5",
        ]) == 2
        assert "t-min" in capsys.readouterr().err


class TestViCheck:
    def test_passes_with_exit_0(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG)
        assert main([
            "vi-check", "--config", cfg, "--num-samples", "600", "--seed", "0",
        ]) == 0
        stdout = capsys.readouterr().out
        kv = parse_kv(stdout)
        assert float(kv["vi_min_margin"]) >= -1e-9
        assert float(kv["lemma_min_margin"]) >= -1e-9
        assert kv["pass"] == "true"

    def test_replay_vi_sample(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG)
        op = DiagonalOperator.power(1.0, 1.0, n=150)
        x_true = DecaySequence.power(2.0, 1.0, n=150)
        worst = vi_suite(op, x_true, num_samples=400, seed=9).worst
        path = tmp_path / "sample.json"
        save_sample(worst, path, kind="vi")
        assert main(["vi-check", "--config", cfg, "--replay", str(path)]) == 0
        kv = parse_kv(capsys.readouterr().out)
        assert kv["margin_stored"] == kv["margin_recomputed"]

    def test_replay_lemma_sample(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG)
        x_true = DecaySequence.power(2.0, 1.0, n=150)
        worst = lemma_suite(x_true, dim=150, num_samples=400, seed=2).worst
        path = tmp_path / "sample.json"
        save_sample(worst, path, kind="lemma")
        assert main(["vi-check", "--config", cfg, "--replay", str(path)]) == 0
        kv = parse_kv(capsys.readouterr().out)
        assert kv["margin_stored"] == kv["margin_recomputed"]

    def test_bad_sample_count_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, POWER_CONFIG)
        assert main(["vi-check", "--config", cfg, "--num-samples", "0"]) == 2
        assert "num-samples" in capsys.readouterr().err


class TestModuleEntry:
    def test_python_dash_m_smoke(self, tmp_path):
        cfg = write_config(tmp_path, POWER_CONFIG)
        out = tmp_path / "out"
        proc = subprocess.run(
            [
                sys.executable, "-m", "l1lab", "phi-grid",
                "--config", cfg, "--out", str(out), "--num-points", "10",
            ],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert (out / "phi_grid.csv").exists()
