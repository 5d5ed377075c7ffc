import os

import numpy as np
import pytest

from fnlswaves.cli import main, parse_config
from fnlswaves.spectral import load_field

SOLVE_CONFIG = """
[run]
command = solve
format_version = 1

[problem]
s = 0.75
sigma = 1.0
lambda1 = 1.0
lambda2 = 1.0
kind = linear_phase

[grid]
l = 32.0
n = 1024

[solver]
tol = 1e-10
max_iter = 500
mw = 3
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestConfigParsing:
    def test_valid_config(self, tmp_path):
        cfg = parse_config(write(tmp_path, "run.ini", SOLVE_CONFIG))
        assert cfg.command == "solve"
        assert cfg.grid.n == 1024
        assert cfg.solver_cfg.mw == 3

    def test_empty_config_reports_fields(self, tmp_path, capsys):
        code = main(["--config", write(tmp_path, "empty.ini", "")])
        assert code == 2
        err = capsys.readouterr().err
        assert "run" in err

    def test_unknown_key_rejected(self, tmp_path, capsys):
        bad = SOLVE_CONFIG.replace("[solver]\ntol", "[solver]\nwarp = 9\ntol", 1)
        code = main(["--config", write(tmp_path, "bad.ini", bad)])
        assert code == 2
        assert "warp" in capsys.readouterr().err

    def test_duplicate_section_rejected(self, tmp_path):
        bad = SOLVE_CONFIG + "\n[solver]\ntol = 1e-8\n"
        code = main(["--config", write(tmp_path, "dup.ini", bad)])
        assert code == 2

    def test_unknown_section_rejected(self, tmp_path, capsys):
        code = main(["--config", write(tmp_path, "bad.ini", SOLVE_CONFIG + "\n[mystery]\nx = 1\n")])
        assert code == 2
        assert "mystery" in capsys.readouterr().err

    def test_missing_problem_fields(self, tmp_path, capsys):
        text = SOLVE_CONFIG.replace("s = 0.75\n", "").replace("sigma = 1.0\n", "")
        code = main(["--config", write(tmp_path, "bad.ini", text)])
        assert code == 2
        err = capsys.readouterr().err
        assert "'s'" in err and "'sigma'" in err


class TestSolveCommand:
    def test_solve_produces_artifacts(self, tmp_path, capsys):
        cfg = write(tmp_path, "run.ini", SOLVE_CONFIG)
        out = str(tmp_path / "out")
        assert main(["--config", cfg, "--out", out]) == 0
        assert os.path.exists(os.path.join(out, "solve.csv"))
        prof, meta = load_field(os.path.join(out, "solve_profile.dat"))
        assert meta["lambda2"] == "1.0"
        assert float(meta["limiting_speed"]) == pytest.approx(1.8899, abs=5e-4)

    def test_speed_beyond_limit_exits_2(self, tmp_path, capsys):
        text = SOLVE_CONFIG.replace("lambda2 = 1.0", "lambda2 = 1.9")
        code = main(["--config", write(tmp_path, "run.ini", text),
                     "--out", str(tmp_path / "o")])
        assert code == 2
        assert "1.8899" in capsys.readouterr().err

    def test_deterministic_reruns(self, tmp_path):
        cfg = write(tmp_path, "run.ini", SOLVE_CONFIG)
        out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
        assert main(["--config", cfg, "--out", out1]) == 0
        assert main(["--config", cfg, "--out", out2]) == 0
        for name in ("solve.csv", "solve_profile.dat"):
            b1 = open(os.path.join(out1, name), "rb").read()
            b2 = open(os.path.join(out2, name), "rb").read()
            assert b1 == b2


class TestOtherCommands:
    def test_evolve_from_seed_profile(self, tmp_path):
        cfg = write(tmp_path, "solve.ini", SOLVE_CONFIG)
        out = str(tmp_path / "out")
        assert main(["--config", cfg, "--out", out]) == 0
        evolve_text = SOLVE_CONFIG.replace("command = solve", "command = evolve") + (
            "\n[evolve]\ndt = 0.02\nt_end = 0.2\nnl_tol = 1e-12\n"
        )
        cfg2 = write(tmp_path, "evolve.ini", evolve_text)
        code = main(["--config", cfg2, "--out", out,
                     "--seed-profile", os.path.join(out, "solve_profile.dat")])
        assert code == 0
        text = open(os.path.join(out, "evolve.csv")).read()
        assert "t,I1,I2,H,amplitude,peak_x" in text

    def test_scan_command(self, tmp_path):
        text = SOLVE_CONFIG.replace("command = solve", "command = scan") + (
            "\n[scan]\nspeeds = 0.5, 1.0\n"
        )
        out = str(tmp_path / "out")
        assert main(["--config", write(tmp_path, "scan.ini", text), "--out", out]) == 0
        rows = open(os.path.join(out, "scan.csv")).read().strip().splitlines()
        assert rows[-1].split(",")[-1] == "True"

    def test_analyze_command(self, tmp_path, capsys):
        text = SOLVE_CONFIG.replace("command = solve", "command = analyze") + (
            "\n[analyze]\nwindow_min = 5.0\nwindow_max = 25.0\n"
        )
        out = str(tmp_path / "out")
        assert main(["--config", write(tmp_path, "a.ini", text), "--out", out]) == 0
        assert "slope=" in capsys.readouterr().out
        assert os.path.exists(os.path.join(out, "analyze.csv"))

    def test_probe_command(self, tmp_path, capsys):
        text = SOLVE_CONFIG.replace("command = solve", "command = probe") + (
            "\n[probe]\nalpha = 0.0\n"
        )
        text = text.replace("l = 32.0", "l = 32.0").replace("n = 1024", "n = 512")
        out = str(tmp_path / "out")
        assert main(["--config", write(tmp_path, "p.ini", text), "--out", out]) == 0
        assert "dominant multiplier=3.0" in capsys.readouterr().out.replace("multiplier=3.00", "multiplier=3.0")


class TestRecipes:
    def test_unknown_recipe(self, capsys):
        assert main(["--recipe", "fig9"]) == 2
        assert "unknown recipe" in capsys.readouterr().err

    def test_fig6_recipe(self, tmp_path):
        out = str(tmp_path / "figs")
        assert main(["--recipe", "fig6", "--out", out]) == 0
        text = open(os.path.join(out, "fig6.csv")).read()
        assert "lambda2,rho,rho_x" in text
        assert "tail_oscillations" in text

    def test_no_arguments_is_usage_error(self, capsys):
        assert main([]) == 2
