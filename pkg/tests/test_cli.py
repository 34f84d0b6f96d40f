import math
import os

import numpy as np
import pytest

from lvlaser.cli import main
from lvlaser.model import DimensionlessParams, nondimensionalize, to_physical


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_report(text):
    out = {}
    for line in text.strip().splitlines():
        key, _, value = line.partition(":")
        out[key.strip()] = value.strip()
    return out


STEADY = ("steady", "--scheme", "lambda", "--lam", "100", "--sat", "0",
          "--alpha1", "1", "--alpha2", "10", "--eta", "0")


class TestSteadyCommand:
    def test_reference_point(self, capsys):
        code, out, _ = run(capsys, *STEADY)
        assert code == 0
        rep = parse_report(out)
        assert float(rep["n"]) == pytest.approx(75.19, abs=5e-3)
        assert rep["physical"] == "True"
        assert rep["regime"] == "Lasing"

    def test_missing_field_names_it(self, capsys):
        code, _, err = run(capsys, "steady", "--scheme", "lambda", "--lam", "100",
                           "--sat", "0", "--alpha1", "1")
        assert code == 2
        assert "alpha2" in err

    def test_missing_scheme(self, capsys):
        code, _, err = run(capsys, "steady", "--lam", "100", "--sat", "0",
                           "--alpha1", "1", "--alpha2", "10")
        assert code == 2
        assert "scheme" in err

    def test_csv_format(self, capsys):
        code, out, _ = run(capsys, *STEADY, "--format", "csv")
        assert code == 0
        header, row = out.strip().splitlines()
        assert header.startswith("n,x,rho00")
        assert len(row.split(",")) == len(header.split(","))

    def test_mixed_parameter_blocks_rejected(self, capsys):
        code, _, err = run(capsys, "steady", "--scheme", "lambda", "--lam", "100",
                           "--sat", "0", "--alpha1", "1", "--alpha2", "10",
                           "--gamma-10", "1")
        assert code == 2
        assert "block" in err

    def test_no_color_codes_ever(self, capsys):
        _, out, err = run(capsys, *STEADY)
        assert "\x1b" not in out + err


class TestThresholdsCommand:
    def test_thresholdless_lambda(self, capsys):
        code, out, _ = run(capsys, "thresholds", "--scheme", "lambda",
                           "--lam", "100", "--sat", "0", "--alpha2", "10")
        assert code == 0
        rep = parse_report(out)
        assert float(rep["p1_thr"]) == 0.0
        assert float(rep["beta"]) == 1.0

    def test_v_exact_and_expansion(self, capsys):
        code, out, _ = run(capsys, "thresholds", "--scheme", "v", "--lam", "1000",
                           "--sat", "1", "--alpha1", "1")
        assert code == 0
        rep = parse_report(out)
        assert float(rep["p2_thr_approx"]) == pytest.approx(1.006)
        assert float(rep["p2_max_approx"]) == pytest.approx(500.0)
        assert float(rep["p2_max_exact"]) == pytest.approx(497.494, abs=1e-3)
        assert float(rep["rel_diff_max"]) == pytest.approx(0.00504, abs=1e-4)

    def test_no_lasing_exit(self, capsys):
        code, _, err = run(capsys, "thresholds", "--scheme", "lambda",
                           "--lam", "100", "--sat", "12", "--alpha2", "2")
        assert code == 3
        assert "no lasing" in err

    def test_empty_window_exit(self, capsys):
        code, _, err = run(capsys, "thresholds", "--scheme", "v", "--lam", "100",
                           "--sat", "30", "--alpha1", "1")
        assert code == 3
        assert "window" in err


class TestSweepCommand:
    def test_structure(self, capsys):
        code, out, _ = run(capsys, "sweep", "--scheme", "lambda", "--lam", "100",
                           "--sat", "1", "--alpha2", "10", "--points", "200")
        assert code == 0
        lines = out.strip().split("\n")
        assert len(lines) == 201
        assert lines[0] == "pump,n,x,rho00,rho11,rho22,D,beta,gamma_perp,regime"

    def test_sat_list_writes_suffixed_files(self, capsys, tmp_path):
        out_path = tmp_path / "family.csv"
        code, _, _ = run(capsys, "sweep", "--scheme", "lambda", "--lam", "100",
                         "--alpha2", "10", "--sat-list", "0,1,10",
                         "--points", "12", "--output", str(out_path))
        assert code == 0
        names = sorted(p.name for p in tmp_path.iterdir())
        assert names == ["family_sat0.csv", "family_sat1.csv", "family_sat10.csv"]
        for p in tmp_path.iterdir():
            assert len(p.read_text().strip().split("\n")) == 13

    def test_sat_list_requires_output(self, capsys):
        code, _, err = run(capsys, "sweep", "--scheme", "lambda", "--lam", "100",
                           "--alpha2", "10", "--sat-list", "0,1")
        assert code == 2
        assert "output" in err

    def test_v_regime_column_transitions_at_exact_boundary(self, capsys):
        from lvlaser.analysis import v_thresholds_exact

        code, out, _ = run(capsys, "sweep", "--scheme", "v", "--lam", "10000",
                           "--sat", "1", "--alpha1", "1", "--points", "200")
        assert code == 0
        lines = out.strip().split("\n")[1:]
        pumps = [float(l.split(",")[0]) for l in lines]
        regimes = [l.split(",")[-1] for l in lines]
        _, pmax = v_thresholds_exact(
            DimensionlessParams(lam=1e4, sat=1.0, alpha1=1.0, alpha2=1.0))
        i = regimes.index("AboveBreakdown")
        assert regimes[i - 1] == "Lasing"
        assert pumps[i - 1] <= pmax < pumps[i]

    def test_unwritable_output(self, capsys, tmp_path):
        code, _, err = run(capsys, "sweep", "--scheme", "lambda", "--lam", "100",
                           "--sat", "1", "--alpha2", "10",
                           "--output", str(tmp_path / "no" / "dir" / "x.csv"))
        assert code == 4
        assert "cannot write" in err

    def test_bad_grid(self, capsys):
        code, _, err = run(capsys, "sweep", "--scheme", "lambda", "--lam", "100",
                           "--sat", "1", "--alpha2", "10",
                           "--from", "10", "--to", "1")
        assert code == 2


class TestIntegrateCommand:
    ARGS = ("integrate", "--scheme", "lambda", "--lam", "100", "--sat", "1",
            "--alpha1", "1", "--alpha2", "10")

    def test_reaches_steady_and_marks_it(self, capsys):
        code, out, _ = run(capsys, *self.ARGS)
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "t,n,x,rho00,rho11,rho22"
        assert lines[-1].startswith("# steady: ")
        assert lines[-1] == "# steady: " + lines[-2]
        data = [l for l in lines[1:] if not l.startswith("#")]
        assert len(data) >= 200

    def test_final_state_matches_steady_command(self, capsys):
        code, out, _ = run(capsys, *self.ARGS)
        final = [float(v) for v in
                 out.strip().split("\n")[-1].removeprefix("# steady: ").split(",")]
        code2, out2, _ = run(capsys, "steady", "--scheme", "lambda", "--lam", "100",
                             "--sat", "1", "--alpha1", "1", "--alpha2", "10")
        n_ref = float(parse_report(out2)["n"])
        assert final[1] == pytest.approx(n_ref, rel=1e-6)

    def test_trace_column_conserved(self, capsys):
        _, out, _ = run(capsys, *self.ARGS)
        for line in out.strip().split("\n")[1:]:
            if line.startswith("#"):
                continue
            _, _, _, r00, r11, r22 = map(float, line.split(","))
            assert abs(r00 + r11 + r22 - 1.0) < 1e-9

    def test_zero_t_end_is_config_error(self, capsys):
        code, _, err = run(capsys, *self.ARGS, "--t-end", "0.0")
        assert code == 2
        assert "t_end" in err

    def test_no_convergence_exits_5_but_writes_data(self, capsys):
        code, out, err = run(capsys, *self.ARGS, "--t-end", "30",
                             "--convergence-window", "50")
        assert code == 5
        assert "no steady state" in err
        assert out.startswith("t,n,x")
        assert "# steady:" not in out

    def test_init_override(self, capsys):
        code, out, _ = run(capsys, *self.ARGS, "--init", "0,0,0.5,0.25,0.25",
                           "--t-end", "1")
        rows = [l for l in out.strip().split("\n")[1:] if not l.startswith("#")]
        first = [float(v) for v in rows[0].split(",")]
        assert first[3] == 0.5 and first[4] == 0.25

    def test_bad_init_rejected(self, capsys):
        code, _, err = run(capsys, *self.ARGS, "--init", "0,0,0.9,0.9,0.9")
        assert code == 2 and "init" in err
        code, _, err = run(capsys, *self.ARGS, "--init", "1,2,3")
        assert code == 2 and "init" in err

    def test_physical_block_drives_dynamics(self, capsys):
        code, out, _ = run(capsys, "integrate", "--scheme", "lambda",
                           "--n-atoms", "200", "--coupling", "0.5",
                           "--cavity-decay", "1", "--gamma-10", "1",
                           "--gamma-21", "1", "--gamma-02", "10")
        assert code == 0


class TestDeterminismAndConfig:
    DIMLESS = ("sweep", "--scheme", "lambda", "--lam", "128", "--sat", "0.25",
               "--alpha1", "2", "--alpha2", "8", "--eta", "0.5", "--points", "64")

    def test_identical_runs_are_byte_identical(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(capsys, *self.DIMLESS, "--output", str(a))[0] == 0
        assert run(capsys, *self.DIMLESS, "--output", str(b))[0] == 0
        assert a.read_bytes() == b.read_bytes()

    def test_physical_and_dimensionless_forms_agree_bytewise(self, capsys, tmp_path):
        # power-of-two rates so that nondimensionalizing is exact
        phys = ("sweep", "--scheme", "lambda", "--n-atoms", "512",
                "--coupling", "2", "--cavity-decay", "4", "--gamma-10", "2",
                "--gamma-21", "4", "--gamma-02", "16", "--gamma-col", "1",
                "--points", "64")
        a, b = tmp_path / "dimless.csv", tmp_path / "phys.csv"
        assert run(capsys, *self.DIMLESS, "--output", str(a))[0] == 0
        assert run(capsys, *phys, "--output", str(b))[0] == 0
        assert a.read_bytes() == b.read_bytes()

    def test_integrate_forms_agree_bytewise(self, capsys, tmp_path):
        # physical block equal to the canonical embedding of the reduced set
        d = DimensionlessParams(lam=128, sat=0.25, alpha1=2, alpha2=8, eta=0.5)
        p = to_physical(d)
        assert nondimensionalize(p) == d
        dim = ("integrate", "--scheme", "lambda", "--lam", "128", "--sat", "0.25",
               "--alpha1", "2", "--alpha2", "8", "--eta", "0.5")
        phy = ("integrate", "--scheme", "lambda",
               "--n-atoms", repr(p.n_atoms), "--coupling", repr(p.coupling),
               "--cavity-decay", repr(p.cavity_decay),
               "--gamma-10", repr(p.gamma_10), "--gamma-21", repr(p.gamma_21),
               "--gamma-02", repr(p.gamma_02), "--gamma-col", repr(p.gamma_col))
        a, b = tmp_path / "dim.csv", tmp_path / "phy.csv"
        assert run(capsys, *dim, "--output", str(a))[0] == 0
        assert run(capsys, *phy, "--output", str(b))[0] == 0
        assert a.read_bytes() == b.read_bytes()

    def test_dump_config_round_trip(self, capsys, tmp_path):
        code, dump, _ = run(capsys, *self.DIMLESS, "--dump-config")
        assert code == 0
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text(dump)
        direct = tmp_path / "direct.csv"
        via_cfg = tmp_path / "via_cfg.csv"
        assert run(capsys, *self.DIMLESS, "--output", str(direct))[0] == 0
        assert run(capsys, "sweep", "--config", str(cfg_file),
                   "--output", str(via_cfg))[0] == 0
        assert direct.read_bytes() == via_cfg.read_bytes()

    def test_config_file_with_flag_override(self, capsys, tmp_path):
        cfg = tmp_path / "base.cfg"
        cfg.write_text("# base configuration\nscheme=lambda\nlam=100\nsat=1\n"
                       "alpha1=1\nalpha2=10\n")
        code, out, _ = run(capsys, "steady", "--config", str(cfg))
        assert code == 0
        n_base = float(parse_report(out)["n"])
        code, out, _ = run(capsys, "steady", "--config", str(cfg), "--sat", "0")
        n_zero_sat = float(parse_report(out)["n"])
        assert n_zero_sat > n_base

    def test_config_file_diagnostics_carry_line_numbers(self, capsys, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("scheme=lambda\nwhat=1\n")
        code, _, err = run(capsys, "steady", "--config", str(cfg))
        assert code == 2
        assert "bad.cfg:2" in err and "what" in err
        cfg.write_text("scheme=lambda\nlam=abc\n")
        code, _, err = run(capsys, "steady", "--config", str(cfg))
        assert code == 2
        assert "bad.cfg:2" in err and "lam" in err

    def test_missing_config_file(self, capsys):
        code, _, err = run(capsys, "steady", "--config", "/nonexistent.cfg")
        assert code == 2
