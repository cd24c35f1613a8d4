import csv
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from spatial_coupling.cli import main
from spatial_coupling.config import ConfigError, RunConfig, parse_config
from spatial_coupling.profiles import read_pair_csv

FAST_GRID = ["--x-min", "-8", "--x-max", "8", "--dx", "0.0625"]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def report(text: str) -> dict:
    return dict(line.split(" = ", 1) for line in text.strip().splitlines())


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# ---------------------------------------------------------------------------
# configuration

def test_config_grammar():
    cfg = parse_config("""
        # erasure run
        seed = 7
        system = {family = gldpc, n = 15, e = 3}
        grid.dx = 1/32          # a fraction
        solver.init = ramp
    """)
    assert cfg["seed"] == 7
    assert cfg["system.family"] == "gldpc"
    assert cfg["grid.dx"] == 1 / 32
    assert cfg["solver.init"] == "ramp"
    assert cfg["window.half_width"] == 0.5


def test_config_round_trip():
    cfg = parse_config("grid.x_min = -4\nconvexity.count = 3\n")
    again = parse_config(cfg.dump())
    assert again.values == cfg.values


@pytest.mark.parametrize("text", ["nonsense = 1", "seed 4", "seed = abc", "system = {family = gldpc"])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_defaults_are_documented():
    cfg = RunConfig()
    assert cfg["grid.dx"] == 1 / 64
    assert cfg["system.family"] == "ldpc_bec"


# ---------------------------------------------------------------------------
# calibrate

def test_calibrate_bec(capsys):
    code, out, _ = run(capsys, "calibrate", "--family", "ldpc_bec", "--l", 3, "--r", 6)
    assert code == 0
    assert "0.4881" in out
    assert report(out)["spgc"] == "True"


def test_calibrate_gldpc_reports_reference_threshold(capsys):
    code, out, _ = run(capsys, "calibrate", "--family", "gldpc", "--n", 15, "--e", 3)
    assert code == 0
    assert "0.3901" in out


def test_calibrate_writes_csv(capsys, tmp_path):
    out_csv = tmp_path / "cal" / "bec.csv"
    code, _, _ = run(capsys, "calibrate", "--out", out_csv)
    assert code == 0
    rows = read_rows(out_csv)
    assert rows[0] == ["family", "params", "threshold", "x_MAP", "y_MAP", "residual"]
    assert float(rows[1][2]) == pytest.approx(0.4881, abs=5e-4)


def test_unknown_family_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["calibrate", "--family", "turbo"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_key_is_a_usage_error(capsys):
    code, _, err = run(capsys, "calibrate", "--set", "system.colour=red")
    assert code == 2
    assert "usage" in err


def test_failed_calibration_exits_2(capsys):
    code, _, err = run(capsys, "calibrate", "--family", "amp", "--delta", 0.95)
    assert code == 2
    assert "calibration" in err


# ---------------------------------------------------------------------------
# solve and potential

def test_solve_then_potential_is_reproducible(capsys, tmp_path):
    fp = tmp_path / "fp.csv"
    code, out, _ = run(capsys, "solve", "--out", fp, "--report", tmp_path / "solve.txt")
    assert code == 0
    info = report(out)
    assert info["status"] == "converged" and info["cfp"] == "True"
    assert (tmp_path / "solve.txt").read_text() == out
    pair = read_pair_csv(fp, require_monotone=True)
    assert pair.grid.n == 2049

    runs = [run(capsys, "potential", "--input", fp)[1] for _ in range(2)]
    assert runs[0] == runs[1]
    values = report(runs[0])
    assert values["cfp"] == "True"
    W, W_k = float(values["W"]), float(values["W_kappa"])
    assert abs(W - W_k) <= 1e-4


def test_solve_is_byte_identical(capsys, tmp_path):
    for name in ("a.csv", "b.csv"):
        assert run(capsys, "solve", *FAST_GRID, "--out", tmp_path / name)[0] == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_non_convergence_exits_3(capsys, tmp_path):
    code, out, _ = run(capsys, "solve", "--max-iterations", 3, "--out", tmp_path / "fp.csv")
    assert code == 3
    assert report(out)["status"] == "max_iterations"


def test_gap_violation_exits_4(capsys, tmp_path):
    code, _, err = run(capsys, "solve", "--eps-offset", 0.01, "--out", tmp_path / "fp.csv")
    assert code == 4
    assert "gap" in err


def test_potential_needs_input(capsys):
    assert run(capsys, "potential")[0] == 2


# ---------------------------------------------------------------------------
# convexity

def test_convexity_between_fixed_points(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "solve", "--out", a)[0] == 0
    assert run(capsys, "solve", "--init", "ramp", "--out", b)[0] == 0
    sweep = tmp_path / "sweep.csv"
    code, out, _ = run(capsys, "convexity", "--pair0", a, "--pair1", b, "--out", sweep, "--svg", tmp_path / "w.svg")
    assert code == 0
    assert report(out)["verdict"] == "CONVEX"
    rows = read_rows(sweep)
    assert rows[0] == ["lambda", "W", "second_difference"]
    assert len(rows) == 22
    ET.parse(tmp_path / "w.svg")


def test_convexity_batch_is_deterministic_across_workers(capsys, tmp_path):
    common = ["convexity", *FAST_GRID, "--count", 3, "--seed", 11]
    assert run(capsys, *common, "--workers", 1, "--out", tmp_path / "one" / "s.csv")[0] == 0
    assert run(capsys, *common, "--workers", 2, "--out", tmp_path / "two" / "s.csv")[0] == 0
    for k in range(3):
        one = (tmp_path / "one" / f"s_{k:03d}.csv").read_bytes()
        two = (tmp_path / "two" / f"s_{k:03d}.csv").read_bytes()
        assert one == two
        assert b"\r" not in one


def test_convexity_needs_both_pairs(capsys, tmp_path):
    assert run(capsys, "convexity", "--pair0", tmp_path / "x.csv")[0] == 2


# ---------------------------------------------------------------------------
# rearrange and export

def test_rearrange_random_pair(capsys, tmp_path):
    out_csv = tmp_path / "sorted.csv"
    code, out, _ = run(capsys, "rearrange", *FAST_GRID, "--seed", 3, "--out", out_csv)
    assert code == 0
    info = report(out)
    assert info["monotone"] == "True" and info["decreased"] == "True"
    assert float(info["W_after"]) <= float(info["W_before"])
    pair = read_pair_csv(out_csv, require_monotone=True)
    assert np.all(np.diff(pair.f.values) >= 0)


def test_export_writes_csv_and_valid_svg(capsys, tmp_path):
    fp = tmp_path / "fp.csv"
    assert run(capsys, "solve", *FAST_GRID, "--out", fp)[0] == 0
    outdir = tmp_path / "export"
    code, _, _ = run(capsys, "export", "--out", outdir, "--input", fp)
    assert code == 0
    for name in ("exit.svg", "phi.svg", "areas.svg", "profile.svg"):
        root = ET.parse(outdir / name).getroot()
        assert root.tag.endswith("svg")
    assert read_rows(outdir / "exit_curves.csv")[0] == ["t", "h_f", "h_g"]
    assert read_rows(outdir / "areas.csv")[0] == ["t", "A", "A_tilde"]
    phi_rows = read_rows(outdir / "phi.csv")
    assert phi_rows[0] == ["u", "v", "phi"] and len(phi_rows) == 1 + 65 * 65
    assert min(float(r[2]) for r in phi_rows[1:]) >= -1e-12


def test_config_file_and_flags(capsys, tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("system = {family = ldpc_bec, l = 4, r = 8}\n")
    code, out, _ = run(capsys, "calibrate", "--config", conf)
    assert code == 0
    assert "l=4" in report(out)["params"]
    # flags override the file
    code, out, _ = run(capsys, "calibrate", "--config", conf, "--l", 3, "--r", 6)
    assert "0.4881" in out
