"""Command-line interface: anchors, exit codes, outputs, config layering."""

import json
import os
import subprocess
import sys

import pytest

from franklinlab.cli import ANCHORS, run

EXPECTED_ANCHORS = ["x5", "x21", "L7", "x1", "x22", "x2", "x10", "cww",
                    "b4", "u30", "u35", "d2", "omega"]


def test_report_list(capsys):
    assert run(["report", "--list"]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert out == EXPECTED_ANCHORS
    assert list(ANCHORS) == EXPECTED_ANCHORS


def test_usage_errors(capsys):
    assert run(["verify", "nosuchanchor"]) == 2
    assert run(["nosuchcommand"]) == 2
    assert run([]) == 2
    assert run(["report"]) == 2


def test_verify_L7_passes(capsys, tmp_path):
    code = run(["verify", "L7", "--trials", "50", "--out", str(tmp_path)])
    assert code == 0
    blob = json.loads((tmp_path / "L7-s0.json").read_text())
    assert blob["verdict"] == "pass"
    assert blob["constants"]["failures"] == 0
    out = capsys.readouterr().out
    assert "anchor=L7" in out and "verdict=pass" in out


def test_verify_omega_writes_table(capsys, tmp_path):
    code = run(["verify", "omega", "--out", str(tmp_path)])
    assert code == 0
    csv = (tmp_path / "omega-s0.csv").read_text().splitlines()
    assert csv[0] == "family,verdict,depth,partial_sum"
    verdicts = dict(line.split(",")[:2] for line in csv[1:])
    assert verdicts == {"log": "diverges", "log-loglog": "diverges",
                        "log-loglog-squared": "converges"}


def test_haar_outputs(capsys, tmp_path):
    code = run(["haar", "--seed", "3", "--resolution", "5",
                "--xi-grid", "4", "--out", str(tmp_path)])
    assert code == 0
    blob = json.loads((tmp_path / "haar-s3.json").read_text())
    assert blob["constants"]["pythagoras_error"] <= 1e-9
    header = (tmp_path / "haar-s3.csv").read_text().splitlines()[0]
    assert header == "cell,x,f,square_fn,dyadic_maximal"


def test_gen_basis_small(capsys, tmp_path):
    code = run(["gen-basis", "--variant", "classical", "--n", "8",
                "--resolution", "4", "--out", str(tmp_path)])
    assert code == 0
    blob = json.loads((tmp_path / "basis-classical-n8.json").read_text())
    assert blob["constants"]["gram_defect"] <= 1e-9


def test_estimate_an_csv_columns(capsys):
    code = run(["estimate-an", "--basis", "haar", "--n-max", "32",
                "--restarts", "1", "--csv"])
    assert code == 0
    lines = [l for l in capsys.readouterr().out.splitlines()
             if "," in l or l.startswith("n,")]
    assert lines[0] == "n,r_n,r2_over_log2n"
    assert len(lines) == 1 + 4  # checkpoints 4, 8, 16, 32


def test_csv_replay_is_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["estimate-an", "--basis", "haar", "--n-max", "32",
            "--restarts", "2", "--seed", "9"]
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    name = "estimate-an-haar-sng-s9.csv"
    assert (a / name).read_bytes() == (b / name).read_bytes()


def test_demo_convergence_cli(capsys, tmp_path):
    code = run(["demo-convergence", "--blocks", "6", "--out", str(tmp_path)])
    assert code == 0
    csv = (tmp_path / "d2-s0.csv").read_text().splitlines()
    assert csv[0] == "k,delta_sq,partial_sum"
    assert len(csv) == 7


def test_check_multiplier_exit_codes(capsys):
    assert run(["check-multiplier", "--w", "log"]) == 0
    out = capsys.readouterr().out
    assert "diverges" in out
    assert run(["check-multiplier", "--w", "log-loglog-squared"]) == 0


def test_config_layering(capsys, tmp_path, monkeypatch):
    cfgfile = tmp_path / "cfg"
    cfgfile.write_text("# layered settings\nseed=4\nresolution=5\n")
    out1 = tmp_path / "o1"
    # file value applies when neither flag nor environment sets the key
    assert run(["haar", "--config", str(cfgfile), "--out", str(out1)]) == 0
    assert (out1 / "haar-s4.json").exists()
    # environment overrides the file
    monkeypatch.setenv("FRANKLIN_SEED", "6")
    out2 = tmp_path / "o2"
    assert run(["haar", "--config", str(cfgfile), "--out", str(out2)]) == 0
    assert (out2 / "haar-s6.json").exists()
    # explicit flag overrides both
    out3 = tmp_path / "o3"
    assert run(["haar", "--config", str(cfgfile), "--seed", "8",
                "--out", str(out3)]) == 0
    assert (out3 / "haar-s8.json").exists()


def test_report_show_roundtrip(capsys, tmp_path):
    assert run(["verify", "x14"]) == 2  # not an exposed anchor
    run(["verify", "L7", "--trials", "20", "--out", str(tmp_path)])
    capsys.readouterr()
    code = run(["report", "--show", str(tmp_path / "L7-s0.json")])
    assert code == 0
    blob = json.loads(capsys.readouterr().out)
    assert blob["anchor"] == "L7"


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "franklinlab.cli",
                           "report", "--list"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip().splitlines() == EXPECTED_ANCHORS
