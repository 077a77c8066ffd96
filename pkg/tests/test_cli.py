import csv
import io
import json

import numpy as np
import pytest

from martcompat.cli import main
from martcompat.crystal import variants


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], rows[1:]


def test_table1_csv(capsys):
    code, out, err = run_cli(capsys, "table1")
    assert code == 0 and err == ""
    header, rows = parse_csv(out)
    assert header[:2] == ["partner_index", "partner_sign"]
    assert len(rows) == 11
    table = {(r[0], r[1]): dict(zip(header, r)) for r in rows}
    junctioned = {("3", "+"), ("4", "-"), ("5", "+"), ("6", "-")}
    for key, row in table.items():
        assert row["verdict"] == ("V_II" if key in junctioned else "none")
    same = table[("1", "-")]
    assert abs(float(same["angle_deg_experimental"]) - 3.84) < 0.15
    twin = table[("3", "+")]
    assert abs(float(twin["angle_deg_experimental"]) - 0.69) < 0.15
    assert 0.0042 < float(twin["shear_small_low"]) < 0.0045
    assert 0.042 < float(twin["shear_big_low"]) < 0.046
    assert float(twin["shear_small_low"]) < float(twin["shear_small_high"])
    assert twin["stable"] == "yes"
    off = table[("4", "-")]
    assert 0.0022 < float(off["shear_small_low"]) < 0.0025
    assert 0.0035 < float(off["shear_big_low"]) < 0.004


def test_table1_json(capsys):
    code, out, err = run_cli(capsys, "table1", "--format", "json")
    assert code == 0
    rows = json.loads(out)
    assert len(rows) == 11
    for row in rows:
        assert {"partner", "angle_deg_experimental",
                "angle_deg_unit_det", "verdict"} <= set(row)


def test_curves_eta_xi(capsys):
    args = ("curves", "eta_xi", "--lambda-range", "1.05:1.3:0.05")
    code, out, err = run_cli(capsys, *args)
    assert code == 0
    header, rows = parse_csv(out)
    assert header == ["lambda", "eta1", "eta2", "xi1", "xi2"]
    assert len(rows) == 6
    from martcompat.junction import eta_xi
    for row in rows:
        lam = float(row[0])
        assert np.allclose([float(x) for x in row[1:]], eta_xi(lam),
                           atol=1e-12)
    code2, out2, _ = run_cli(capsys, *args)
    assert out2 == out


def test_curves_curl_ordering(capsys):
    code, out, _ = run_cli(capsys, "curves", "curl",
                           "--lambda-range", "1.1:1.2:0.05")
    assert code == 0
    header, rows = parse_csv(out)
    assert header == ["lambda", "curl_a", "curl_b", "curl_c", "curl_d"]
    for row in rows:
        a, b, c, d = (float(x) for x in row[1:])
        assert b < a and d < c


def test_curves_flag_errors(capsys):
    code, out, err = run_cli(capsys, "curves", "eta_xi")
    assert code == 2 and out == ""
    assert json.loads(err)["error"] == "config"
    code, _, err = run_cli(capsys, "curves", "eta_xi",
                           "--lambda-range", "0.9:1.2:0.05")
    assert code == 2
    code, _, err = run_cli(capsys, "curves", "eta_xi",
                           "--lambda-range", "1.05:1.2:0.05",
                           "--format", "json")
    assert code == 2


def test_scan_json_schema(capsys):
    code, out, err = run_cli(capsys, "scan", "--lambda", "1.2")
    assert code == 0 and err == ""
    report = json.loads(out)
    assert report["lambda"] == 1.2
    assert report["base"] == [1, "+"]
    assert report["junction_count"] == 8
    assert report["stable_count"] == 8
    assert len(report["junctions"]) == 8
    rec = report["junctions"][0]
    assert {"partner", "slip1", "slip2", "t1", "t2", "b", "m", "residual",
            "curl_norm", "rigidity", "separation", "stability"} <= set(rec)
    assert rec["rigidity"]["rigid"] is True
    assert rec["separation"]["side1"] > 0.0
    assert rec["stability"]["reasons"] == []


def test_scan_partner_filter_and_empty(capsys):
    code, out, _ = run_cli(capsys, "scan", "--lambda", "1.2",
                           "--partners", "3,+")
    assert code == 0
    assert json.loads(out)["junction_count"] == 2
    code, out, _ = run_cli(capsys, "scan", "--lambda", "1.2",
                           "--partners", "2,+")
    assert code == 0
    report = json.loads(out)
    assert report["junction_count"] == 0 and report["junctions"] == []


def test_scan_argument_errors(capsys):
    code, _, err = run_cli(capsys, "scan")
    assert code == 2
    assert "lambda" in json.loads(err)["message"]
    code, _, err = run_cli(capsys, "scan", "--lambda", "1.2",
                           "--partners", "9,+")
    assert code == 2
    code, _, err = run_cli(capsys, "scan", "--lambda", "1.2",
                           "--partners", "1,+", "--base", "1,+")
    assert code == 2


def test_tolerance_override(capsys):
    code, out, _ = run_cli(capsys, "scan", "--lambda", "1.2",
                           "--partners", "3,+",
                           "--tol-override", "rank_tol=1e-8")
    assert code == 0
    code, _, err = run_cli(capsys, "scan", "--lambda", "1.2",
                           "--tol-override", "bogus=1")
    assert code == 2
    code, _, err = run_cli(capsys, "scan", "--lambda", "1.2",
                           "--tol-override", "rank_tol=-1")
    assert code == 2


def test_out_file(tmp_path, capsys):
    target = tmp_path / "curves.csv"
    code, out, _ = run_cli(capsys, "curves", "eta_xi",
                           "--lambda-range", "1.1:1.2:0.1",
                           "--out", str(target))
    assert code == 0 and out == ""
    header, rows = parse_csv(target.read_text())
    assert header[0] == "lambda" and len(rows) == 2


def write_twowell_input(path, **overrides):
    lam = 1.0331
    us = variants(lam, 1.0 / lam)
    payload = {
        "U1": us[0].U.tolist(),
        "U2": us[1].U.tolist(),
        "F1": us[0].U.tolist(),
        "F2": us[0].U.tolist(),
        "n1": [1.0, 0.0, 0.0],
        "n2": [0.0, 1.0, 0.0],
    }
    payload.update(overrides)
    path.write_text(json.dumps(payload))
    return path


def test_twowell_feasible(tmp_path, capsys):
    src = write_twowell_input(tmp_path / "in.json")
    code, out, err = run_cli(capsys, "twowell", "--input", str(src))
    assert code == 0 and err == ""
    verdict = json.loads(out)
    assert verdict["hypothesis_ok"] is True
    assert verdict["feasible"] is True
    assert np.linalg.norm(verdict["d"]) < 1e-10


def test_twowell_hypothesis_failure(tmp_path, capsys):
    src = write_twowell_input(
        tmp_path / "in.json",
        U1=np.diag([1.2, 0.9, 1.0]).tolist(),
        U2=np.diag([0.9, 1.2, 1.0]).tolist(),
        F1=np.diag([1.2, 0.9, 1.0]).tolist(),
        F2=np.diag([0.9, 1.2, 1.0]).tolist())
    code, out, err = run_cli(capsys, "twowell", "--input", str(src))
    assert code == 3 and out == ""
    assert json.loads(err)["error"] == "hypothesis"


def test_twowell_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    code, _, err = run_cli(capsys, "twowell", "--input", str(bad))
    assert code == 2
    detail = json.loads(err)["detail"]
    assert detail["line"] == 1 and detail["column"] >= 1
    incomplete = tmp_path / "short.json"
    incomplete.write_text(json.dumps({"U1": np.eye(3).tolist()}))
    code, _, err = run_cli(capsys, "twowell", "--input", str(incomplete))
    assert code == 2
    code, _, err = run_cli(capsys, "twowell")
    assert code == 2
    code, _, err = run_cli(capsys, "twowell", "--input",
                           str(tmp_path / "absent.json"))
    assert code == 2


def test_unknown_arguments(capsys):
    code, _, err = run_cli(capsys, "table1", "--frobnicate")
    assert code == 2
    assert json.loads(err)["error"] == "config"
    code, _, err = run_cli(capsys, "sideways")
    assert code == 2


def test_console_entry_point():
    import subprocess
    proc = subprocess.run(
        ["martcompat", "curves", "eta_xi", "--lambda-range", "1.1:1.2:0.1"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("lambda,eta1,eta2,xi1,xi2")
