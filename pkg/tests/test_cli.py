"""End-to-end command-line checks, run in process through main().

Every test writes to tmp_path and parses the file back, so these double
as format-stability tests: the comment keys and column headers asserted
here are the public interface scripts downstream get to rely on.
"""

import json
import math

import numpy as np
import pytest

from filtpower.cli import main


def run(tmp_path, *argv, name="out.csv"):
    out = tmp_path / name
    rc = main(list(argv) + ["--output", str(out)])
    return rc, out.read_text(encoding="utf-8")


def comments(text):
    """Top-of-file and inline '# key = value' lines as a dict."""
    pairs = {}
    for line in text.splitlines():
        if line.startswith("# ") and " = " in line:
            key, _, value = line[2:].partition(" = ")
            pairs[key] = value
    return pairs


def section(text, name):
    """Data lines (no comments) following '# section = <name>'."""
    lines = text.splitlines()
    start = lines.index(f"# section = {name}") + 1
    rows = []
    for line in lines[start:]:
        if line.startswith("# section"):
            break
        if not line.startswith("#"):
            rows.append(line)
    return rows


def test_solve_csv_roundtrip(tmp_path):
    rc, text = run(
        tmp_path, "solve", "--problem", "simple-matrix", "--ep", "1.6",
        "--m", "100", "--init", "0.7,0.8,0.4",
    )
    assert rc == 0
    meta = comments(text)
    assert meta["command"] == "solve"
    assert meta["problem"] == "simple-matrix"
    assert meta["m"] == "100"
    assert meta["init"] == "0.7,0.8,0.4"
    assert meta["status"] == "converged"
    assert float(meta["eigenvalue"]) == pytest.approx(2.0, abs=1e-8)
    history = section(text, "history")
    assert history[0] == "k,estimate"
    assert len(history) - 1 == int(meta["iterations"])
    vector = section(text, "eigenvector")
    assert vector[0] == "index,value"
    assert len(vector) - 1 == 3
    assert meta["length"] == "3"


def test_solve_json(tmp_path):
    rc, text = run(
        tmp_path, "solve", "--problem", "simple-matrix", "--ep", "1.6",
        "--m", "100", "--format", "json", name="out.json",
    )
    assert rc == 0
    payload = json.loads(text)
    assert payload["config"]["init"] == "random(seed=0)"
    rep = payload["report"]
    assert rep["status"] == "converged"
    assert rep["eigenvalue"] == pytest.approx(2.0, abs=1e-8)
    assert rep["length"] == 3
    assert len(rep["eigenvector"]) == 3
    assert len(payload["history"]) == rep["iterations"]


def test_solve_output_is_deterministic(tmp_path):
    args = ("solve", "--problem", "box1d", "--ep", "20")
    _, first = run(tmp_path, *args, name="a.csv")
    _, second = run(tmp_path, *args, name="b.csv")
    assert first == second


def test_solve_box_near_third_level(tmp_path):
    rc, text = run(tmp_path, "solve", "--problem", "box1d", "--ep", "45")
    assert rc == 0
    assert float(comments(text)["eigenvalue"]) == pytest.approx(44.281873, abs=1e-5)


def test_solve_cubic_3d_vector_dump(tmp_path):
    rc, text = run(
        tmp_path, "solve", "--problem", "cubic", "--dx", "0.1", "--ep", "15",
    )
    assert rc == 0
    meta = comments(text)
    assert meta["grid_shape"] == "9,9,9"
    assert meta["ordering"] == "row-major, x fastest"
    ground = 3 * (1 - math.cos(0.1 * math.pi)) / 0.01
    assert float(meta["eigenvalue"]) == pytest.approx(ground, abs=1e-6)
    vector = section(text, "eigenvector")
    assert len(vector) - 1 == 729
    assert vector[1].startswith("0,")
    assert vector[-1].startswith("728,")


def test_solve_shift_round_trips(tmp_path):
    base = ("solve", "--problem", "harmonic", "--ep", "0.5")
    rc0, plain = run(tmp_path, *base, name="plain.csv")
    rc1, shifted = run(tmp_path, *base, "--shift", "5", name="shifted.csv")
    assert rc0 == 0 and rc1 == 0
    a = float(comments(plain)["eigenvalue"])
    b = float(comments(shifted)["eigenvalue"])
    assert a == pytest.approx(0.4996873, abs=1e-6)
    assert b == pytest.approx(a, abs=1e-6)


def test_solve_stdout_by_default(capsys):
    rc = main(["solve", "--problem", "simple-matrix", "--ep", "1.6", "--m", "100"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.startswith("# command = solve")


def test_scan_csv_contract(tmp_path):
    rc, text = run(
        tmp_path, "scan", "--problem", "simple-matrix",
        "--ep-min", "0.5", "--ep-max", "3.5", "--ep-step", "1.5", "--m", "100",
    )
    assert rc == 0
    lines = text.splitlines()
    header = "e_p,eigenvalue,iterations,status,nearest_e_tp,predicted_R"
    assert header in lines
    meta = comments(text)
    assert meta["m"] == "100"
    # cells carry 9 significant digits, so parse-back fuzz is ~1e-8
    tps = [float(t) for t in meta["turning_points"].split(",")]
    assert tps == pytest.approx([1.4426950408889634, 2.4663034623764317], abs=1e-7)
    rows = lines[lines.index(header) + 1 :]
    assert len(rows) == 3  # 0.5, 2.0, 3.5
    got = [float(r.split(",")[1]) for r in rows]
    assert got == pytest.approx([1.0, 2.0, 3.0], abs=1e-6)
    assert all(r.split(",")[3] == "converged" for r in rows)


def test_scan_file_problem_annotations_empty_when_too_large(tmp_path):
    # above the brute-force annotation cutoff the spectrum columns stay
    # empty; failed rows are kept and drive the exit code
    x = np.arange(1, 300) * 0.01
    path = tmp_path / "flat.csv"
    np.savetxt(path, np.column_stack([x, np.zeros_like(x)]), delimiter=",")
    rc, text = run(
        tmp_path, "scan", "--problem", str(path),
        "--ep-min", "5", "--ep-max", "5", "--ep-step", "1", "--max-iter", "3",
    )
    assert rc == 2
    lines = text.splitlines()
    row = lines[lines.index("e_p,eigenvalue,iterations,status,nearest_e_tp,predicted_R") + 1]
    cells = row.split(",")
    assert cells[0] == "5"
    assert cells[3] == "max-iterations"
    assert cells[4] == "" and cells[5] == ""
    assert "turning_points" not in comments(text)


def test_scan_small_file_problem_gets_brute_force_annotations(tmp_path):
    x = np.arange(1, 50) * 0.02
    path = tmp_path / "well.csv"
    np.savetxt(path, np.column_stack([x, np.zeros_like(x)]), delimiter=",")
    rc, text = run(
        tmp_path, "scan", "--problem", str(path),
        "--ep-min", "5", "--ep-max", "5", "--ep-step", "1",
    )
    assert rc == 0
    meta = comments(text)
    assert "turning_points" in meta
    row = text.splitlines()[-1].split(",")
    assert row[3] == "converged"
    assert row[4] != "" and row[5] != ""
    assert float(row[1]) == pytest.approx(4.933178929321084, abs=1e-6)


def test_scan_workers_equivalent(tmp_path):
    args = (
        "scan", "--problem", "simple-matrix",
        "--ep-min", "0.5", "--ep-max", "3.5", "--ep-step", "1.5", "--m", "100",
    )
    _, serial = run(tmp_path, *args, "--workers", "1", name="w1.csv")
    _, parallel = run(tmp_path, *args, "--workers", "2", name="w2.csv")
    strip = lambda text: [l for l in text.splitlines() if not l.startswith("# workers")]
    assert strip(serial) == strip(parallel)


def test_scan_json(tmp_path):
    rc, text = run(
        tmp_path, "scan", "--problem", "simple-matrix",
        "--ep-min", "1.6", "--ep-max", "1.6", "--ep-step", "1",
        "--m", "100", "--format", "json", name="scan.json",
    )
    assert rc == 0
    payload = json.loads(text)
    assert len(payload["rows"]) == 1
    row = payload["rows"][0]
    assert row["status"] == "converged"
    assert row["eigenvalue"] == pytest.approx(2.0, abs=1e-8)
    assert row["predicted_R"] == pytest.approx(0.9341229787161113, rel=1e-9)


def test_reproduce_table_passes_oracle(tmp_path):
    rc, text = run(tmp_path, "reproduce", "--table", "1")
    assert rc == 0
    meta = comments(text)
    assert meta["oracle_match"] == "pass"
    lines = text.splitlines()
    header = "label,e_p,exact,discrete,computed,published,err_vs_discrete,err_vs_exact"
    rows = [l for l in lines[lines.index(header) + 1 :] if not l.startswith("#")]
    assert len(rows) == 5
    for row in rows:
        cells = row.split(",")
        assert float(cells[6]) < 1e-6  # computed vs discrete
        assert float(cells[7]) < 1e-2  # computed vs continuum (discretization gap)


def test_reproduce_table_json(tmp_path):
    rc, text = run(tmp_path, "reproduce", "--table", "2", "--format", "json", name="t2.json")
    assert rc == 0
    payload = json.loads(text)
    assert payload["oracle_match"] is True
    assert [r["label"] for r in payload["rows"]] == ["1", "2", "3", "4"]
    for r in payload["rows"]:
        assert r["err_vs_discrete"] < 1e-6


def test_usage_errors_exit_1(tmp_path, capsys):
    # argparse-level usage problems raise SystemExit(1) by design
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--problem", "box1d"])  # missing --ep
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["reproduce"])  # no selector
    assert exc.value.code == 1
    capsys.readouterr()

    def rc_of(*argv):
        code = main(list(argv))
        capsys.readouterr()
        return code

    assert rc_of("solve", "--problem", "torus", "--ep", "1") == 1
    assert rc_of("solve", "--problem", "box1d", "--ep", "0") == 1
    assert rc_of("solve", "--problem", "box1d", "--ep", "5", "--init", "a,b") == 1
    assert rc_of("solve", "--problem", "simple-matrix", "--ep", "1.6", "--init", "1,2") == 1
    assert rc_of("solve", "--problem", "simple-matrix", "--ep", "1.6", "--dx", "0.1") == 1
    assert rc_of("scan", "--problem", "box1d", "--ep-min", "0",
                 "--ep-max", "5", "--ep-step", "1") == 1
    assert rc_of("scan", "--problem", "box1d", "--ep-min", "1",
                 "--ep-max", "5", "--ep-step", "-1") == 1
    assert rc_of("scan", "--problem", "box1d", "--ep-min", "1",
                 "--ep-max", "5", "--ep-step", "1", "--workers", "0") == 1


def test_file_problem_errors_exit_1(tmp_path, capsys):
    x = np.arange(1, 50) * 0.02
    bad = x.copy()
    bad[10] += 1e-3
    path = tmp_path / "bad.csv"
    np.savetxt(path, np.column_stack([bad, x]), delimiter=",")
    assert main(["solve", "--problem", str(path), "--ep", "5"]) == 1
    good = tmp_path / "good.csv"
    np.savetxt(good, np.column_stack([x, x * x]), delimiter=",")
    assert main(["solve", "--problem", str(good), "--ep", "5", "--dx", "0.5"]) == 1
    err = capsys.readouterr().err
    assert "spacing" in err


def test_max_iterations_exit_2(tmp_path):
    rc, text = run(
        tmp_path, "solve", "--problem", "simple-matrix", "--ep", "1.6",
        "--m", "100", "--max-iter", "3",
    )
    assert rc == 2
    assert comments(text)["status"] == "max-iterations"


def test_unknown_problem_lists_catalog(capsys):
    assert main(["solve", "--problem", "torus", "--ep", "1"]) == 1
    err = capsys.readouterr().err
    assert "box1d" in err and "cubic" in err
