"""End-to-end tests of the command-line interface, run in process."""

import json

import pytest

from puboanneal import cli
from puboanneal.sat import read_dimacs


def run(argv):
    return cli.main(argv)


def read_json(path):
    return json.loads(path.read_text())


@pytest.fixture
def cnf_path(tmp_path):
    out = tmp_path / "f.cnf"
    assert run(["generate", "--gen", "toughsat", "--n", "4", "--seed", "6",
                "--require-unique", "--out", str(out)]) == 0
    return out


# ---------------------------------------------------------------------------
# generate


def test_generate_critical_clause_count(tmp_path):
    out = tmp_path / "g.cnf"
    assert run(["generate", "--gen", "toughsat", "--n", "6",
                "--m-rule", "critical", "--seed", "0", "--out", str(out)]) == 0
    f = read_dimacs(out.read_text())
    assert f.n_vars == 6 and f.n_clauses == 25
    assert out.read_text().startswith("c config:")


def test_generate_planted_sidecar(tmp_path):
    out = tmp_path / "p.cnf"
    side = tmp_path / "p.json"
    assert run(["generate", "--gen", "uniquept1", "--n", "5", "--seed", "3",
                "--out", str(out), "--planted-out", str(side)]) == 0
    data = read_json(side)
    assert set(data["planted"]) <= {0, 1}
    assert len(data["planted"]) == 5


def test_generate_reproducible_bytes(tmp_path):
    a, b = tmp_path / "a.cnf", tmp_path / "b.cnf"
    argv = ["generate", "--gen", "toughsat", "--n", "6", "--seed", "11"]
    assert run(argv + ["--out", str(a)]) == 0
    assert run(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


# ---------------------------------------------------------------------------
# encode / reduce / gap pipeline


def test_full_pipeline(tmp_path, cnf_path):
    enc = tmp_path / "enc.json"
    red = tmp_path / "red.json"
    assert run(["encode", "--in", str(cnf_path), "--out", str(enc)]) == 0
    data = read_json(enc)
    assert data["kind"] == "pubo-encoding"
    assert data["declared_degree"] == 3

    assert run(["reduce", "--in", str(enc), "--out", str(red)]) == 0
    rdata = read_json(red)
    assert rdata["kind"] == "quadratization"
    assert rdata["n_ancillas"] >= 1

    gp = tmp_path / "gap_p.json"
    gq = tmp_path / "gap_q.json"
    assert run(["gap", "--in", str(enc), "--form", "pubo",
                "--out", str(gp)]) == 0
    assert run(["gap", "--in", str(red), "--form", "qubo",
                "--out", str(gq)]) == 0
    pubo = read_json(gp)
    qubo = read_json(gq)
    assert pubo["formulation"] == "pubo" and qubo["formulation"] == "qubo"
    assert qubo["n_spins"] > pubo["n_spins"]
    assert qubo["min_gap"] < pubo["min_gap"]
    assert pubo["warnings"] == []


def test_gap_accepts_dimacs_directly(tmp_path, cnf_path):
    out = tmp_path / "gap.json"
    assert run(["gap", "--in", str(cnf_path), "--out", str(out)]) == 0
    data = read_json(out)
    assert data["min_gap"] > 0.0
    assert 0.0 < data["s_min"] < 1.0


def test_gap_points_csv(tmp_path, cnf_path):
    out = tmp_path / "gap.json"
    pts = tmp_path / "points.csv"
    assert run(["gap", "--in", str(cnf_path), "--grid", "21",
                "--out", str(out), "--points-out", str(pts)]) == 0
    lines = pts.read_text().strip().splitlines()
    assert lines[0].startswith("# config:")
    assert lines[1] == "s,e0,e1,degeneracy_1,v_element"
    assert len(lines) == 2 + 21


# ---------------------------------------------------------------------------
# scans


def test_scan_lambda_csv(tmp_path, cnf_path):
    out = tmp_path / "lam.csv"
    assert run(["scan-lambda", "--in", str(cnf_path),
                "--lambdas", "0.05,1,2", "--no-sweep",
                "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    header = lines[1].split(",")
    assert header[:4] == ["lambda", "min_gap", "s_min", "ground_feasible"]
    rows = [ln.split(",") for ln in lines[2:]]
    assert [r[3] for r in rows] == ["0", "1", "1"]


def test_scan_driving_csv(tmp_path, cnf_path):
    out = tmp_path / "drive.csv"
    assert run(["scan-driving", "--in", str(cnf_path),
                "--hx-values", "0.5,1,2", "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[1].split(",")[0] == "hx_over_J"
    assert len(lines) == 2 + 3
    for row in lines[2:]:
        cells = [float(v) for v in row.split(",")]
        gap, predicted = cells[1], cells[7]
        assert abs(predicted - gap) <= 1e-6 * gap


# ---------------------------------------------------------------------------
# ensemble / fit / speedup chain


def test_ensemble_fit_speedup_chain(tmp_path):
    ens = tmp_path / "ens.csv"
    assert run(["ensemble", "--gen", "uniquept1", "--n", "4", "--count", "8",
                "--seed", "2", "--out", str(ens)]) == 0
    text = ens.read_text()
    assert text.splitlines()[1] == (
        "generator,N,formulation,instance_seed,min_gap,V,T,n_ancillas"
    )

    # three sizes so the fit has enough support
    for n in (5, 6):
        extra = tmp_path / f"ens{n}.csv"
        assert run(["ensemble", "--gen", "uniquept1", "--n", str(n),
                    "--count", "8", "--seed", "2", "--out", str(extra)]) == 0
        text += "".join(
            ln + "\n" for ln in extra.read_text().splitlines()
            if not (ln.startswith("#") or ln.startswith("generator"))
        )
    merged = tmp_path / "merged.csv"
    merged.write_text(text)

    fit = tmp_path / "fit.json"
    assert run(["fit", "--in", str(merged), "--out", str(fit)]) == 0
    fdata = read_json(fit)
    assert fdata["n_values"] == [4, 5, 6]
    assert fdata["epsilon_over_j"] > 0.0

    sp = tmp_path / "speedup.json"
    assert run(["speedup", "--fit-p", str(fit), "--fit-q", str(fit),
                "--j3j2", "1", "--vqvp", "1", "--n", "8",
                "--out", str(sp)]) == 0
    sdata = read_json(sp)
    assert sdata["ratio_at_n"] == pytest.approx(1.0)


def test_ensemble_reproducible_bytes(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["ensemble", "--gen", "uniquept4", "--n", "4", "--count", "5",
            "--seed", "3"]
    assert run(argv + ["--out", str(a)]) == 0
    assert run(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


# ---------------------------------------------------------------------------
# synthesis / resources / correlate


def test_synth_verify(tmp_path):
    out = tmp_path / "synth.json"
    circ = tmp_path / "circ.txt"
    assert run(["synth-verify", "--theta", "0.7", "--out", str(out),
                "--circuit-out", str(circ)]) == 0
    data = read_json(out)
    assert data["zzz"]["pass"] is True
    assert data["expansion"]["two_qubit_count"] == 4
    assert data["expansion"]["overhead_ratio"] == pytest.approx(0.25)
    assert any(r["pass"] for r in data["cnot"]["reports"])
    assert "RZZ" in circ.read_text()


def test_resources_from_cnf(tmp_path, cnf_path):
    out = tmp_path / "res.json"
    assert run(["resources", "--in", str(cnf_path), "--out", str(out)]) == 0
    data = read_json(out)
    assert data["pubo_qubits"] == 4
    assert data["mis_qubits"] == 3 * 17


def test_resources_from_counts(tmp_path):
    out = tmp_path / "res.json"
    assert run(["resources", "--n", "6", "--m-rule", "critical",
                "--out", str(out)]) == 0
    data = read_json(out)
    assert data["pubo_qubits"] == 6
    assert data["slack_qubo_qubits_max"] == 31
    assert data["mis_qubits"] == 75
    assert data["ilp_qubits"] == 81


def test_correlate_small_run(tmp_path):
    out = tmp_path / "corr.json"
    pairs = tmp_path / "pairs.csv"
    assert run(["correlate", "--n", "4", "--m-rule", "critical",
                "--count", "100", "--seed", "5",
                "--out", str(out), "--pairs-out", str(pairs)]) == 0
    data = read_json(out)
    assert data["count"] == 100
    assert -1.0 <= data["pearson_r"] <= 1.0
    lo, hi = data["abs_r_ci95"]
    assert 0.0 <= lo <= hi <= 1.0
    lines = pairs.read_text().strip().splitlines()
    assert len(lines) == 2 + 100


# ---------------------------------------------------------------------------
# error handling and exit codes


def test_missing_input_file_is_io_error(tmp_path, capsys):
    code = run(["encode", "--in", str(tmp_path / "nope.cnf"),
                "--out", str(tmp_path / "x.json")])
    assert code == 1
    err = json.loads(capsys.readouterr().err)
    assert err["code"] == 1


def test_malformed_dimacs_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cnf"
    bad.write_text("p cnf 3 1\n1 2 0\n")
    code = run(["gap", "--in", str(bad), "--out", "-"])
    assert code == 4
    assert json.loads(capsys.readouterr().err)["error"] == "FormatError"


def test_semantic_usage_error(tmp_path, capsys):
    out = tmp_path / "x.cnf"
    code = run(["generate", "--gen", "uniquept1", "--n", "5",
                "--m", "9", "--out", str(out)])
    assert code == 2


def test_size_limit_exit_code(tmp_path, cnf_path, capsys):
    code = run(["gap", "--in", str(cnf_path), "--max-qubits", "2",
                "--out", "-"])
    assert code == 3
    assert json.loads(capsys.readouterr().err)["error"] == "SizeLimitError"


def test_normalization_exit_code(tmp_path, capsys):
    cnf = tmp_path / "pt4.cnf"
    assert run(["generate", "--gen", "uniquept4", "--n", "4", "--seed", "1",
                "--out", str(cnf)]) == 0
    code = run(["gap", "--in", str(cnf), "--form", "qubo", "--out", "-"])
    assert code == 7
    assert json.loads(capsys.readouterr().err)["error"] == "NormalizationError"


def test_stdout_output(capsys):
    assert run(["resources", "--n", "5", "--m", "10", "--out", "-"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["pubo_qubits"] == 5
