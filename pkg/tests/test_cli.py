import json
import subprocess
import sys

import pytest

from dmmsat.bench import BenchRecord, write_csv
from dmmsat.cli import main, sweep_spec_from_kv, sweep_spec_to_kv
from dmmsat.config import parse_kv
from dmmsat.dimacs import emit_dimacs
from dmmsat.instance import CnfFormula

from conftest import EXAMPLE_CLAUSES


@pytest.fixture
def example_cnf(tmp_path):
    p = tmp_path / "example.cnf"
    p.write_text(emit_dimacs(CnfFormula(3, EXAMPLE_CLAUSES)))
    return p


@pytest.fixture
def tiny_sat(tmp_path):
    p = tmp_path / "tiny.cnf"
    p.write_text("p cnf 3 1\n1 2 3 0\n")
    return p


# ---------------------------------------------------------------- generate

def test_generate_header_and_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["generate", "-n", "1000", "--rho", "1.25", "--seed", "7", "-o", str(a)]) == 0
    assert main(["generate", "-n", "1000", "--rho", "1.25", "--seed", "7", "-o", str(b)]) == 0
    cnf = (a / "d1000_s7.cnf").read_text()
    assert "p cnf 1000 5000" in cnf.splitlines()
    for ext in ("cnf", "xcnf", "json"):
        assert (a / f"d1000_s7.{ext}").read_bytes() == (b / f"d1000_s7.{ext}").read_bytes()


def test_generate_n9_rounding(tmp_path):
    assert main(["generate", "-n", "9", "--seed", "0", "-o", str(tmp_path)]) == 0
    meta = json.loads((tmp_path / "d9_s0.json").read_text())
    assert meta["m_xor"] == 11 and meta["m_cnf"] == 44
    assert meta["rho_cnf_exact"] == "44/9"


def test_generate_infeasible(tmp_path):
    assert main(["generate", "-n", "100", "--rho", "0.9", "-o", str(tmp_path)]) == 2


def test_generate_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["generate", "-n", "20", "-o", str(blocker / "sub")]) == 3


# ---------------------------------------------------------------- solve

@pytest.mark.parametrize("solver", ["dmm", "sls"])
def test_solve_tiny(solver, tiny_sat, capsys):
    assert main(["solve", "--solver", solver, str(tiny_sat)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["best_unsat"] == 0 and out["stop_reason"] == "ThresholdReached"


def test_solve_deterministic_and_outputs(tmp_path, capsys):
    assert main(["generate", "-n", "200", "--seed", "2", "-o", str(tmp_path)]) == 0
    cnf = str(tmp_path / "d200_s2.cnf")
    capsys.readouterr()
    outs = []
    for _ in range(2):
        code = main(["solve", "--solver", "dmm", "--seed", "1", "--max-steps", "500", cnf,
                     "--json", str(tmp_path / "r.json"), "--assignment", str(tmp_path / "a.txt")])
        assert code in (0, 1)
        d = json.loads(capsys.readouterr().out)
        d.pop("wall_time_s")
        d.pop("time_to_best_s", None)
        outs.append(d)
    assert outs[0] == outs[1]
    assert main(["verify", cnf, str(tmp_path / "a.txt")]) in (0, 1)
    assert int(capsys.readouterr().out) == outs[0]["best_unsat"]


def test_solve_sls_threshold_count(tmp_path, capsys):
    assert main(["generate", "-n", "1000", "--seed", "1", "-o", str(tmp_path)]) == 0
    capsys.readouterr()
    main(["solve", "--solver", "sls", "--noise", "0.5", "--max-flips", "1000", "--max-restarts", "1",
          str(tmp_path / "d1000_s1.cnf")])
    assert json.loads(capsys.readouterr().out)["threshold_count"] == 75


def test_solve_parse_error(tmp_path):
    bad = tmp_path / "bad.cnf"
    bad.write_text("p cnf 3 1\n1 q 0\n")
    assert main(["solve", str(bad)]) == 2


def test_solve_missing_file(tmp_path):
    assert main(["solve", str(tmp_path / "missing.cnf")]) == 3


def test_solve_nonfinite_exit(tmp_path, capsys):
    unsat = tmp_path / "u.cnf"
    unsat.write_text("p cnf 1 2\n1 0\n-1 0\n")
    # an uncapped memory that overflows to inf makes inf * 0 in the flow
    code = main(["solve", str(unsat), "--xl-max", "inf", "--alpha", "1e308", "--dt", "10",
                 "--threshold-fraction", "0", "--max-steps", "100"])
    assert code == 4
    assert "non-finite" in capsys.readouterr().err


def test_print_config_round_trip(tmp_path, capsys):
    assert main(["solve", "--print-config", "--alpha", "2.5", "--solver", "sls"]) == 0
    text = capsys.readouterr().out
    cfg = tmp_path / "cfg.txt"
    cfg.write_text(text)
    assert main(["solve", "--print-config", "--config", str(cfg)]) == 0
    assert capsys.readouterr().out == text
    assert parse_kv(text)["alpha"] == "2.5"


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("alpha = 2.0\nseed = 4\n")
    main(["solve", "--print-config", "--config", str(cfg), "--alpha", "3.0"])
    kv = parse_kv(capsys.readouterr().out)
    assert kv["alpha"] == "3.0" and kv["seed"] == "4"


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("alhpa = 2.0\n")
    assert main(["solve", "--print-config", "--config", str(cfg)]) == 2


# ---------------------------------------------------------------- verify

def test_verify_example(example_cnf, tmp_path, capsys):
    a = tmp_path / "a.txt"
    a.write_text("1 0 0\n")
    assert main(["verify", str(example_cnf), str(a)]) == 1
    assert capsys.readouterr().out.strip() == "1"


def test_verify_satisfying(tiny_sat, tmp_path, capsys):
    a = tmp_path / "a.txt"
    a.write_text("v 1 -2 -3 0\n")
    assert main(["verify", str(tiny_sat), str(a)]) == 0
    assert capsys.readouterr().out.strip() == "0"


def test_verify_bad_assignment(example_cnf, tmp_path, capsys):
    a = tmp_path / "a.txt"
    a.write_text("1 0\n0 7\n")
    assert main(["verify", str(example_cnf), str(a)]) == 2
    assert "line 2" in capsys.readouterr().err
    a.write_text("1 0\n")
    assert main(["verify", str(example_cnf), str(a)]) == 2


# ---------------------------------------------------------------- bench and fit

def write_linear_csv(path, ns=(250, 500, 1000, 2000)):
    recs = [BenchRecord("dmm", n, 5 * n, 0, 0.015, "ThresholdReached", 2.0 * n, 10, 3, 100) for n in ns]
    path.write_text(write_csv(recs))


def test_fit_linear(tmp_path, capsys):
    csv = tmp_path / "s.csv"
    write_linear_csv(csv)
    assert main(["fit", str(csv), "--model", "power_law", "--json"]) == 0
    (d,) = json.loads(capsys.readouterr().out)
    assert d["slope"] == pytest.approx(1.0) and d["r_squared"] == pytest.approx(1.0)
    assert main(["fit", str(csv)]) == 0
    assert "power_law" in capsys.readouterr().out


def test_fit_insufficient(tmp_path, capsys):
    csv = tmp_path / "s.csv"
    write_linear_csv(csv, ns=(250, 500))
    assert main(["fit", str(csv)]) == 5
    assert "InsufficientData" in capsys.readouterr().err


def test_bench_small(tmp_path, capsys):
    spec = tmp_path / "spec.txt"
    spec.write_text("solvers = dmm\nn_values = 250,500\nseeds_per_n = 2\nbudget = 10\ndmm.max_steps = 20\n")
    out = tmp_path / "out.csv"
    assert main(["bench", str(spec), "-o", str(out), "--quiet"]) == 0
    assert len(out.read_text().splitlines()) == 5
    assert main(["bench", str(spec), "-o", str(out), "--quiet"]) == 0
    assert len(out.read_text().splitlines()) == 5


def test_bench_spec_round_trip():
    spec = sweep_spec_from_kv({"n_values": "250,500", "dmm.alpha": "0.5", "sls.noise": "0.1"})
    assert spec.n_values == (250, 500) and spec.dmm.alpha == 0.5 and spec.sls.noise == 0.1
    again = sweep_spec_from_kv(parse_kv(sweep_spec_to_kv(spec)))
    assert again == spec


def test_bench_unknown_key(tmp_path):
    spec = tmp_path / "spec.txt"
    spec.write_text("n_valuez = 250\n")
    assert main(["bench", str(spec), "-o", str(tmp_path / "o.csv")]) == 2


def test_module_entry_point(tiny_sat):
    r = subprocess.run([sys.executable, "-m", "dmmsat", "solve", str(tiny_sat)], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["best_unsat"] == 0
