import itertools

import numpy as np
import pytest

from dmmsat.bench import (
    CSV_COLUMNS, MEMORY_OVERHEAD_BYTES, BenchRecord, SweepSpec, censoring_by_n, classify_scaling,
    fit_points, fit_scaling, format_fits, median_times, memory_model, read_csv, run_sweep,
    time_to_threshold, write_csv,
)
from dmmsat.dmm import DmmParams
from dmmsat.errors import InsufficientData
from dmmsat.instance import CnfFormula, delta_instance
from dmmsat.localsearch import SlsParams


def rec(solver, n, seed, t, status=None):
    status = status or ("ThresholdReached" if t is not None else "BudgetExhausted")
    return BenchRecord(solver, n, 5 * n, seed, 0.015, status, t, 100, 3, 1000, None)


def synthetic(ns, fn, solver="dmm"):
    return [rec(solver, n, 0, float(fn(n))) for n in ns]


# ---------------------------------------------------------------- memory

def test_memory_model_n1000():
    f = delta_instance(1000, seed=7)
    assert (f.n_vars, f.n_clauses, f.n_literals) == (1000, 5000, 15000)
    assert memory_model(f) == 296000 + MEMORY_OVERHEAD_BYTES


def test_memory_model_linear_in_n():
    ns = [400, 800, 1600, 3200]  # 1.25 N integral, so M = 5 N exactly
    mem = [memory_model(delta_instance(n, seed=1)) for n in ns]
    steps = np.diff(mem) / np.diff(ns)
    assert np.all(steps == steps[0])  # 16 (1 + 10) + 8 * 15 bytes per variable
    assert steps[0] == 16 * 11 + 120


# ---------------------------------------------------------------- records

def test_record_time_iff_reached():
    with pytest.raises(ValueError):
        BenchRecord("dmm", 10, 50, 0, 0.015, "ThresholdReached", None, 1, 0, 1)
    with pytest.raises(ValueError):
        BenchRecord("dmm", 10, 50, 0, 0.015, "BudgetExhausted", 1.0, 1, 0, 1)


@pytest.mark.parametrize("solver", ["dmm", "sls"])
def test_time_to_threshold_tiny(solver):
    f = CnfFormula(3, [[1, 2, 3]])
    r = time_to_threshold(solver, f, 0.015, 5.0, seed=0)
    assert r.status == "ThresholdReached"
    assert r.time_to_threshold < 1.0
    assert r.best_unsat == 0


def test_time_to_threshold_n1000_record():
    f = delta_instance(1000, seed=3)
    r = time_to_threshold("dmm", f, 0.015, 60.0, seed=0, dmm_params=DmmParams(max_steps=200))
    assert r.m == 5000 and r.n == 1000
    assert r.mem_model_bytes == memory_model(f)
    assert r.steps_or_flips == 200 and r.status == "BudgetExhausted"
    again = time_to_threshold("dmm", f, 0.015, 60.0, seed=0, dmm_params=DmmParams(max_steps=200))
    assert (again.steps_or_flips, again.best_unsat) == (r.steps_or_flips, r.best_unsat)


def test_time_to_threshold_rejects_bad_input():
    f = CnfFormula(3, [[1, 2, 3]])
    with pytest.raises(ValueError):
        time_to_threshold("dmm", f, budget=0)
    with pytest.raises(ValueError):
        time_to_threshold("cdcl", f)


# ---------------------------------------------------------------- csv

def test_csv_header_and_round_trip():
    records = [rec("dmm", 250, 1, 0.5), rec("sls", 250, 1, None), rec("dmm", 500, 2, 1.25)]
    text = write_csv(records)
    assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
    assert text.splitlines()[2].split(",")[6] == ""  # absent time is an empty field
    assert read_csv(text) == records


def test_csv_rejects_wrong_columns():
    with pytest.raises(ValueError):
        read_csv("solver,n\ndmm,1\n")


# ---------------------------------------------------------------- sweep

def quick_spec(**kw):
    base = dict(solvers=("dmm",), n_values=(250, 500), seeds_per_n=2, budget=30.0,
                dmm=DmmParams(max_steps=50), sls=SlsParams(max_flips=500, max_restarts=1))
    base.update(kw)
    return SweepSpec(**base)


def test_sweep_cardinality_and_resume(tmp_path):
    out = tmp_path / "sweep.csv"
    recs = run_sweep(quick_spec(), out)
    assert len(recs) == 4
    assert len(out.read_text().splitlines()) == 5
    assert read_csv(out) == recs
    again = run_sweep(quick_spec(), out)
    assert again == recs
    assert len(out.read_text().splitlines()) == 5  # nothing appended


def test_sweep_resumes_partial(tmp_path):
    out = tmp_path / "sweep.csv"
    full = run_sweep(quick_spec(), None)
    write_csv(full[:1], out)
    seen = []
    run_sweep(quick_spec(), out, progress=seen.append)
    assert len(seen) == 3
    assert [(r.solver, r.n, r.seed) for r in read_csv(out)] == [(r.solver, r.n, r.seed) for r in full]


def test_default_spec_has_50_cells():
    assert len(SweepSpec().cells()) == 50


def test_sweep_fresh_seed_per_cell():
    seeds = [s for _, _, s in SweepSpec(solvers=("dmm",)).cells()]
    assert len(set(seeds)) == len(seeds)


def test_sweep_records_failed_cell():
    spec = quick_spec(n_values=(4,), seeds_per_n=1)  # too small for the generator
    (r,) = run_sweep(spec)
    assert r.status.startswith("Failed") and r.time_to_threshold is None


# ---------------------------------------------------------------- fits

def test_fit_exact_linear():
    ft = fit_scaling(synthetic([250, 500, 1000, 2000], lambda n: 2 * n), "power_law")
    assert ft.slope == pytest.approx(1.0, rel=1e-6)
    assert ft.intercept == pytest.approx(np.log(2), rel=1e-6)
    assert ft.r_squared == pytest.approx(1.0)
    assert ft.n_points == 4


def test_fit_exact_exponential():
    recs = synthetic([250, 500, 1000, 2000], lambda n: 0.01 * np.exp(0.005 * n))
    better, fits = classify_scaling(recs)
    assert fits["exponential"].slope == pytest.approx(0.005, rel=1e-6)
    assert fits["exponential"].intercept == pytest.approx(np.log(0.01), rel=1e-6)
    assert fits["exponential"].r_squared == pytest.approx(1.0)
    assert fits["power_law"].r_squared < fits["exponential"].r_squared
    assert better == "exponential"


def test_fit_constant_time():
    ft = fit_scaling(synthetic([250, 500, 1000], lambda n: 3.0), "power_law")
    assert ft.slope == pytest.approx(0.0, abs=1e-12)
    assert 0.0 <= ft.r_squared <= 1.0


def test_fit_insufficient_data():
    with pytest.raises(InsufficientData):
        fit_scaling(synthetic([250, 500], lambda n: n))
    # censored cells do not count as points
    recs = synthetic([250, 500], lambda n: n) + [rec("dmm", 1000, 0, None)]
    with pytest.raises(InsufficientData):
        fit_scaling(recs)


def test_fit_points_rejects_unknown_model():
    with pytest.raises(ValueError):
        fit_points([1, 2, 3], [1, 2, 3], "quadratic")


def test_median_ignores_censored_and_order():
    recs = [rec("dmm", 250, s, t) for s, t in enumerate([1.0, 3.0, None, 2.0])]
    recs += [rec("dmm", 500, s, t) for s, t in enumerate([5.0, 4.0])]
    recs += [rec("sls", 250, 0, 99.0)]
    ns, ts = median_times(recs, "dmm")
    assert ns.tolist() == [250, 500] and ts.tolist() == [2.0, 4.5]
    rng = np.random.default_rng(0)
    for _ in range(10):
        perm = [recs[i] for i in rng.permutation(len(recs))]
        ns2, ts2 = median_times(perm, "dmm")
        assert ns2.tolist() == ns.tolist() and ts2.tolist() == ts.tolist()


def test_censoring_fraction():
    recs = [rec("sls", 250, 0, 1.0), rec("sls", 250, 1, None), rec("sls", 500, 0, None)]
    assert censoring_by_n(recs, "sls") == {250: 0.5, 500: 1.0}


def test_format_fits_lists_each_solver():
    recs = synthetic([250, 500, 1000], lambda n: n) + synthetic([250, 500], lambda n: n, "sls")
    text = format_fits(recs)
    assert "dmm" in text and "insufficient data" in text
    assert len(text.splitlines()) == 5


def test_fit_recovers_parameters_permutation_invariant():
    recs = list(itertools.chain.from_iterable(
        [rec("dmm", n, s, 0.5 * n ** 1.3) for s in range(3)] for n in (250, 500, 1000, 2000)))
    a = fit_scaling(recs)
    b = fit_scaling(recs[::-1])
    assert a == b
    assert a.slope == pytest.approx(1.3, rel=1e-6)
