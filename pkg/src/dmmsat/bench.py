"""Time- and memory-to-threshold measurements and scaling fits.

A sweep runs every solver on delta-Max-E3SAT instances over a grid of N and
seeds, one CSV row per (solver, n, seed) cell. Scaling is then fitted on the
median time per N, either as a power law (regression of log t on log N) or
as an exponential (regression of log t on N).
"""

from __future__ import annotations

import csv
import io
import resource
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import dmm, localsearch
from .dimacs import emit_dimacs
from .errors import InsufficientData
from .instance import CnfFormula, delta_instance
from .result import StopReason, threshold_count
from .rng import STREAM_SWEEP, derive_seed

CSV_COLUMNS = [
    "solver", "n", "m", "seed", "threshold_fraction", "status", "time_to_threshold_s",
    "steps_or_flips", "best_unsat", "mem_model_bytes", "peak_rss_bytes",
]
SOLVERS = ("dmm", "sls")
MEMORY_OVERHEAD_BYTES = 4096
DEFAULT_GRID = (250, 500, 1000, 2000, 4000)


@dataclass
class BenchRecord:
    solver: str
    n: int
    m: int
    seed: int
    threshold_fraction: float
    status: str
    time_to_threshold: float | None
    steps_or_flips: int
    best_unsat: int
    mem_model_bytes: int
    peak_rss_bytes: int | None = None

    def __post_init__(self):
        if (self.time_to_threshold is not None) != (self.status == StopReason.THRESHOLD_REACHED.value):
            raise ValueError("time_to_threshold must be present exactly when the threshold was reached")

    @property
    def key(self):
        return (self.solver, self.n, self.seed, repr(float(self.threshold_fraction)))

    def to_row(self):
        return {
            "solver": self.solver,
            "n": str(self.n),
            "m": str(self.m),
            "seed": str(self.seed),
            "threshold_fraction": repr(float(self.threshold_fraction)),
            "status": self.status,
            "time_to_threshold_s": "" if self.time_to_threshold is None else repr(float(self.time_to_threshold)),
            "steps_or_flips": str(self.steps_or_flips),
            "best_unsat": str(self.best_unsat),
            "mem_model_bytes": str(self.mem_model_bytes),
            "peak_rss_bytes": "" if self.peak_rss_bytes is None else str(self.peak_rss_bytes),
        }

    @classmethod
    def from_row(cls, row):
        t = row["time_to_threshold_s"]
        rss = row["peak_rss_bytes"]
        return cls(
            solver=row["solver"],
            n=int(row["n"]),
            m=int(row["m"]),
            seed=int(row["seed"]),
            threshold_fraction=float(row["threshold_fraction"]),
            status=row["status"],
            time_to_threshold=float(t) if t != "" else None,
            steps_or_flips=int(row["steps_or_flips"]),
            best_unsat=int(row["best_unsat"]),
            mem_model_bytes=int(row["mem_model_bytes"]),
            peak_rss_bytes=int(rss) if rss != "" else None,
        )


def memory_model(f: CnfFormula) -> int:
    """Analytic DMM memory footprint in bytes.

    ``8 (N + 2M)`` for the state, the same again for the derivative buffers,
    ``8 L`` for the literal incidence (L literal occurrences) and a fixed
    :data:`MEMORY_OVERHEAD_BYTES`.
    """
    state = 8 * (f.n_vars + 2 * f.n_clauses)
    return 2 * state + 8 * f.n_literals + MEMORY_OVERHEAD_BYTES


def peak_rss_bytes():
    if sys.platform.startswith("linux"):
        return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
    if sys.platform == "darwin":
        return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    return None


def time_to_threshold(solver, f: CnfFormula, threshold_fraction=0.015, budget=60.0, seed=0,
                      dmm_params=None, sls_params=None) -> BenchRecord:
    """Run one solver under a wall-clock ``budget`` (seconds) and record the outcome.

    The clock starts at solver-state allocation; compilation of the kernels
    happens beforehand and is not counted.
    """
    if not budget > 0:
        raise ValueError("budget must be positive")
    if solver == "dmm":
        dmm.warm_up()
        r = dmm.solve_dmm(f, dmm_params or dmm.DmmParams(), threshold_fraction, seed, time_budget=budget)
    elif solver == "sls":
        localsearch.warm_up()
        base = sls_params or localsearch.SlsParams()
        p = localsearch.SlsParams(**{**asdict(base), "seed": seed, "threshold_fraction": threshold_fraction})
        r = localsearch.solve_sls(f, p, time_budget=budget)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    reached = r.stop_reason is StopReason.THRESHOLD_REACHED
    return BenchRecord(
        solver=solver,
        n=f.n_vars,
        m=f.n_clauses,
        seed=int(seed),
        threshold_fraction=float(threshold_fraction),
        status=r.stop_reason.value,
        time_to_threshold=r.time_to_best if reached else None,
        steps_or_flips=r.steps_total,
        best_unsat=r.best_unsat,
        mem_model_bytes=memory_model(f),
        peak_rss_bytes=peak_rss_bytes(),
    )


@dataclass
class SweepSpec:
    """Sweep configuration; every field can be set from a ``key=value`` file."""

    solvers: tuple = SOLVERS
    n_values: tuple = DEFAULT_GRID
    seeds_per_n: int = 5
    threshold_fraction: float = 0.015
    budget: float = 60.0
    rho_xor: float = 1.25
    base_seed: int = 0
    workers: int = 1
    dmm: dmm.DmmParams = field(default_factory=dmm.DmmParams)
    sls: localsearch.SlsParams = field(default_factory=localsearch.SlsParams)

    def instance_seed(self, n, index):
        return derive_seed(self.base_seed, STREAM_SWEEP, n, index)

    def cells(self):
        """``(solver, n, instance_seed)`` in canonical order: N, then seed, then solver."""
        out = []
        for n in self.n_values:
            for i in range(self.seeds_per_n):
                s = self.instance_seed(n, i)
                for solver in self.solvers:
                    out.append((solver, int(n), s))
        return out


def _run_cell(args):
    spec, solver, n, seed = args
    try:
        f = delta_instance(n, seed, spec.rho_xor)
        return time_to_threshold(solver, f, spec.threshold_fraction, spec.budget, seed, spec.dmm, spec.sls)
    except Exception as exc:  # a failed cell is recorded, the sweep continues
        m = 4 * round(spec.rho_xor * n)
        return BenchRecord(solver, n, m, seed, spec.threshold_fraction, f"Failed:{type(exc).__name__}",
                           None, 0, -1, 0, None)


def write_csv(records, path=None, append=False):
    """Write records with the header; returns the text when ``path`` is None."""
    if path is None:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow(r.to_row())
        return buf.getvalue()
    path = Path(path)
    new = not (append and path.exists() and path.stat().st_size > 0)
    with open(path, "a" if append else "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        if new:
            w.writeheader()
        for r in records:
            w.writerow(r.to_row())


def read_csv(path_or_text):
    """Parse sweep CSV from a path or from CSV text."""
    if isinstance(path_or_text, Path) or (isinstance(path_or_text, str) and "\n" not in path_or_text):
        text = Path(path_or_text).read_text()
    else:
        text = path_or_text
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is not None and list(reader.fieldnames) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV columns {reader.fieldnames}")
    return [BenchRecord.from_row(row) for row in reader]


def run_sweep(spec: SweepSpec, out_csv=None, progress=None):
    """Run every cell of ``spec``, appending one CSV row per finished cell.

    Cells whose ``(solver, n, seed, threshold_fraction)`` already appear in
    ``out_csv`` are skipped, so an interrupted sweep resumes where it
    stopped. Returns the records of all cells, old and new, in canonical order.
    """
    done = {}
    if out_csv is not None and Path(out_csv).exists() and Path(out_csv).stat().st_size > 0:
        for r in read_csv(Path(out_csv)):
            done[r.key] = r
    tf = repr(float(spec.threshold_fraction))
    todo = [c for c in spec.cells() if (c[0], c[1], c[2], tf) not in done]
    results = dict(done)

    def finish(rec):
        results[rec.key] = rec
        if out_csv is not None:
            write_csv([rec], out_csv, append=True)
        if progress is not None:
            progress(rec)

    if spec.workers <= 1:
        for solver, n, seed in todo:
            finish(_run_cell((spec, solver, n, seed)))
    else:
        with ProcessPoolExecutor(max_workers=spec.workers) as ex:
            # map preserves submission order, so rows are written in canonical order
            for rec in ex.map(_run_cell, [(spec, s, n, sd) for s, n, sd in todo]):
                finish(rec)
    return [results[(s, n, sd, tf)] for s, n, sd in spec.cells() if (s, n, sd, tf) in results]


@dataclass
class ScalingFit:
    model: str
    slope: float
    intercept: float
    r_squared: float
    n_points: int

    def predict(self, n):
        n = np.asarray(n, dtype=float)
        x = np.log(n) if self.model == "power_law" else n
        return np.exp(self.intercept + self.slope * x)

    def to_dict(self):
        return asdict(self)


def median_times(records, solver=None):
    """Median time-to-threshold per N over cells that reached the threshold.

    Returns ``(n_values, medians)`` sorted by N; censored cells are skipped.
    """
    by_n = {}
    for r in records:
        if solver is not None and r.solver != solver:
            continue
        if r.time_to_threshold is None:
            continue
        by_n.setdefault(r.n, []).append(r.time_to_threshold)
    ns = sorted(by_n)
    return np.array(ns, dtype=float), np.array([float(np.median(by_n[n])) for n in ns])


def censoring_by_n(records, solver=None):
    """Fraction of cells per N that did not reach the threshold, as ``{n: fraction}``."""
    tot, cens = {}, {}
    for r in records:
        if solver is not None and r.solver != solver:
            continue
        tot[r.n] = tot.get(r.n, 0) + 1
        cens[r.n] = cens.get(r.n, 0) + (r.time_to_threshold is None)
    return {n: cens[n] / tot[n] for n in sorted(tot)}


def _linfit(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res <= 1e-24 else 0.0
    else:
        r2 = min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    return float(slope), float(intercept), r2


def fit_points(ns, ts, model="power_law"):
    """Fit already-aggregated ``(N, t)`` points."""
    ns = np.asarray(ns, dtype=float)
    ts = np.asarray(ts, dtype=float)
    if ns.size < 3:
        raise InsufficientData(f"need at least 3 aggregated points, got {ns.size}")
    if np.any(ts <= 0) or np.any(ns <= 0):
        raise ValueError("times and sizes must be positive")
    y = np.log(ts)
    if model == "power_law":
        x = np.log(ns)
    elif model == "exponential":
        x = ns
    else:
        raise ValueError(f"unknown model {model!r}")
    slope, intercept, r2 = _linfit(x, y)
    return ScalingFit(model, slope, intercept, r2, int(ns.size))


def fit_scaling(records, model="power_law", solver=None) -> ScalingFit:
    """Fit median time-to-threshold against N.

    Raises
    ------
    InsufficientData
        Fewer than 3 distinct N with at least one cell that reached the threshold.
    """
    ns, ts = median_times(records, solver)
    return fit_points(ns, ts, model)


def classify_scaling(records, solver=None):
    """Fit both models; returns ``(better_model, {model: ScalingFit})``."""
    fits = {m: fit_scaling(records, m, solver) for m in ("power_law", "exponential")}
    better = "power_law" if fits["power_law"].r_squared >= fits["exponential"].r_squared else "exponential"
    return better, fits


def input_size_bytes(f: CnfFormula) -> int:
    """Size of the DIMACS text of ``f``, used as the input-size reference."""
    return len(emit_dimacs(f).encode())


def format_fits(records):
    """Aligned text summary of both fits for every solver present."""
    lines = [f"{'solver':<6} {'model':<12} {'slope':>12} {'intercept':>12} {'r2':>8} {'points':>6}"]
    for solver in sorted({r.solver for r in records}):
        for model in ("power_law", "exponential"):
            try:
                ft = fit_scaling(records, model, solver)
            except InsufficientData:
                lines.append(f"{solver:<6} {model:<12} {'insufficient data':>40}")
                continue
            lines.append(f"{solver:<6} {model:<12} {ft.slope:>12.6g} {ft.intercept:>12.6g} {ft.r_squared:>8.4f} {ft.n_points:>6}")
    return "\n".join(lines)
