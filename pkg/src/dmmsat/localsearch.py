"""WalkSAT/SKC stochastic local search, the baseline the DMM is compared with.

Each flip picks a uniformly random unsatisfied clause. If one of its
variables can be flipped without breaking any other clause, the lowest such
variable index is flipped; otherwise with probability ``noise`` a uniformly
random variable of the clause is flipped, and with probability ``1 - noise``
the variable with the smallest break count (lowest index on ties).

Uniform variates come from the Philox stream of the seed in fixed blocks, so
the flip sequence is a pure function of ``(formula, params)``.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, fields

import numba
import numpy as np

from .instance import CnfFormula, _as_bits
from .result import SolveResult, StopReason, threshold_count
from .rng import STREAM_SLS, make_rng

RANDOM_BLOCK = 1 << 15
FLIP_CHUNK = 1 << 14
SAMPLE_EVERY = 1000
TRAJ_BUFFER = 4096

# kernel exit codes
_DONE_THRESHOLD = 0
_DONE_RESTART = 1
_NEED_RANDOMS = 2
_TRAJ_FULL = 3
_CHUNK_END = 4


@dataclass(frozen=True)
class SlsParams:
    """WalkSAT parameters. ``max_flips=None`` means ``100 * N``."""

    noise: float = 0.5
    max_flips: int | None = None
    max_restarts: int = 100
    seed: int = 0
    threshold_fraction: float = 0.015

    def __post_init__(self):
        if not 0 <= self.noise <= 1:
            raise ValueError("noise must lie in [0, 1]")
        if self.max_flips is not None and self.max_flips < 1:
            raise ValueError("max_flips must be at least 1")
        if self.max_restarts < 1:
            raise ValueError("max_restarts must be at least 1")
        if not 0 <= self.threshold_fraction <= 1:
            raise ValueError("threshold_fraction must lie in [0, 1]")

    def resolved_max_flips(self, n_vars):
        return int(self.max_flips) if self.max_flips is not None else 100 * max(n_vars, 1)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


def break_count(f: CnfFormula, bits, var: int) -> int:
    """Clauses that become unsatisfied if the 1-based variable ``var`` flips."""
    b = _as_bits(bits, f.n_vars)
    lit_true = b[f.var_index] != (f.lits < 0)
    n_true = np.add.reduceat(lit_true.astype(np.int64), f.ptr[:-1])
    count = 0
    for c, negated in f.occurrences(var):
        if b[var - 1] != negated and n_true[c] == 1:
            count += 1
    return count


@numba.njit(cache=True)
def _init_counts(ptr, var, neg, x, numtrue, ulist, upos):
    nunsat = 0
    for m in range(ptr.shape[0] - 1):
        t = 0
        for k in range(ptr[m], ptr[m + 1]):
            if x[var[k]] != neg[k]:
                t += 1
        numtrue[m] = t
        if t == 0:
            ulist[nunsat] = m
            upos[m] = nunsat
            nunsat += 1
        else:
            upos[m] = -1
    return nunsat


@numba.njit(cache=True)
def _break(i, x, occ_ptr, occ_clause, occ_neg, numtrue):
    b = 0
    for k in range(occ_ptr[i], occ_ptr[i + 1]):
        if x[i] != occ_neg[k] and numtrue[occ_clause[k]] == 1:
            b += 1
    return b


@numba.njit(cache=True)
def _walk(ptr, var, neg, occ_ptr, occ_clause, occ_neg,
          x, numtrue, ulist, upos, state, u, noise, target,
          restart_limit, chunk_limit, best_x, traj_step, traj_val, flips_out):
    """Run flips until an exit condition; returns an exit code.

    ``state`` = [nunsat, u_index, flips_total, flips_in_restart, best, step_of_best,
    n_traj, best_changed, n_flip_log]; updated in place.
    """
    nunsat = state[0]
    ui = state[1]
    flips = state[2]
    rflips = state[3]
    best = state[4]
    n_traj = state[6]
    n_log = state[8]
    done_here = 0
    code = _CHUNK_END
    while True:
        if nunsat <= target:
            code = _DONE_THRESHOLD
            break
        if rflips >= restart_limit:
            code = _DONE_RESTART
            break
        if done_here >= chunk_limit:
            code = _CHUNK_END
            break
        if ui + 3 > u.shape[0]:
            code = _NEED_RANDOMS
            break
        if n_traj + 2 > traj_step.shape[0]:
            code = _TRAJ_FULL
            break
        c = ulist[int(u[ui] * nunsat)]
        ui += 1
        lo = ptr[c]
        hi = ptr[c + 1]
        pick = -1
        for k in range(lo, hi):
            i = var[k]
            if _break(i, x, occ_ptr, occ_clause, occ_neg, numtrue) == 0:
                if pick < 0 or i < pick:
                    pick = i
        if pick < 0:
            r = u[ui]
            ui += 1
            if r < noise:
                k = lo + int(u[ui] * (hi - lo))
                ui += 1
                pick = var[k]
            else:
                bmin = 1 << 62
                for k in range(lo, hi):
                    i = var[k]
                    b = _break(i, x, occ_ptr, occ_clause, occ_neg, numtrue)
                    if b < bmin or (b == bmin and i < pick):
                        bmin = b
                        pick = i
        if n_log < flips_out.shape[0]:
            flips_out[n_log] = pick
            n_log += 1
        x[pick] = 1 - x[pick]
        for k in range(occ_ptr[pick], occ_ptr[pick + 1]):
            cl = occ_clause[k]
            if x[pick] != occ_neg[k]:
                numtrue[cl] += 1
                if numtrue[cl] == 1:
                    # remove from unsat list by swapping in the last entry
                    p = upos[cl]
                    last = ulist[nunsat - 1]
                    ulist[p] = last
                    upos[last] = p
                    upos[cl] = -1
                    nunsat -= 1
            else:
                numtrue[cl] -= 1
                if numtrue[cl] == 0:
                    ulist[nunsat] = cl
                    upos[cl] = nunsat
                    nunsat += 1
        flips += 1
        rflips += 1
        done_here += 1
        if nunsat < best:
            best = nunsat
            state[5] = flips
            for j in range(x.shape[0]):
                best_x[j] = x[j]
            traj_step[n_traj] = flips
            traj_val[n_traj] = best
            n_traj += 1
        elif flips % 1000 == 0:
            traj_step[n_traj] = flips
            traj_val[n_traj] = best
            n_traj += 1
    state[0] = nunsat
    state[1] = ui
    state[2] = flips
    state[3] = rflips
    state[4] = best
    state[6] = n_traj
    state[8] = n_log
    return code


class _Walker:
    def __init__(self, f: CnfFormula):
        self.f = f
        self.ptr = np.ascontiguousarray(f.ptr, dtype=np.int64)
        self.var = np.ascontiguousarray(f.var_index, dtype=np.int64)
        self.neg = (f.lits < 0).astype(np.uint8)
        occ_ptr, occ_clause, occ_neg = f.occurrence_index()
        self.occ_ptr = np.ascontiguousarray(occ_ptr, dtype=np.int64)
        self.occ_clause = np.ascontiguousarray(occ_clause, dtype=np.int64)
        self.occ_neg = occ_neg.astype(np.uint8)
        m = f.n_clauses
        self.numtrue = np.zeros(m, dtype=np.int64)
        self.ulist = np.zeros(max(m, 1), dtype=np.int64)
        self.upos = np.zeros(m, dtype=np.int64)

    def reset(self, x):
        return _init_counts(self.ptr, self.var, self.neg, x, self.numtrue, self.ulist, self.upos)


def warm_up():
    """Compile the kernels ahead of any timed run."""
    solve_sls(CnfFormula(3, [[1, 2, 3], [-1, -2], [2, -3]]), SlsParams(max_flips=50, max_restarts=2, threshold_fraction=0))


def solve_sls(f: CnfFormula, p: SlsParams | None = None, time_budget: float | None = None,
              flip_log: np.ndarray | None = None) -> SolveResult:
    """WalkSAT/SKC with restarts, stopping at ``floor(threshold_fraction * M)`` unsat.

    ``flip_log``, if given, receives the 0-based variable index of each flip
    until it is full (for instrumentation).
    """
    p = p or SlsParams()
    target = threshold_count(p.threshold_fraction, f.n_clauses)
    max_flips = p.resolved_max_flips(f.n_vars)
    t0 = time.perf_counter()
    rng = make_rng(p.seed, STREAM_SLS)
    w = _Walker(f)
    n = f.n_vars
    best_x = np.zeros(n, dtype=np.uint8)
    traj_step = np.zeros(TRAJ_BUFFER, dtype=np.int64)
    traj_val = np.zeros(TRAJ_BUFFER, dtype=np.int64)
    log = flip_log if flip_log is not None else np.zeros(0, dtype=np.int64)
    # nunsat, u_index, flips_total, flips_in_restart, best, step_of_best, n_traj, -, n_log
    state = np.zeros(9, dtype=np.int64)
    state[4] = f.n_clauses + 1
    trajectory = []
    time_to_best = 0.0
    reason = StopReason.BUDGET_EXHAUSTED
    u = rng.random(RANDOM_BLOCK)
    state[1] = 0
    out_of_time = False

    for _ in range(p.max_restarts):
        x = (rng.random(n) < 0.5).astype(np.uint8)
        state[0] = w.reset(x)
        state[3] = 0
        if state[0] < state[4]:
            state[4] = state[0]
            state[5] = state[2]
            best_x[:] = x
            trajectory.append((int(state[2]), int(state[0])))
            time_to_best = time.perf_counter() - t0
        while True:
            prev_best = state[4]
            code = _walk(w.ptr, w.var, w.neg, w.occ_ptr, w.occ_clause, w.occ_neg,
                         x, w.numtrue, w.ulist, w.upos, state, u, p.noise, target,
                         max_flips, FLIP_CHUNK, best_x, traj_step, traj_val, log)
            if state[4] < prev_best:
                time_to_best = time.perf_counter() - t0
            k = int(state[6])
            trajectory.extend(zip(traj_step[:k].tolist(), traj_val[:k].tolist()))
            state[6] = 0
            if code == _NEED_RANDOMS:
                u = rng.random(RANDOM_BLOCK)
                state[1] = 0
            elif code == _DONE_THRESHOLD or code == _DONE_RESTART:
                break
            if time_budget is not None and time.perf_counter() - t0 > time_budget:
                out_of_time = True
                break
        if code == _DONE_THRESHOLD:
            reason = StopReason.THRESHOLD_REACHED
            break
        if out_of_time:
            break

    flips = int(state[2])
    if trajectory and trajectory[-1][0] != flips:
        trajectory.append((flips, int(state[4])))
    return SolveResult(
        solver="sls",
        best_assignment=best_x.astype(bool),
        best_unsat=int(state[4]),
        step_of_best=int(state[5]),
        steps_total=flips,
        wall_time=time.perf_counter() - t0,
        stop_reason=reason,
        trajectory=trajectory,
        n_clauses=f.n_clauses,
        threshold_count=target,
        time_to_best=time_to_best,
    )
