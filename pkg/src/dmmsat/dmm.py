"""Deterministic memcomputing-style dynamics for Max-SAT.

Every variable carries a voltage ``v_i`` in [-1, 1]; every clause carries a
short-term memory ``xs_m`` in [0, 1] and a long-term memory ``xl_m`` in
[1, xl_max]. With ``q = +1`` for a positive literal and ``-1`` for a negated
one, the clause measure is::

    C_m = 1/2 * min_{i in m} (1 - q_mi v_i)

and the flow field is::

    dv_i  = sum_{m ∋ i} xl_m xs_m G_mi + (1 + zeta xl_m)(1 - xs_m) R_mi
    dxs_m = beta (xs_m + eps)(C_m - gamma)
    dxl_m = alpha (C_m - delta)

    G_mi = 1/2 q_mi min_{j in m, j != i} (1 - q_mj v_j)
    R_mi = 1/2 (q_mi - v_i)   if i is the clause minimizer, else 0

The minimizer is the first literal (in clause order) attaining the minimum;
for a unit clause the empty minimum in ``G`` is taken as 1. Integration is
forward Euler followed by clamping every component to its box.

:func:`compute_derivatives` is a plain numpy implementation kept for clarity
and testing; :func:`solve_dmm` and :func:`euler_step` run a numba kernel that
performs the same arithmetic in the same summation order.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, fields, replace

import numba
import numpy as np

from .errors import NonFiniteState
from .instance import CnfFormula
from .result import SolveResult, StopReason, threshold_count
from .rng import STREAM_DMM_INIT, make_rng

CONVERGED_DV = 1e-9
CONVERGED_EVALS = 100


@dataclass(frozen=True)
class DmmParams:
    """Parameters of the flow field and the integrator.

    Defaults were tuned on delta-Max-E3SAT at N = 500 (see PARAMETERS.md).
    ``xl_max=None`` means ``1e4 * M`` for the formula being solved.
    """

    alpha: float = 0.09065
    beta: float = 29.63367
    gamma: float = 0.2105
    delta: float = 0.00912
    epsilon: float = 0.09591
    zeta: float = 0.0694
    dt: float = 0.09453
    xl_max: float | None = 3.5505
    max_steps: int = 1_000_000
    eval_stride: int = 10
    sample_stride: int = 100
    adaptive: bool = False

    def __post_init__(self):
        for name in ("alpha", "beta", "epsilon", "zeta", "dt"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.delta < self.gamma < 0.5:
            raise ValueError("need 0 < delta < gamma < 0.5")
        if self.xl_max is not None and not self.xl_max >= 1:
            raise ValueError("xl_max must be at least 1")
        for name in ("max_steps", "eval_stride", "sample_stride"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be at least 1")

    def resolved_xl_max(self, n_clauses):
        return float(self.xl_max) if self.xl_max is not None else 1e4 * max(n_clauses, 1)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


@dataclass
class DmmState:
    """Continuous state: voltages ``v`` (N), memories ``xs`` and ``xl`` (M)."""

    v: np.ndarray
    xs: np.ndarray
    xl: np.ndarray
    t: float = 0.0
    step: int = 0

    def copy(self):
        return DmmState(self.v.copy(), self.xs.copy(), self.xl.copy(), self.t, self.step)

    def __eq__(self, other):
        if not isinstance(other, DmmState):
            return NotImplemented
        return (
            np.array_equal(self.v, other.v)
            and np.array_equal(self.xs, other.xs)
            and np.array_equal(self.xl, other.xl)
            and self.t == other.t
            and self.step == other.step
        )


def initial_state(f: CnfFormula, seed: int) -> DmmState:
    """Voltages uniform on (-1, 1) from the seed's DMM stream; xs = 0.5, xl = 1."""
    rng = make_rng(seed, STREAM_DMM_INIT)
    v = rng.uniform(-1.0, 1.0, size=f.n_vars)
    return DmmState(v, np.full(f.n_clauses, 0.5), np.ones(f.n_clauses))


def _check_state(f, s):
    if s.v.shape != (f.n_vars,) or s.xs.shape != (f.n_clauses,) or s.xl.shape != (f.n_clauses,):
        raise ValueError("state vector lengths do not match the formula")


def _literal_terms(f, v):
    # 1 - q v for every literal, clause-major
    return 1.0 - f.sign * np.asarray(v, dtype=float)[f.var_index]


def clause_value(f: CnfFormula, m: int, v) -> float:
    """Continuous violation ``C_m`` of clause ``m`` at voltages ``v``, in [0, 1]."""
    lo, hi = f.ptr[m], f.ptr[m + 1]
    q = f.sign[lo:hi]
    x = np.asarray(v, dtype=float)[f.var_index[lo:hi]]
    return 0.5 * float(np.min(1.0 - q * x))


def clause_values(f: CnfFormula, v):
    """``C_m`` for every clause."""
    return 0.5 * np.minimum.reduceat(_literal_terms(f, v), f.ptr[:-1])


def _min_structure(f, terms):
    """Per clause: minimum, position of the first minimizer, and per-literal min over the others."""
    starts = f.ptr[:-1]
    cmin = np.minimum.reduceat(terms, starts)
    clause_of = f.clause_of_literal
    at_min = terms == cmin[clause_of]
    pos = np.arange(terms.size)
    # first literal position attaining the clause minimum
    cand = np.where(at_min, pos, terms.size)
    first = np.minimum.reduceat(cand, starts)
    is_arg = pos == first[clause_of]
    masked = np.where(is_arg, np.inf, terms)
    second = np.minimum.reduceat(masked, starts)
    second = np.where(np.isinf(second), 1.0, second)
    others_min = np.where(is_arg, second[clause_of], cmin[clause_of])
    return cmin, is_arg, others_min


def compute_derivatives(f: CnfFormula, s: DmmState, p: DmmParams):
    """Flow field at state ``s``: returns ``(dv, dxs, dxl)``."""
    _check_state(f, s)
    terms = _literal_terms(f, s.v)
    cmin, is_arg, others_min = _min_structure(f, terms)
    C = 0.5 * cmin
    q = f.sign
    vi = np.asarray(s.v, dtype=float)[f.var_index]
    c_of = f.clause_of_literal
    a = (s.xl * s.xs)[c_of]
    b = ((1.0 + p.zeta * s.xl) * (1.0 - s.xs))[c_of]
    G = 0.5 * q * others_min
    R = np.where(is_arg, 0.5 * (q - vi), 0.0)
    contrib = a * G + b * R
    dv = np.bincount(f.var_index, weights=contrib, minlength=f.n_vars)
    dxs = p.beta * (s.xs + p.epsilon) * (C - p.gamma)
    dxl = p.alpha * (C - p.delta)
    return dv, dxs, dxl


# --------------------------------------------------------------------------
# compiled kernels


@numba.njit(cache=True)
def _flow(ptr, var, sgn, v, xs, xl, zeta, beta, gamma, eps, alpha, delta, dv, dxs, dxl):
    n = v.shape[0]
    for i in range(n):
        dv[i] = 0.0
    m_total = ptr.shape[0] - 1
    for m in range(m_total):
        lo = ptr[m]
        hi = ptr[m + 1]
        min1 = np.inf
        min2 = np.inf
        arg = -1
        for k in range(lo, hi):
            t = 1.0 - sgn[k] * v[var[k]]
            if t < min1:
                min2 = min1
                min1 = t
                arg = k
            elif t < min2:
                min2 = t
        if hi - lo == 1:
            min2 = 1.0
        c = 0.5 * min1
        a = xl[m] * xs[m]
        b = (1.0 + zeta * xl[m]) * (1.0 - xs[m])
        for k in range(lo, hi):
            q = sgn[k]
            if k == arg:
                g = 0.5 * q * min2
                r = 0.5 * (q - v[var[k]])
                dv[var[k]] += a * g + b * r
            else:
                g = 0.5 * q * min1
                dv[var[k]] += a * g + b * 0.0
        dxs[m] = beta * (xs[m] + eps) * (c - gamma)
        dxl[m] = alpha * (c - delta)


@numba.njit(cache=True)
def _projected_max(v, dv):
    # largest |dv_i| not cancelled by clamping at the voltage bounds
    mx = 0.0
    for i in range(v.shape[0]):
        d = dv[i]
        if (v[i] >= 1.0 and d > 0.0) or (v[i] <= -1.0 and d < 0.0):
            continue
        a = abs(d)
        if a > mx:
            mx = a
    return mx


@numba.njit(cache=True)
def _integrate(ptr, var, sgn, v, xs, xl, zeta, beta, gamma, eps, alpha, delta,
               dt, dt_min, dt_max, adaptive, xl_max, n_steps, check_bounds,
               dv, dxs, dxl):
    """Advance ``n_steps`` Euler steps in place.

    Returns ``(steps_done, sim_time, dt, last_projected_max_dv, bad_step, violations)``;
    ``bad_step >= 0`` is the 1-based step within this call that went non-finite.
    """
    sim_time = 0.0
    last = 0.0
    violations = 0
    for s in range(n_steps):
        _flow(ptr, var, sgn, v, xs, xl, zeta, beta, gamma, eps, alpha, delta, dv, dxs, dxl)
        mx = 0.0
        finite = True
        for i in range(v.shape[0]):
            d = dv[i]
            if d != d or d == np.inf or d == -np.inf:
                finite = False
            a = abs(d)
            if a > mx:
                mx = a
        for j in range(xs.shape[0]):
            if dxs[j] != dxs[j] or dxl[j] != dxl[j] or abs(dxs[j]) == np.inf or abs(dxl[j]) == np.inf:
                finite = False
        if not finite:
            return s, sim_time, dt, last, s + 1, violations
        if adaptive:
            while dt * mx > 0.5 and dt > dt_min:
                dt = max(dt * 0.5, dt_min)
        last = _projected_max(v, dv)
        for i in range(v.shape[0]):
            x = v[i] + dt * dv[i]
            if x > 1.0:
                x = 1.0
            elif x < -1.0:
                x = -1.0
            v[i] = x
        for j in range(xs.shape[0]):
            x = xs[j] + dt * dxs[j]
            if x > 1.0:
                x = 1.0
            elif x < 0.0:
                x = 0.0
            xs[j] = x
            y = xl[j] + dt * dxl[j]
            if y > xl_max:
                y = xl_max
            elif y < 1.0:
                y = 1.0
            xl[j] = y
        sim_time += dt
        if check_bounds:
            for i in range(v.shape[0]):
                if not (-1.0 <= v[i] <= 1.0):
                    violations += 1
            for j in range(xs.shape[0]):
                if not (0.0 <= xs[j] <= 1.0):
                    violations += 1
                if not (1.0 <= xl[j] <= xl_max):
                    violations += 1
        if adaptive and dt * mx < 0.05:
            dt = min(dt * 2.0, dt_max)
    return n_steps, sim_time, dt, last, -1, violations


@numba.njit(cache=True)
def _unsat_from_voltages(ptr, var, sgn, v):
    count = 0
    for m in range(ptr.shape[0] - 1):
        sat = False
        for k in range(ptr[m], ptr[m + 1]):
            if (v[var[k]] > 0.0) == (sgn[k] > 0.0):
                sat = True
                break
        if not sat:
            count += 1
    return count


class _Kernel:
    """Formula arrays laid out for the compiled kernels plus scratch buffers."""

    def __init__(self, f: CnfFormula, p: DmmParams):
        self.ptr = np.ascontiguousarray(f.ptr, dtype=np.int64)
        self.var = np.ascontiguousarray(f.var_index, dtype=np.int64)
        self.sgn = np.ascontiguousarray(f.sign, dtype=np.float64)
        self.dv = np.empty(f.n_vars)
        self.dxs = np.empty(f.n_clauses)
        self.dxl = np.empty(f.n_clauses)
        self.p = p
        self.xl_max = p.resolved_xl_max(f.n_clauses)
        self.dt = float(p.dt)

    def run(self, s: DmmState, n_steps, check_bounds=False):
        p = self.p
        done, sim_t, self.dt, last, bad, viol = _integrate(
            self.ptr, self.var, self.sgn, s.v, s.xs, s.xl,
            p.zeta, p.beta, p.gamma, p.epsilon, p.alpha, p.delta,
            self.dt, p.dt / 128.0, 10.0 * p.dt, p.adaptive, self.xl_max, int(n_steps), check_bounds,
            self.dv, self.dxs, self.dxl,
        )
        s.step += done
        s.t += sim_t
        if bad >= 0:
            raise NonFiniteState(s.step + 1)
        return last, viol

    def unsat(self, s: DmmState):
        return _unsat_from_voltages(self.ptr, self.var, self.sgn, s.v)


def euler_step(f: CnfFormula, s: DmmState, p: DmmParams) -> DmmState:
    """One explicit Euler step with clamping; returns a new state.

    Raises
    ------
    NonFiniteState
        If the derivative contains NaN or Inf.
    """
    _check_state(f, s)
    out = s.copy()
    k = _Kernel(f, replace(p, adaptive=False))
    k.run(out, 1)
    return out


def readout(s: DmmState):
    """Boolean assignment ``v_i > 0`` (a zero voltage reads as false)."""
    return np.asarray(s.v) > 0.0


def warm_up():
    """Compile the kernels ahead of any timed run."""
    f = CnfFormula(3, [[1, -2, 3], [-1, 2]])
    k = _Kernel(f, DmmParams())
    s = initial_state(f, 0)
    k.run(s, 2, check_bounds=True)
    k.unsat(s)
    k.p = replace(k.p, adaptive=True)
    k.run(s, 1)


def solve_dmm(f: CnfFormula, p: DmmParams | None = None, threshold_fraction: float = 0.015,
              seed: int = 0, time_budget: float | None = None, check_bounds: bool = False,
              state: DmmState | None = None) -> SolveResult:
    """Integrate the dynamics until the unsat count reaches the threshold.

    Every ``eval_stride`` steps the voltages are read out and the unsat count
    evaluated. The run stops when the best count is at most
    ``floor(threshold_fraction * M)``, when ``max_steps`` or ``time_budget``
    (wall seconds) is used up, or when the voltages have stopped moving for
    100 consecutive evaluations. Everything except wall times is a pure
    function of ``(f, p, seed)``.

    With ``check_bounds`` the box constraints are re-checked after every step
    and an ``AssertionError`` reports any violation.
    """
    p = p or DmmParams()
    target = threshold_count(threshold_fraction, f.n_clauses)
    t0 = time.perf_counter()
    k = _Kernel(f, p)
    s = state.copy() if state is not None else initial_state(f, seed)
    _check_state(f, s)
    start_step = s.step

    best = k.unsat(s)
    best_bits = readout(s)
    step_of_best = s.step
    time_to_best = time.perf_counter() - t0
    trajectory = [(s.step, best)]
    quiet = 0
    reason = StopReason.BUDGET_EXHAUSTED
    next_sample = start_step + p.sample_stride
    violations = 0

    if best <= target:
        reason = StopReason.THRESHOLD_REACHED
    else:
        while s.step - start_step < p.max_steps:
            n = min(p.eval_stride, p.max_steps - (s.step - start_step))
            last_dv, viol = k.run(s, n, check_bounds)
            violations += viol
            u = k.unsat(s)
            improved = u < best
            if improved:
                best = u
                best_bits = readout(s)
                step_of_best = s.step
                time_to_best = time.perf_counter() - t0
            if improved or s.step >= next_sample:
                trajectory.append((s.step, u))
                while next_sample <= s.step:
                    next_sample += p.sample_stride
            if best <= target:
                reason = StopReason.THRESHOLD_REACHED
                break
            quiet = quiet + 1 if last_dv < CONVERGED_DV else 0
            if quiet >= CONVERGED_EVALS:
                reason = StopReason.CONVERGED
                break
            if time_budget is not None and time.perf_counter() - t0 > time_budget:
                break
    if check_bounds and violations:
        raise AssertionError(f"{violations} bound violations during integration")
    if trajectory[-1][0] != s.step:
        trajectory.append((s.step, k.unsat(s)))
    return SolveResult(
        solver="dmm",
        best_assignment=best_bits,
        best_unsat=int(best),
        step_of_best=int(step_of_best),
        steps_total=int(s.step - start_step),
        wall_time=time.perf_counter() - t0,
        stop_reason=reason,
        trajectory=trajectory,
        n_clauses=f.n_clauses,
        threshold_count=target,
        time_to_best=time_to_best,
    )


def trajectory_diagnostics(r_or_traj):
    """Staircase summary of a run's unsat trajectory.

    Accepts a :class:`SolveResult` or a list of ``(step, unsat)`` pairs.

    Returns
    -------
    dict
        ``steps``, ``best_curve`` (running minimum), ``drops`` (strictly
        positive decreases of the running minimum between consecutive
        samples, i.e. avalanche sizes) and ``histogram`` (drop size -> count).
    """
    traj = r_or_traj.trajectory if isinstance(r_or_traj, SolveResult) else r_or_traj
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    steps = np.array([s for s, _ in traj], dtype=np.int64)
    unsat = np.array([u for _, u in traj], dtype=np.int64)
    best = np.minimum.accumulate(unsat)
    d = -np.diff(best)
    drops = d[d > 0]
    sizes, counts = np.unique(drops, return_counts=True)
    return {
        "steps": steps,
        "best_curve": best,
        "drops": drops,
        "histogram": {int(a): int(c) for a, c in zip(sizes, counts)},
    }
