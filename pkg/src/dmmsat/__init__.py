"""Balanced delta-Max-E3SAT stress tests for a memcomputing-style ODE solver.

The package generates XOR-expanded Max-E3SAT instances in which every
variable occurs three or four times, integrates a deterministic dynamical
system whose voltages settle on good assignments, runs a WalkSAT baseline
on the same formulas, and measures how time and memory to a fixed fraction
of unsatisfied clauses grow with the number of variables.
"""

from .bench import BenchRecord, ScalingFit, SweepSpec, fit_scaling, memory_model, run_sweep, time_to_threshold
from .dimacs import emit_dimacs, emit_xcnf, parse_assignment, parse_dimacs, parse_xcnf, read_cnf, write_cnf
from .dmm import DmmParams, DmmState, compute_derivatives, euler_step, initial_state, readout, solve_dmm
from .errors import (
    DmmSatError, HeaderMismatch, InfeasibleBalance, InsufficientData, LengthMismatch, NonFiniteState,
    ParseError, TooLarge,
)
from .instance import (
    CnfClause, CnfFormula, Literal, XorClause, XorInstance, brute_force_max_sat, count_unsat, delta_instance,
    expand_instance, generate_balanced_xorsat, plant_parities, random_ksat, xor_to_cnf,
)
from .localsearch import SlsParams, break_count, solve_sls
from .result import SolveResult, StopReason, threshold_count

__version__ = "0.1.0"
