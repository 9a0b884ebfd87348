"""Solver outcome shared by the DMM and local-search solvers."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np


class StopReason(str, Enum):
    THRESHOLD_REACHED = "ThresholdReached"
    BUDGET_EXHAUSTED = "BudgetExhausted"
    CONVERGED = "Converged"

    def __str__(self):
        return self.value


def threshold_count(threshold_fraction, n_clauses):
    """``floor(threshold_fraction * n_clauses)``, reading the fraction as a decimal.

    ``0.015 * 2500`` gives 37 and ``0.015 * 5000`` gives 75 with no float
    round-off surprises.
    """
    if not 0 <= threshold_fraction <= 1:
        raise ValueError(f"threshold_fraction must lie in [0, 1], got {threshold_fraction}")
    return math.floor(Fraction(str(threshold_fraction)) * int(n_clauses))


@dataclass(eq=False)
class SolveResult:
    """Best assignment found by a solver run plus step and timing accounting.

    ``trajectory`` holds ``(step, unsat)`` samples in increasing step order;
    for the local-search solver a step is one flip. ``wall_time`` and
    ``time_to_best`` are the only fields that vary between identical runs and
    are ignored by ``==``.
    """

    solver: str
    best_assignment: np.ndarray
    best_unsat: int
    step_of_best: int
    steps_total: int
    wall_time: float
    stop_reason: StopReason
    trajectory: list = field(default_factory=list)
    n_clauses: int = 0
    threshold_count: int = 0
    time_to_best: float = 0.0

    @property
    def reached_threshold(self):
        return self.stop_reason is StopReason.THRESHOLD_REACHED

    def __eq__(self, other):
        if not isinstance(other, SolveResult):
            return NotImplemented
        return (
            self.solver == other.solver
            and np.array_equal(self.best_assignment, other.best_assignment)
            and self.best_unsat == other.best_unsat
            and self.step_of_best == other.step_of_best
            and self.steps_total == other.steps_total
            and self.stop_reason == other.stop_reason
            and [tuple(p) for p in self.trajectory] == [tuple(p) for p in other.trajectory]
            and self.n_clauses == other.n_clauses
            and self.threshold_count == other.threshold_count
        )

    def to_dict(self, include_assignment=False):
        d = {
            "solver": self.solver,
            "stop_reason": str(self.stop_reason),
            "best_unsat": int(self.best_unsat),
            "threshold_count": int(self.threshold_count),
            "n_clauses": int(self.n_clauses),
            "steps_total": int(self.steps_total),
            "wall_time_s": float(self.wall_time),
            "step_of_best": int(self.step_of_best),
            "trajectory": [[int(s), int(u)] for s, u in self.trajectory],
        }
        if include_assignment:
            d["assignment"] = [int(b) for b in self.best_assignment]
        return d

    def to_json(self, include_assignment=False, indent=None):
        return json.dumps(self.to_dict(include_assignment), indent=indent)

    @classmethod
    def from_dict(cls, d):
        bits = np.asarray(d.get("assignment", []), dtype=bool)
        return cls(
            solver=d.get("solver", ""),
            best_assignment=bits,
            best_unsat=int(d["best_unsat"]),
            step_of_best=int(d["step_of_best"]),
            steps_total=int(d["steps_total"]),
            wall_time=float(d["wall_time_s"]),
            stop_reason=StopReason(d["stop_reason"]),
            trajectory=[(int(s), int(u)) for s, u in d.get("trajectory", [])],
            n_clauses=int(d.get("n_clauses", 0)),
            threshold_count=int(d.get("threshold_count", 0)),
        )

    def v_lines(self, width=20):
        """Assignment in Max-SAT competition ``v`` line format."""
        lits = [str(i + 1) if b else str(-(i + 1)) for i, b in enumerate(self.best_assignment)]
        lines = []
        for i in range(0, len(lits), width):
            lines.append("v " + " ".join(lits[i:i + width]))
        lines.append("v 0")
        return "\n".join(lines)
