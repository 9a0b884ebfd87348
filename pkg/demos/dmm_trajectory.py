"""
Following the memcomputing dynamics on one instance
===================================================

Integrates the voltage and memory equations on an N = 500 instance and
prints how the unsatisfied-clause count falls towards the 1.5 % threshold.
"""

import numpy as np

from dmmsat import DmmParams, delta_instance, solve_dmm
from dmmsat.dmm import trajectory_diagnostics

f = delta_instance(500, seed=0)
p = DmmParams()
print(p)

r = solve_dmm(f, p, threshold_fraction=0.015, seed=0)
print(f"{r.stop_reason.value} after {r.steps_total} steps: best {r.best_unsat} "
      f"(threshold {r.threshold_count}) in {r.wall_time:.2f} s")

steps = np.array([s for s, _ in r.trajectory])
unsat = np.array([u for _, u in r.trajectory])
for s, u in zip(steps[::max(1, len(steps) // 12)], unsat[::max(1, len(steps) // 12)]):
    print(f"step {s:7d}  unsat {u:4d}  " + "#" * (u // 4))

diag = trajectory_diagnostics(r)
print("improvements by size (clauses: count):", diag["histogram"])
