"""
Time to threshold versus N
==========================

A shortened version of the desk-scale sweep: both solvers on a few sizes,
then power-law and exponential fits of the median time. WalkSAT runs with
the low noise that suits it best on these instances.
"""

from dmmsat.bench import SweepSpec, censoring_by_n, format_fits, memory_model, run_sweep
from dmmsat.instance import delta_instance
from dmmsat.localsearch import SlsParams

spec = SweepSpec(n_values=(250, 500, 1000, 2000), seeds_per_n=3, budget=20.0,
                 sls=SlsParams(noise=0.05, max_restarts=10**6))

def show(rec):
    t = "-" if rec.time_to_threshold is None else f"{rec.time_to_threshold:.3f} s"
    print(f"{rec.solver:4s} N={rec.n:5d}  {rec.status:17s} {t:>10s}  best {rec.best_unsat}")

records = run_sweep(spec, progress=show)
print()
print(format_fits(records))
print("sls censored fraction by N:", censoring_by_n(records, "sls"))

for n in spec.n_values:
    print(f"N={n:5d}  model memory {memory_model(delta_instance(n, 0)) / 1024:8.1f} KiB")
