"""Small Monte Carlo studies emitting the standard table shapes.

Replicates run on pre-assigned seed substreams; pass threads > 1 for a
worker pool with bit-identical output.  The shipped config files under
configs/ run the same studies through the CLI (`marfit benchmark`).
"""

from marfit import ExperimentSpec, run_monte_carlo

print("bandwidth-recovery frequencies (10 reps per T):")
spec = ExperimentSpec(
    table="table2", design="banded", p1=6, p2=4, k1=1, k2=1, rho=0.5, T_values=(100, 200, 400)
)
res = run_monte_carlo(spec, n_reps=10, seed=1, threads=2)
print(res.to_delimited())

print("estimation-error decay, banded vs alse (5 reps per T):")
spec = ExperimentSpec(
    table="table3", design="banded", p1=6, p2=4, k1=2, k2=1, rho=0.5, T_values=(200, 500)
)
res = run_monte_carlo(spec, n_reps=5, seed=2, threads=2)
print(res.to_delimited())

print("initialization-order discrepancies (5 reps):")
spec = ExperimentSpec(
    table="table1", design="banded", p1=6, p2=4, k1=2, k2=1, rho=0.5, T_values=(500,)
)
res = run_monte_carlo(spec, n_reps=5, seed=3)
print(res.to_delimited())
