"""Program an equal superposition of three patterns with a single linear sweep.

The constraint strengths are the only knobs. A simplex search tunes them so the
sweep from the transverse field to the parity Hamiltonian ends with equal weight
on every pattern; the run is then traced to show where population moves.
"""

import numpy as np

from hopfield_qsp.experiments import load_example, sweep_table
from hopfield_qsp.optimizer import OptimizerOptions, TargetDistribution, optimize_constraints

fx = load_example(1)
problem = fx.problem(total_time=50.0)
targets = TargetDistribution.uniform(len(fx.patterns))

result = optimize_constraints(problem, targets, opts=OptimizerOptions(seed=0))
print(f"cost {result.best_cost:.2e} after {result.evaluations} sweeps")
print("strengths:", np.round(result.best_c, 3).tolist())
print("final populations:", np.round(np.abs(result.best_amplitudes) ** 2, 4).tolist())

table = sweep_table(problem.with_strengths(result.best_c))
cols = table.columns
print("\n    t    p_1    p_2    p_3  p_bulk   A_12   A_13    B_1")
for i in range(0, len(table.rows), 20):
    print(f"{cols['t'][i]:5.1f} " + " ".join(f"{cols[k][i]:6.3f}" for k in
                                            ("p_1", "p_2", "p_3", "p_bulk", "A_12", "A_13", "B_1")))
