"""How many random patterns can the design loop store as near-degenerate ground states?

A quick desk-scale scan; the full statistics are available from the ``capacity`` command.
"""

from hopfield_qsp.designer import DesignParams
from hopfield_qsp.experiments import capacity_experiment

params = DesignParams(delta_star=0.1, radius=4, max_steps=20_000)
for orders in ([1, 2], [1, 2, 3]):
    curve = capacity_experiment([5, 6, 7], orders, params, n_realizations=10, subgroup_size=5, sp=0.99, seed=1)
    print(f"orders {orders}: " + ", ".join(f"N={pt.n}: {pt.capacity:.1f}" for pt in curve.points))
