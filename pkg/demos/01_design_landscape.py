"""Shape an energy landscape so that a set of random bit strings become its lowest states.

Start from Hebbian couplings, then let the relearn/unlearn Monte Carlo loop squeeze
the pattern energies together while pushing nearby configurations upwards.
"""

import numpy as np

from hopfield_qsp import DesignParams, PatternSet, design_ground_states, hebbian_couplings
from hopfield_qsp.designer import spectral_metrics
from hopfield_qsp.spinmodel import restricted_spectrum

rng = np.random.default_rng(11)
patterns = PatternSet.random(10, 20, rng)
orders = [2, 3]

h0 = hebbian_couplings(patterns, orders)
before = spectral_metrics(restricted_spectrum(h0, patterns.patterns, 2))
print(f"Hebbian start: pattern band {before.delta_p:.3f}, gap to bulk {before.delta_b:.3f}")

report = design_ground_states(patterns, orders, DesignParams(delta_star=0.05, radius=2, seed=11))
after = report.final_metrics
print(f"after {report.steps} Monte Carlo steps (converged: {report.converged})")
print(f"  pattern band {after.delta_p:.4f}, gap {after.delta_b:.4f}, ratio {after.delta:.4f}")

# how the ratio evolved, sampled every tenth of the run
delta = np.asarray(report.trace.delta, dtype=float)
for i in np.linspace(0, len(delta) - 1, 10).astype(int):
    print(f"  step {i + 1:6d}: ratio {delta[i]:.4f}")
