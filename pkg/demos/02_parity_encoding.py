"""Encode a small logical Hamiltonian in parity qubits.

Every coupling becomes a physical qubit whose field carries the coupling strength;
plaquettes of three or four qubits enforce that the physical state comes from a
logical one.
"""

import numpy as np

from hopfield_qsp.experiments import load_example
from hopfield_qsp.lhz import constraint_count, find_constraints, map_config, validate_constraints
from hopfield_qsp.quantum import plaquette_parities

fx = load_example(1)
layout = fx.layout
print(f"{layout.logical_n} logical spins (ancilla {layout.ancilla}) -> {layout.n_physical} parity qubits")
for q, f in zip(layout.qubits, layout.fields):
    print(f"  qubit {''.join(map(str, q))}: field {f:+.2f}")

plaquettes = find_constraints(layout)
print(f"\n{constraint_count(layout)} independent plaquettes needed; the finder picks:")
for p in plaquettes:
    print("  " + " ".join("".join(map(str, layout.qubits[m])) for m in p.members))
print("valid:", validate_constraints(layout, plaquettes).ok)

print("\npattern images and their plaquette parities:")
for x in fx.patterns:
    z = map_config(layout, x)
    par = plaquette_parities(layout.n_physical, plaquettes)[:, z.value]
    print(f"  {x} -> {z}  parities {par.astype(int).tolist()}")

# every code state satisfies all plaquettes, and nothing else does
satisfied = np.flatnonzero(np.all(plaquette_parities(layout.n_physical, plaquettes) > 0, axis=0))
print(f"\n{len(satisfied)} of {2 ** layout.n_physical} physical states satisfy every plaquette "
      f"(= 2^{layout.logical_n - 1} logical states)")
