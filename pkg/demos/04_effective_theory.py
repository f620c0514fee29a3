"""Compare the exact sweep with a perturbative model living on the pattern states only.

Late in the sweep the transverse field is a small perturbation, and the dynamics
can be folded into an M x M effective Hamiltonian.  Orders up to four are built here.
"""

import numpy as np

from hopfield_qsp.experiments import load_example
from hopfield_qsp.quantum import final_amplitudes, transverse_field_matrix
from hopfield_qsp.sw import effective_evolve, effective_terms

fx = load_example(1)
p = fx.problem(100.0, strengths=fx.reference_strengths)
model = effective_terms(p, order=4)

for n, H in model.terms.items():
    print(f"order {n} correction:\n{np.round(H, 6)}")

# spectral accuracy as the perturbation shrinks
H0 = np.diag(p.h0_diagonal())
V = transverse_field_matrix(p.n_qubits)
print("\n  eps   error(order 2)  error(order 4)")
for eps in (0.2, 0.1, 0.05):
    exact = np.linalg.eigvalsh(H0 + eps * V)[: model.M]
    errs = []
    for n in (2, 4):
        H = model.h0 + eps * model.v + sum(eps**k * model.terms[k] for k in model.terms if k <= n)
        errs.append(np.max(np.abs(np.linalg.eigvalsh(H) - exact)))
    print(f"{eps:5.2f}   {errs[0]:.2e}        {errs[1]:.2e}")

exact = np.abs(final_amplitudes(p)) ** 2
print("\nfinal populations")
for mode in ("hybrid", "effective_only"):
    eff = np.abs(effective_evolve(model, p, mode)) ** 2
    print(f"{mode:>14}: {np.round(eff, 4).tolist()}")
print(f"{'exact':>14}: {np.round(exact, 4).tolist()}")
