"""Schrieffer-Wolff effective theory of the sweep inside the pattern manifold.

For ``H = delta H0 + eps V`` with ``P`` the projector on the pattern states,

    H_eff(t) = delta P H0 P + eps P V P + sum_{n>=2} eps^n / delta^(n-1) H_eff,n

with time-independent ``H_eff,n`` built from the generators

    S1 = L(V_od)
    S2 = -L([V_d, S1])
    S3 = -L([V_d, S2]) + 1/3 L([S1, [S1, V_od]])

and

    H_eff,2 = 1/2 P[S1, V_od]P
    H_eff,3 = 1/2 P[S2, V_od]P
    H_eff,4 = 1/2 P[S3, V_od]P - 1/24 P[S1, [S1, [S1, V_od]]]P.

The ``L([S1, [S1, V_od]])`` part of ``S3`` is required for the fourth-order
term to be correct; without it the effective spectrum is only accurate to
third order.  Energy denominators use the bare ``H0`` energies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.linalg import expm

from .quantum import SweepProblem, SweepSchedule, minus_state, propagate, transverse_field_matrix

MAX_ORDER = 4
GAP_TOLERANCE = 1e-10


class GapError(ValueError):
    """A low-energy state is degenerate with a bulk state."""


class DegenerateManifoldError(ValueError):
    """Two pattern states have exactly equal unperturbed energies."""


@dataclass(frozen=True)
class BlockPartition:
    low: np.ndarray  # basis indices of the pattern states, in pattern order
    energies: np.ndarray  # diagonal of H0 over the full basis

    def __post_init__(self):
        low = np.asarray(self.low, dtype=np.int64)
        energies = np.asarray(self.energies, dtype=float)
        if len(np.unique(low)) != len(low):
            raise ValueError("low-energy states must be distinct")
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "energies", energies)

    @classmethod
    def from_problem(cls, p: SweepProblem) -> "BlockPartition":
        return cls(p.pattern_indices(), p.h0_diagonal())

    @property
    def dim(self) -> int:
        return len(self.energies)

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.dim, dtype=bool)
        m[self.low] = True
        return m

    @property
    def bulk(self) -> np.ndarray:
        return np.flatnonzero(~self.mask)

    @property
    def scale(self) -> float:
        return max(1.0, float(np.max(np.abs(self.energies))))

    @property
    def gap(self) -> float:
        """``min(E_bulk) - max(E_low)``."""
        return float(self.energies[self.bulk].min() - self.energies[self.low].max())


def decompose_blocks(X: np.ndarray, part: BlockPartition) -> tuple[np.ndarray, np.ndarray]:
    """Split ``X`` into ``PXP + QXQ`` and ``PXQ + QXP``."""
    m = part.mask
    same = m[:, None] == m[None, :]
    return np.where(same, X, 0), np.where(same, 0, X)


def superop_L(X: np.ndarray, part: BlockPartition) -> np.ndarray:
    """``sum_{i in P, j in Q} <i|X|j> / (E_i - E_j) |i><j| - h.c.``."""
    low, bulk = part.low, part.bulk
    denom = part.energies[low][:, None] - part.energies[bulk][None, :]
    bad = np.argwhere(np.abs(denom) < GAP_TOLERANCE * part.scale)
    if bad.size:
        i, j = bad[0]
        raise GapError(
            f"low state {low[i]} and bulk state {bulk[j]} share energy {part.energies[low[i]]:.6g}"
        )
    block = X[np.ix_(low, bulk)] / denom
    out = np.zeros(X.shape, dtype=np.result_type(X, float))
    out[np.ix_(low, bulk)] = block
    out[np.ix_(bulk, low)] = -block.conj().T
    return out


def _comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


@dataclass
class EffectiveModel:
    order: int
    h0: np.ndarray  # P H0 P, M x M
    v: np.ndarray  # P V P
    terms: dict[int, np.ndarray]  # n -> H_eff,n
    low: np.ndarray
    schedule: SweepSchedule

    @property
    def M(self) -> int:
        return len(self.low)

    def hamiltonian(self, t: float, delta: float | None = None, eps: float | None = None) -> np.ndarray:
        """``H_eff`` at sweep time ``t`` (or at explicit ``delta``/``eps``)."""
        d = self.schedule.delta(t) if delta is None else delta
        e = self.schedule.eps(t) if eps is None else eps
        H = d * self.h0 + e * self.v
        for n, Hn in self.terms.items():
            H = H + e**n / d ** (n - 1) * Hn
        return H

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "low_states": self.low.tolist(),
            "PH0P": self.h0.tolist(),
            "PVP": self.v.tolist(),
            "terms": {str(n): Hn.tolist() for n, Hn in self.terms.items()},
        }


def effective_terms(p: SweepProblem, part: BlockPartition | None = None, order: int = 4) -> EffectiveModel:
    """Effective Hamiltonian terms up to ``order`` (at most 4)."""
    if order > MAX_ORDER:
        raise ValueError(f"orders above {MAX_ORDER} are not supported")
    part = part or BlockPartition.from_problem(p)
    E_low = part.energies[part.low]
    if len(np.unique(E_low)) != len(E_low):
        raise DegenerateManifoldError("pattern states are exactly degenerate in H0")
    V = transverse_field_matrix(p.n_qubits)
    pp = np.ix_(part.low, part.low)
    terms: dict[int, np.ndarray] = {}
    if order >= 2:
        Vd, Vod = decompose_blocks(V, part)
        S1 = superop_L(Vod, part)
        terms[2] = 0.5 * _comm(S1, Vod)[pp]
        if order >= 3:
            S2 = -superop_L(_comm(Vd, S1), part)
            terms[3] = 0.5 * _comm(S2, Vod)[pp]
        if order >= 4:
            Y = _comm(S1, Vod)
            Z = _comm(S1, Y)
            S3 = -superop_L(_comm(Vd, S2), part) + superop_L(Z, part) / 3.0
            terms[4] = 0.5 * _comm(S3, Vod)[pp] - _comm(S1, Z)[pp] / 24.0
    return EffectiveModel(order, np.diag(E_low), V[pp], terms, part.low, p.schedule)


def second_order_sum(p: SweepProblem, index: int = 0) -> float:
    """``-sum_q |<z|V|q>|^2 / (E_q - E_z)`` for pattern ``index``, by direct summation."""
    E = p.h0_diagonal()
    z = int(p.pattern_indices()[index])
    low = set(p.pattern_indices().tolist())
    total = 0.0
    for q in range(p.n_qubits):
        nb = z ^ (1 << q)
        if nb not in low:
            total -= 1.0 / (E[nb] - E[z])
    return total


def crossover_time(schedule: SweepSchedule, t0_ratio: float) -> float:
    """Time at which ``eps/delta`` equals ``t0_ratio``."""
    if t0_ratio <= 0:
        raise ValueError("t0_ratio must be positive")
    return schedule.total_time / (1.0 + t0_ratio)


def _magnus4(model: EffectiveModel, psi: np.ndarray, t0: float, t1: float, n_steps: int) -> np.ndarray:
    h = (t1 - t0) / n_steps
    c = np.sqrt(3.0) / 6.0
    for s in range(n_steps):
        t = t0 + s * h
        H1 = model.hamiltonian(t + (0.5 - c) * h)
        H2 = model.hamiltonian(t + (0.5 + c) * h)
        omega = -0.5j * h * (H1 + H2) - (np.sqrt(3.0) / 12.0) * h * h * _comm(H2, H1)
        psi = expm(omega) @ psi
    return psi


def effective_evolve(
    model: EffectiveModel,
    problem: SweepProblem,
    mode: Literal["hybrid", "effective_only"] = "hybrid",
    t0_ratio: float = 1.0,
    n_steps: int | None = None,
) -> np.ndarray:
    """Final amplitudes ``a_n(T)`` from the effective ``M``-level dynamics after ``t0``."""
    sched = problem.schedule
    T = sched.total_time
    t0 = crossover_time(sched, t0_ratio)
    n_steps = n_steps or sched.n_steps
    psi_full = minus_state(problem.n_qubits)
    if mode == "hybrid":
        exact_steps = max(1, int(round(n_steps * t0 / T)))
        psi_full, _ = propagate(problem, psi_full, 0.0, t0, exact_steps)
    elif mode != "effective_only":
        raise ValueError("mode must be 'hybrid' or 'effective_only'")
    psi = psi_full[model.low].astype(complex)
    norm = np.linalg.norm(psi)
    if norm < 1e-12:
        raise ValueError("initial state has no weight on the pattern manifold")
    psi = psi / norm
    eff_steps = max(1, int(round(n_steps * (T - t0) / T)))
    return _magnus4(model, psi, t0, T, eff_steps)
