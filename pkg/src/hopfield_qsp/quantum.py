"""State-vector simulation of the transverse-field sweep on the physical qubits.

``H(t) = delta(t) H0 + eps(t) V`` with ``delta = t/T``, ``eps = 1 - t/T``,
``H0 = H_J + H_C`` diagonal in the computational basis and ``V = sum_i sx_i``.
Basis state ``z`` is indexed by its integer value (leftmost qubit is the most
significant bit).

Time stepping uses a fourth-order composition of exactly solvable flows: the
diagonal part (with time carried along as an extra coordinate, so
``int delta(s) ds`` is integrated exactly) and the transverse field (a product
of single-qubit rotations evaluated at the substep midpoint).  Every substep is
unitary, so the norm is preserved to rounding error.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numba
import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .lhz import LhzLayout, Plaquette, map_config
from .spinmodel import SpinConfiguration, as_config, config_spins

MAX_QUBITS = 14
NORM_TOLERANCE = 1e-6
DEGENERACY_TOLERANCE = 1e-10

# Suzuki's five-stage fractal composition of a symmetric second-order step.
_P = 1.0 / (4.0 - 4.0 ** (1.0 / 3.0))
SUZUKI4 = np.array([_P, _P, 1.0 - 4.0 * _P, _P, _P])


@dataclass(frozen=True)
class SweepSchedule:
    total_time: float = 100.0
    n_steps: int = 4000
    n_samples: int = 200

    def __post_init__(self):
        if not self.total_time > 0:
            raise ValueError("total sweep time must be positive")
        if self.n_steps < 1 or self.n_samples < 2:
            raise ValueError("need n_steps >= 1 and n_samples >= 2")

    def delta(self, t):
        return np.asarray(t) / self.total_time

    def eps(self, t):
        return 1.0 - np.asarray(t) / self.total_time

    def sample_steps(self) -> np.ndarray:
        return np.unique(np.round(np.linspace(0, self.n_steps, self.n_samples)).astype(np.int64))

    def sample_times(self) -> np.ndarray:
        return self.sample_steps() * (self.total_time / self.n_steps)


def transverse_field_matrix(n_qubits: int) -> np.ndarray:
    dim = 1 << n_qubits
    V = np.zeros((dim, dim))
    idx = np.arange(dim)
    for q in range(n_qubits):
        V[idx, idx ^ (1 << q)] = 1.0
    return V


def plaquette_parities(n_qubits: int, plaquettes: Sequence[Plaquette]) -> np.ndarray:
    """``prod_{q in p} sz_q`` on every basis state, shape ``(len(plaquettes), 2**n)``."""
    spins = config_spins(np.arange(1 << n_qubits), n_qubits).astype(float)
    out = np.empty((len(plaquettes), 1 << n_qubits))
    for i, p in enumerate(plaquettes):
        out[i] = spins[:, list(p.members)].prod(axis=1)
    return out


@dataclass(frozen=True)
class SweepProblem:
    layout: LhzLayout
    plaquettes: tuple[Plaquette, ...]
    patterns: tuple[SpinConfiguration, ...]  # physical images
    schedule: SweepSchedule = SweepSchedule()
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        n = self.layout.n_physical
        if n > MAX_QUBITS:
            raise ValueError(f"{n} physical qubits exceeds the dense limit of {MAX_QUBITS}")
        if any(p.strength <= 0 for p in self.plaquettes):
            raise ValueError("constraint strengths must be positive")
        object.__setattr__(self, "plaquettes", tuple(self.plaquettes))
        object.__setattr__(self, "patterns", tuple(as_config(z, n) for z in self.patterns))

    @classmethod
    def from_logical(cls, layout: LhzLayout, plaquettes: Sequence[Plaquette], logical_patterns: Sequence,
                     schedule: SweepSchedule = SweepSchedule()) -> "SweepProblem":
        return cls(layout, tuple(plaquettes), tuple(map_config(layout, x) for x in logical_patterns), schedule)

    @property
    def n_qubits(self) -> int:
        return self.layout.n_physical

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    @property
    def strengths(self) -> np.ndarray:
        return np.array([p.strength for p in self.plaquettes])

    def with_strengths(self, strengths: Sequence[float]) -> "SweepProblem":
        plaq = tuple(p.with_strength(c) for p, c in zip(self.plaquettes, strengths))
        new = replace(self, plaquettes=plaq, _cache={})
        for key in ("field_diag", "parities"):
            if key in self._cache:
                new._cache[key] = self._cache[key]
        return new

    def with_schedule(self, schedule: SweepSchedule) -> "SweepProblem":
        new = replace(self, schedule=schedule, _cache={})
        new._cache.update(self._cache)
        return new

    def field_diagonal(self) -> np.ndarray:
        if "field_diag" not in self._cache:
            spins = config_spins(np.arange(self.dim), self.n_qubits).astype(float)
            self._cache["field_diag"] = -spins @ self.layout.fields
        return self._cache["field_diag"]

    def constraint_parities(self) -> np.ndarray:
        if "parities" not in self._cache:
            self._cache["parities"] = plaquette_parities(self.n_qubits, self.plaquettes)
        return self._cache["parities"]

    def h0_diagonal(self) -> np.ndarray:
        """Diagonal of ``H_J + H_C`` over all basis states."""
        if "h0" not in self._cache:
            self._cache["h0"] = self.field_diagonal() - self.strengths @ self.constraint_parities()
        return self._cache["h0"]

    def pattern_indices(self) -> np.ndarray:
        return np.array([z.value for z in self.patterns], dtype=np.int64)


def sweep_hamiltonian(p: SweepProblem, t: float) -> np.ndarray:
    """Dense real-symmetric ``H(t)``."""
    T = p.schedule.total_time
    if not -1e-12 <= t <= T * (1 + 1e-12):
        raise ValueError(f"t={t} outside [0, {T}]")
    H = p.schedule.eps(t) * transverse_field_matrix(p.n_qubits)
    H[np.diag_indices(p.dim)] += p.schedule.delta(t) * p.h0_diagonal()
    return H


def hamiltonian_derivative(p: SweepProblem) -> np.ndarray:
    """``dH/dt = (H0 - V) / T``, constant along the linear sweep."""
    D = -transverse_field_matrix(p.n_qubits)
    D[np.diag_indices(p.dim)] += p.h0_diagonal()
    return D / p.schedule.total_time


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of every column real and positive."""
    idx = np.argmax(np.abs(vectors), axis=0)
    lead = vectors[idx, np.arange(vectors.shape[1])]
    return vectors * (np.abs(lead) / lead)[None, :]


def eigensystem(H: np.ndarray, count: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Lowest ``count`` eigenpairs of a symmetric matrix, ascending."""
    if not np.allclose(H, H.conj().T, atol=1e-12 * max(1.0, np.abs(H).max())):
        raise ValueError("matrix is not Hermitian")
    dim = H.shape[0]
    count = dim if count is None else min(count, dim)
    try:
        if count == dim:
            w, v = scipy.linalg.eigh(H, driver="evd")
        else:
            w, v = scipy.linalg.eigh(H, subset_by_index=(0, count - 1))
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigensolver failed: {exc}") from exc
    return w, fix_phases(v)


def minus_state(n_qubits: int) -> np.ndarray:
    """Ground state of ``V``: the product of single-qubit ``|->`` states."""
    dim = 1 << n_qubits
    signs = 1 - 2 * (np.bitwise_count(np.arange(dim, dtype=np.uint64)) & 1).astype(float)
    return signs.astype(complex) / np.sqrt(dim)


# ---------------------------------------------------------------------------
# integrator


RESYNC_EVERY = 64


@numba.njit(cache=True)
def _apply_field_rotation(psi, n_qubits, angle):
    """``psi <- exp(-i angle V) psi`` as a product of single-qubit rotations."""
    c = np.cos(angle)
    s = np.sin(angle)
    dim = psi.shape[0]
    for q in range(n_qubits):
        bit = 1 << q
        for blk in range(0, dim, 2 * bit):
            for i in range(blk, blk + bit):
                a = psi[i]
                b = psi[i + bit]
                psi[i] = complex(c * a.real + s * b.imag, c * a.imag - s * b.real)
                psi[i + bit] = complex(c * b.real + s * a.imag, c * b.imag - s * a.real)


@numba.njit(cache=True)
def _apply_diagonal(psi, diag, angle):
    for i in range(psi.shape[0]):
        psi[i] *= np.exp(-1j * angle * diag[i])


@numba.njit(cache=True)
def _evolve(psi, diag, n_qubits, total_time, t_start, n_steps, dt, weights, sample_steps, samples, frozen):
    """Advance ``psi`` in place through ``n_steps`` composed steps.

    With ``frozen >= 0`` the Hamiltonian is held at ``H(frozen)``.  Otherwise the
    diagonal flow between consecutive substep midpoints is merged into one
    phase whose angle is linear in the step index; its step-to-step factor is
    carried as a running phasor instead of re-evaluating exponentials.
    """
    n_sub = weights.shape[0]
    dim = psi.shape[0]
    k = 0
    if k < sample_steps.shape[0] and sample_steps[k] == 0:
        samples[k, :] = psi
        k += 1
    if frozen >= 0.0:
        d = frozen / total_time
        e = 1.0 - d
        for step in range(1, n_steps + 1):
            for j in range(n_sub):
                h = weights[j] * dt
                _apply_diagonal(psi, diag, 0.5 * h * d)
                _apply_field_rotation(psi, n_qubits, h * e)
                _apply_diagonal(psi, diag, 0.5 * h * d)
            if k < sample_steps.shape[0] and sample_steps[k] == step:
                samples[k, :] = psi
                k += 1
        return
    # midpoint offsets of the substeps relative to the start of a step
    mid = np.empty(n_sub)
    acc = 0.0
    for j in range(n_sub):
        mid[j] = acc + 0.5 * weights[j] * dt
        acc += weights[j] * dt
    fixed = np.empty((n_sub, dim), dtype=np.complex128)
    running = np.empty((n_sub, dim), dtype=np.complex128)
    increment = np.empty((n_sub, dim), dtype=np.complex128)
    beta = np.empty(n_sub)
    for j in range(n_sub):
        prev = mid[j - 1] if j > 0 else mid[n_sub - 1] - dt
        alpha = (mid[j] - prev) * (2.0 * t_start + mid[j] + prev) / (2.0 * total_time)
        beta[j] = (mid[j] - prev) * dt / total_time
        for i in range(dim):
            fixed[j, i] = np.exp(-1j * alpha * diag[i])
            increment[j, i] = np.exp(-1j * beta[j] * diag[i])
            running[j, i] = 1.0
    m0 = t_start + mid[0]
    _apply_diagonal(psi, diag, (m0 * m0 - t_start * t_start) / (2.0 * total_time))
    for step in range(n_steps):
        t = t_start + step * dt
        for j in range(n_sub):
            if step > 0 or j > 0:
                for i in range(dim):
                    psi[i] *= fixed[j, i] * running[j, i]
            m = t + mid[j]
            _apply_field_rotation(psi, n_qubits, weights[j] * dt * (1.0 - m / total_time))
            if (step + 1) % RESYNC_EVERY == 0:
                # repeated products lose unit modulus; refresh from the closed form
                for i in range(dim):
                    running[j, i] = np.exp(-1j * (beta[j] * (step + 1)) * diag[i])
            else:
                for i in range(dim):
                    running[j, i] *= increment[j, i]
        m_last = t + mid[n_sub - 1]
        t_end = t + dt
        closing = (t_end * t_end - m_last * m_last) / (2.0 * total_time)
        if step == n_steps - 1:
            _apply_diagonal(psi, diag, closing)
            if k < sample_steps.shape[0] and sample_steps[k] == step + 1:
                samples[k, :] = psi
                k += 1
        elif k < sample_steps.shape[0] and sample_steps[k] == step + 1:
            for i in range(dim):
                samples[k, i] = psi[i] * np.exp(-1j * closing * diag[i])
            k += 1


def propagate(p: SweepProblem, psi0: np.ndarray, t0: float, t1: float, n_steps: int,
              sample_steps: np.ndarray | None = None, frozen_at: float | None = None):
    """Evolve from ``t0`` to ``t1`` in ``n_steps`` equal steps; returns (psi, samples)."""
    psi = np.array(psi0, dtype=np.complex128, copy=True)
    if sample_steps is None:
        sample_steps = np.zeros(0, dtype=np.int64)
    sample_steps = np.asarray(sample_steps, dtype=np.int64)
    samples = np.zeros((len(sample_steps), psi.size), dtype=np.complex128)
    dt = (t1 - t0) / n_steps
    _evolve(psi, p.h0_diagonal(), p.n_qubits, float(p.schedule.total_time), float(t0), int(n_steps),
            float(dt), SUZUKI4, sample_steps, samples, -1.0 if frozen_at is None else float(frozen_at))
    return psi, samples


@dataclass
class SweepTrajectory:
    sample_times: np.ndarray
    states: np.ndarray  # (n_samples, dim)
    energies: np.ndarray  # (n_samples, n_levels) lowest instantaneous energies
    overlaps: np.ndarray  # (n_samples, M) p_n(t), continuity-tracked labels
    p_bulk: np.ndarray
    final_amplitudes: np.ndarray  # <z_n|psi(T)>
    norm_drift: float
    adiabaticity: "AdiabaticityTrace | None" = None

    @property
    def final_populations(self) -> np.ndarray:
        return np.abs(self.final_amplitudes) ** 2


def _track_labels(prev: np.ndarray, current: np.ndarray) -> np.ndarray:
    """Permutation of ``current`` columns maximising overlap with ``prev`` columns."""
    weight = np.abs(prev.conj().T @ current)
    rows, cols = linear_sum_assignment(-weight)
    return cols[np.argsort(rows)]


def final_amplitudes(p: SweepProblem, n_steps: int | None = None) -> np.ndarray:
    """``<z_n|psi(T)>`` from the default initial state; the cheap path used by optimizers."""
    psi, _ = propagate(p, minus_state(p.n_qubits), 0.0, p.schedule.total_time,
                       n_steps or p.schedule.n_steps)
    return psi[p.pattern_indices()]


def evolve_sweep(p: SweepProblem, initial: np.ndarray | None = None, n_levels: int | None = None,
                 diagnostics: bool = True, adiabaticity: bool = False) -> SweepTrajectory:
    """Integrate the sweep and record overlaps with the instantaneous low-energy states.

    With ``adiabaticity`` the full spectrum is computed at every interior sample
    and the adiabaticity parameters are attached (NaN at ``t = 0`` and ``t = T``).
    """
    sched = p.schedule
    M = len(p.patterns)
    psi0 = minus_state(p.n_qubits) if initial is None else np.asarray(initial, dtype=complex)
    norm0 = np.linalg.norm(psi0)
    steps = sched.sample_steps()
    times = steps * (sched.total_time / sched.n_steps)
    psi, samples = propagate(p, psi0, 0.0, sched.total_time, sched.n_steps, steps)
    norms = np.linalg.norm(samples, axis=1)
    drift = float(np.max(np.abs(norms - norm0)))
    if drift > NORM_TOLERANCE:
        raise RuntimeError(
            f"norm drifted by {drift:.2e}; step size {sched.total_time / sched.n_steps:.3g} is too large"
        )
    n_levels = n_levels or min(M + 3, p.dim)
    energies = np.full((len(times), n_levels), np.nan)
    overlaps = np.full((len(times), M), np.nan)
    trace = None
    if adiabaticity:
        dH = hamiltonian_derivative(p)
        A = np.full((len(times), M, p.dim), np.nan)
        B = np.full((len(times), M), np.nan)
        flags = np.zeros((len(times), M, p.dim), dtype=bool)
    if diagnostics or adiabaticity:
        prev = None
        for i, t in enumerate(times):
            interior = 0.0 < t < sched.total_time
            full = adiabaticity and interior
            w, v = eigensystem(sweep_hamiltonian(p, t), None if full else max(n_levels, M))
            if full:
                A[i], B[i], flags[i] = adiabaticity_from_eigensystem(w, v, dH, M)
            energies[i] = w[:n_levels]
            low = v[:, :M]
            if prev is not None:
                low = low[:, _track_labels(prev, low)]
            prev = low
            overlaps[i] = np.abs(low.conj().T @ samples[i]) ** 2
        if adiabaticity:
            trace = AdiabaticityTrace(times, A, B, flags)
    p_bulk = norms**2 - overlaps.sum(axis=1)
    return SweepTrajectory(times, samples, energies, overlaps, p_bulk, psi[p.pattern_indices()], drift, trace)


@dataclass
class AdiabaticityTrace:
    sample_times: np.ndarray
    A: np.ndarray  # (n_samples, M, n_levels): |<n|dH|m>| / (E_n - E_m)^2, n < M
    B: np.ndarray  # (n_samples, M): sum over bulk levels m >= M
    degenerate: np.ndarray  # flags |E_n - E_m| < tolerance

    def pair(self, n: int, m: int) -> np.ndarray:
        """``A_nm(t)`` with 1-based level labels."""
        return self.A[:, n - 1, m - 1]


def adiabaticity_from_eigensystem(energies: np.ndarray, vectors: np.ndarray, dH: np.ndarray, M: int):
    """``A[n, m]`` for the lowest ``M`` levels against all levels, plus bulk sums ``B[n]``."""
    coupling = np.abs(vectors[:, :M].conj().T @ dH @ vectors)
    gaps = energies[:M, None] - energies[None, :]
    degenerate = np.abs(gaps) < DEGENERACY_TOLERANCE
    np.fill_diagonal(degenerate[:, :M], False)
    with np.errstate(divide="ignore", invalid="ignore"):
        A = coupling / gaps**2
    A[:, :M][np.eye(M, dtype=bool)] = 0.0
    A[degenerate] = np.nan
    B = np.nansum(A[:, M:], axis=1)
    return A, B, degenerate


def adiabaticity_metrics(p: SweepProblem, M: int | None = None,
                         times: Sequence[float] | None = None) -> AdiabaticityTrace:
    """Adiabaticity parameters at interior sample times, from full eigensystems."""
    M = M or len(p.patterns)
    T = p.schedule.total_time
    if times is None:
        times = np.linspace(0.0, T, p.schedule.n_samples + 2)[1:-1]
    times = np.asarray(times, dtype=float)
    if np.any(times <= 0) or np.any(times >= T):
        raise ValueError("adiabaticity samples must lie strictly inside (0, T)")
    dH = hamiltonian_derivative(p)
    A = np.zeros((len(times), M, p.dim))
    B = np.zeros((len(times), M))
    flags = np.zeros((len(times), M, p.dim), dtype=bool)
    for i, t in enumerate(times):
        w, v = scipy.linalg.eigh(sweep_hamiltonian(p, t), driver="evd")
        A[i], B[i], flags[i] = adiabaticity_from_eigensystem(w, v, dH, M)
    return AdiabaticityTrace(times, A, B, flags)
