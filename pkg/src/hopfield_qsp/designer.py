"""Monte Carlo ground-state design by Hebbian relearning and unlearning.

Starting from the Hebbian network of the patterns, every step either relearns
the highest-energy pattern (probability ``p_relearn``) or unlearns the ``r``
lowest-lying bulk configurations, with strengths drawn uniformly per
interaction order.  A proposal whose ratio ``delta_p / delta_b`` reaches the
target ends the run; otherwise it is accepted with probability
``min(1, exp(-dF / T))`` where ``dF = d(delta_p) - d(delta_b)``.

Only the union of Hamming balls of radius ``radius`` around the patterns is
ever evaluated.  Energies on that set are updated incrementally through the
Krawtchouk identity and re-checked against a full recomputation every
``check_every`` steps.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numba
import numpy as np

from .hopfield import PatternSet, hebbian_couplings
from .spinmodel import (
    EnergyTable,
    SpinGlassHamiltonian,
    as_config,
    krawtchouk_table,
    parities,
    restricted_spectrum,
    tuple_masks,
)

RELEARN = "relearn"
UNLEARN = "unlearn"
_KINDS = (RELEARN, UNLEARN)

DRIFT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class DesignParams:
    delta_star: float = 0.05
    radius: int = 2
    r: int = 1
    p_relearn: float = 2.0 / 3.0
    phi_max: float = 0.02
    eta_max: float = 0.02
    temp_mc: float = 1.0
    max_steps: int = 100_000
    seed: int = 0
    check_every: int = 100

    def __post_init__(self):
        if not self.delta_star > 0:
            raise ValueError("delta_star must be positive")
        if not 0.0 <= self.p_relearn <= 1.0:
            raise ValueError("p_relearn must lie in [0, 1]")
        if not (self.phi_max > 0 and self.eta_max > 0):
            raise ValueError("phi_max and eta_max must be positive")
        if self.r < 1:
            raise ValueError("r must be >= 1")
        if self.radius < 1:
            raise ValueError("radius must be >= 1")
        if self.temp_mc <= 0:
            raise ValueError("temp_mc must be positive")
        if self.max_steps < 0 or self.check_every < 1:
            raise ValueError("max_steps must be >= 0 and check_every >= 1")


@dataclass(frozen=True)
class SpectralMetrics:
    delta_p: float
    delta_b: float
    delta: float | None  # None when delta_b <= 0

    @classmethod
    def from_values(cls, delta_p: float, delta_b: float) -> "SpectralMetrics":
        return cls(float(delta_p), float(delta_b), float(delta_p / delta_b) if delta_b > 0 else None)


def spectral_metrics(table: EnergyTable) -> SpectralMetrics:
    """Pattern bandwidth, pattern-to-bulk gap and their ratio."""
    bulk = table.bulk_mask
    if not bulk.any():
        raise ValueError("energy table has no bulk configurations")
    pe = table.energies[table.pattern_rows]
    return SpectralMetrics.from_values(pe.max() - pe.min(), table.energies[bulk].min() - pe.max())


def apply_update(
    h: SpinGlassHamiltonian,
    kind: str,
    targets: Sequence,
    strengths: Mapping[int, float] | Sequence[float],
) -> SpinGlassHamiltonian:
    """Relearn (lower) one pattern or unlearn (raise) bulk configurations.

    ``strengths`` holds one positive value per interaction order of ``h``.
    """
    if kind not in _KINDS:
        raise ValueError(f"kind must be one of {_KINDS}")
    if not isinstance(strengths, Mapping):
        strengths = dict(zip(h.orders, strengths))
    if set(strengths) != set(h.orders):
        raise ValueError("need exactly one strength per interaction order")
    if any(v <= 0 for v in strengths.values()):
        raise ValueError("strengths must be positive")
    targets = [as_config(t, h.n) for t in targets]
    if kind == RELEARN and len(targets) != 1:
        raise ValueError("relearning takes exactly one target")
    if not targets:
        raise ValueError("no targets given")
    sign = -1.0 if kind == RELEARN else 1.0
    vals = np.array([t.value for t in targets], dtype=np.int64)
    new = {}
    for k, J in h.couplings.items():
        new[k] = J + sign * strengths[k] * parities(vals, h.n, k).sum(axis=0)
    return SpinGlassHamiltonian(h.n, new)


@dataclass
class DesignTrace:
    """Per-step record of proposals; metrics are those of the proposed couplings."""

    kind: np.ndarray  # 0 relearn, 1 unlearn
    accepted: np.ndarray
    delta_p: np.ndarray
    delta_b: np.ndarray
    delta: np.ndarray  # nan where undefined

    def __len__(self) -> int:
        return len(self.kind)

    def rows(self) -> list[tuple]:
        return [
            (i + 1, _KINDS[k], bool(a), dp, db, None if math.isnan(d) else d)
            for i, (k, a, dp, db, d) in enumerate(
                zip(self.kind.tolist(), self.accepted.tolist(), self.delta_p.tolist(),
                    self.delta_b.tolist(), self.delta.tolist())
            )
        ]

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "kind", "accepted", "delta_p", "delta_b", "delta"])
        for step, kind, acc, dp, db, d in self.rows():
            w.writerow([step, kind, int(acc), repr(dp), repr(db), "" if d is None else repr(d)])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


@dataclass
class DesignReport:
    final_hamiltonian: SpinGlassHamiltonian
    steps: int
    converged: bool
    trace: DesignTrace
    final_metrics: SpectralMetrics
    initial_metrics: SpectralMetrics
    table_size: int
    max_drift: float = 0.0
    scale: float = 1.0  # factor applied in the final rescaling to max|J| = 1
    unscaled_hamiltonian: SpinGlassHamiltonian | None = field(default=None, repr=False)


# ---------------------------------------------------------------------------
# jitted inner loop


@numba.njit(cache=True)
def _popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@numba.njit(cache=True)
def _shift_energies(energies, configs, target, strengths, kraw, sign):
    n_orders = strengths.shape[0]
    for s in range(configs.shape[0]):
        d = _popcount(configs[s] ^ target)
        acc = 0.0
        for a in range(n_orders):
            acc += strengths[a] * kraw[a, d]
        energies[s] += sign * acc


@numba.njit(cache=True)
def _shift_couplings(J, masks, order_idx, target, strengths, sign):
    for t in range(J.shape[0]):
        par = 1.0 - 2.0 * (_popcount(target & masks[t]) & 1)
        J[t] += sign * strengths[order_idx[t]] * par


@numba.njit(cache=True)
def _metrics(energies, pattern_rows, bulk_rows):
    pmax = -np.inf
    pmin = np.inf
    for i in range(pattern_rows.shape[0]):
        e = energies[pattern_rows[i]]
        if e > pmax:
            pmax = e
        if e < pmin:
            pmin = e
    bmin = np.inf
    for i in range(bulk_rows.shape[0]):
        e = energies[bulk_rows[i]]
        if e < bmin:
            bmin = e
    return pmax - pmin, bmin - pmax


@numba.njit(cache=True)
def _design_chunk(
    J, masks, order_idx, energies, configs, pattern_rows, bulk_rows, kraw,
    uniforms, p_relearn, phi_max, eta_max, temp, r, delta_star, dp, db,
    out_kind, out_acc, out_dp, out_db, out_delta, offset,
):
    """Run ``uniforms.shape[0]`` steps; returns (steps taken, converged, dp, db)."""
    n_orders = kraw.shape[0]
    strengths = np.empty(n_orders)
    J_old = J.copy()
    E_old = energies.copy()
    chosen = np.empty(r, dtype=np.int64)
    for step in range(uniforms.shape[0]):
        J_old[:] = J
        E_old[:] = energies
        relearn = uniforms[step, 0] < p_relearn
        if relearn:
            for a in range(n_orders):
                strengths[a] = phi_max * uniforms[step, 1 + a]
            best = pattern_rows[0]
            for i in range(1, pattern_rows.shape[0]):
                if energies[pattern_rows[i]] > energies[best]:
                    best = pattern_rows[i]
            target = configs[best]
            _shift_energies(energies, configs, target, strengths, kraw, -1.0)
            _shift_couplings(J, masks, order_idx, target, strengths, -1.0)
        else:
            for a in range(n_orders):
                strengths[a] = eta_max * uniforms[step, 1 + a]
            n_pick = min(r, bulk_rows.shape[0])
            # selection on the pre-update energies; rows are in lexicographic order
            for b in range(n_pick):
                best = -1
                for i in range(bulk_rows.shape[0]):
                    row = bulk_rows[i]
                    taken = False
                    for c in range(b):
                        if chosen[c] == row:
                            taken = True
                    if taken:
                        continue
                    if best < 0 or E_old[row] < E_old[best]:
                        best = row
                chosen[b] = best
            for b in range(n_pick):
                target = configs[chosen[b]]
                _shift_energies(energies, configs, target, strengths, kraw, 1.0)
                _shift_couplings(J, masks, order_idx, target, strengths, 1.0)
        new_dp, new_db = _metrics(energies, pattern_rows, bulk_rows)
        i_out = offset + step
        out_kind[i_out] = 0 if relearn else 1
        out_dp[i_out] = new_dp
        out_db[i_out] = new_db
        out_delta[i_out] = new_dp / new_db if new_db > 0 else np.nan
        if new_db > 0 and new_dp / new_db <= delta_star:
            out_acc[i_out] = True
            return step + 1, True, new_dp, new_db
        dF = (new_dp - dp) - (new_db - db)
        accept = dF <= 0.0 or uniforms[step, 1 + n_orders] < np.exp(-dF / temp)
        out_acc[i_out] = accept
        if accept:
            dp = new_dp
            db = new_db
        else:
            J[:] = J_old
            energies[:] = E_old
    return uniforms.shape[0], False, dp, db


def acceptance_probability(dF: float, temp: float) -> float:
    return 1.0 if dF <= 0 else math.exp(-dF / temp)


def design_ground_states(
    patterns: PatternSet, orders: Iterable[int], params: DesignParams = DesignParams()
) -> DesignReport:
    """Run the relearn/unlearn Monte Carlo loop until ``delta <= delta_star``."""
    orders = sorted(set(orders))
    n = patterns.n
    h0 = hebbian_couplings(patterns, orders)
    table = restricted_spectrum(h0, patterns.patterns, params.radius)
    initial = spectral_metrics(table)

    masks = np.concatenate([tuple_masks(n, k) for k in orders])
    order_idx = np.concatenate([np.full(math.comb(n, k), a, dtype=np.int64) for a, k in enumerate(orders)])
    J = np.concatenate([h0.couplings[k] for k in orders])
    configs = table.configs.astype(np.int64)
    energies = table.energies.copy()
    pattern_rows = table.pattern_rows.astype(np.int64)
    bulk_rows = np.flatnonzero(table.bulk_mask).astype(np.int64)
    kraw = krawtchouk_table(n, orders)
    parity_matrix = np.concatenate([parities(configs, n, k) for k in orders], axis=1).astype(float)

    cap = params.max_steps
    out_kind = np.zeros(cap, dtype=np.int8)
    out_acc = np.zeros(cap, dtype=np.bool_)
    out_dp = np.zeros(cap)
    out_db = np.zeros(cap)
    out_delta = np.full(cap, np.nan)

    rng = np.random.Generator(np.random.PCG64(params.seed))
    width = 2 + len(orders)
    dp, db = initial.delta_p, initial.delta_b
    converged = initial.delta is not None and initial.delta <= params.delta_star
    steps = 0
    max_drift = 0.0
    while not converged and steps < cap:
        chunk = min(params.check_every, cap - steps)
        uniforms = rng.random((chunk, width))
        taken, converged, dp, db = _design_chunk(
            J, masks, order_idx, energies, configs, pattern_rows, bulk_rows, kraw,
            uniforms, params.p_relearn, params.phi_max, params.eta_max, params.temp_mc,
            params.r, params.delta_star, dp, db,
            out_kind, out_acc, out_dp, out_db, out_delta, steps,
        )
        steps += taken
        drift = float(np.max(np.abs(parity_matrix @ J - energies)))
        max_drift = max(max_drift, drift)
        if drift > DRIFT_TOLERANCE:
            raise RuntimeError(f"incremental energies drifted by {drift:.3g} after {steps} steps")

    trace = DesignTrace(
        out_kind[:steps].copy(), out_acc[:steps].copy(), out_dp[:steps].copy(),
        out_db[:steps].copy(), out_delta[:steps].copy(),
    )
    offsets = np.cumsum([0] + [math.comb(n, k) for k in orders])
    unscaled = SpinGlassHamiltonian(n, {k: J[offsets[a]:offsets[a + 1]].copy() for a, k in enumerate(orders)})
    scale = unscaled.max_abs_coupling()
    scale = 1.0 / scale if scale > 0 else 1.0
    final = unscaled.scaled(scale)
    final_metrics = spectral_metrics(restricted_spectrum(final, patterns.patterns, params.radius))
    return DesignReport(
        final_hamiltonian=final,
        steps=steps,
        converged=bool(converged),
        trace=trace,
        final_metrics=final_metrics,
        initial_metrics=initial,
        table_size=len(table),
        max_drift=max_drift,
        scale=scale,
        unscaled_hamiltonian=unscaled,
    )
