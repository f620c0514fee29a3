"""k-local Hebbian learning, pattern stability and the storage-capacity bound."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .spinmodel import SpinConfiguration, SpinGlassHamiltonian, as_config, parities


@dataclass(frozen=True)
class PatternSet:
    n: int
    patterns: tuple[SpinConfiguration, ...]

    def __post_init__(self):
        pats = tuple(as_config(p, self.n) for p in self.patterns)
        if not pats:
            raise ValueError("a pattern set needs at least one pattern")
        if len(set(pats)) != len(pats):
            raise ValueError("patterns must be pairwise distinct")
        object.__setattr__(self, "patterns", pats)

    @classmethod
    def from_strings(cls, strings: Sequence[str]) -> "PatternSet":
        if not strings:
            raise ValueError("a pattern set needs at least one pattern")
        return cls(len(strings[0]), tuple(SpinConfiguration.from_string(s) for s in strings))

    @classmethod
    def random(cls, n: int, m: int, rng: np.random.Generator) -> "PatternSet":
        """``m`` distinct configurations drawn uniformly without replacement."""
        values = rng.choice(1 << n, size=m, replace=False)
        return cls(n, tuple(SpinConfiguration(int(v), n) for v in values))

    def __len__(self) -> int:
        return len(self.patterns)

    def __iter__(self):
        return iter(self.patterns)

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.patterns], dtype=np.int64)

    def to_dict(self) -> dict:
        return {"N": self.n, "patterns": [str(p) for p in self.patterns]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "PatternSet":
        ps = cls.from_strings(list(data["patterns"]))
        if "N" in data and int(data["N"]) != ps.n:
            raise ValueError(f"declared N={data['N']} but patterns have length {ps.n}")
        return ps


def hebbian_couplings(patterns: PatternSet, orders: Iterable[int]) -> SpinGlassHamiltonian:
    """``J_chi = -(1/M) sum_m prod_i x^m_{chi_i}`` for every tuple of every order."""
    orders = sorted(set(orders))
    if not orders:
        raise ValueError("need at least one interaction order")
    if orders[0] < 1 or orders[-1] > patterns.n:
        raise ValueError(f"orders must lie in 1..{patterns.n}")
    vals = patterns.values
    return SpinGlassHamiltonian(
        patterns.n, {k: -parities(vals, patterns.n, k).mean(axis=0) for k in orders}
    )


def is_local_minimum(h: SpinGlassHamiltonian, s) -> bool:
    """True when no single spin flip lowers the energy (ties count as stable)."""
    cfg = as_config(s, h.n)
    flips = cfg.value ^ (np.int64(1) << np.arange(h.n, dtype=np.int64))
    E = h.energies(np.append(flips, cfg.value))
    return bool(np.all(E[:-1] >= E[-1]))


def capacity_upper_bound(n: int, d: int) -> int:
    """Threshold-logic bound ``sum_{i=1}^{d-1} C(n-1, i)`` for one- to ``d``-body networks."""
    if not 1 <= d <= n:
        raise ValueError("need 1 <= d <= n")
    return sum(math.comb(n - 1, i) for i in range(1, d))


def local_fields(h: SpinGlassHamiltonian, s) -> np.ndarray:
    """``sum_j J_ij s_j + theta_i`` for a network with orders within {1, 2}.

    The classical threshold form of the stability condition is
    ``sign(local_fields) == -s`` here, because couplings use the plus-sign
    energy convention.
    """
    if set(h.orders) - {1, 2}:
        raise ValueError("local fields are defined for one- and two-body networks only")
    spins = as_config(s, h.n).spins().astype(float)
    field = np.zeros(h.n)
    if 1 in h.couplings:
        field += h.couplings[1]
    if 2 in h.couplings:
        for (i, j), J in zip(h.tuples(2), h.couplings[2]):
            field[i] += J * spins[j]
            field[j] += J * spins[i]
    return field
