"""k-local all-to-all Ising Hamiltonians over classical spin configurations.

Conventions used throughout the package:

* a configuration of ``n`` spins is an ``n``-character string of ``'0'``/``'1'``;
  bit 0 is spin +1 and bit 1 is spin -1;
* the leftmost character is spin index 0 and is stored as the most significant
  bit of the integer value, so integer order equals lexicographic string order;
* energies are ``E(s) = sum_k sum_chi J_chi prod_{i in chi} s_i`` (plus sign).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

EQ6_PLUS = "eq6_plus"
PAPER_EXAMPLE_MINUS = "paper_example_minus"
SIGN_CONVENTIONS = (EQ6_PLUS, PAPER_EXAMPLE_MINUS)


@dataclass(frozen=True, order=True)
class SpinConfiguration:
    """An ``n``-bit spin configuration stored as an integer bitmask."""

    value: int
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")
        if not 0 <= self.value < (1 << self.n) and not (self.n == 0 and self.value == 0):
            raise ValueError(f"value {self.value} does not fit in {self.n} bits")

    @classmethod
    def from_string(cls, text: str) -> "SpinConfiguration":
        text = text.strip()
        if text and set(text) - {"0", "1"}:
            raise ValueError(f"configuration literal must be 0/1 characters: {text!r}")
        return cls(int(text, 2) if text else 0, len(text))

    @classmethod
    def from_spins(cls, spins: Sequence[int]) -> "SpinConfiguration":
        bits = "".join("0" if s > 0 else "1" for s in spins)
        return cls.from_string(bits)

    def __str__(self) -> str:
        return format(self.value, f"0{self.n}b") if self.n else ""

    def bit(self, i: int) -> int:
        return (self.value >> (self.n - 1 - i)) & 1

    def bits(self) -> np.ndarray:
        return config_bits(np.array([self.value]), self.n)[0]

    def spins(self) -> np.ndarray:
        return 1 - 2 * self.bits()

    def flip(self, i: int) -> "SpinConfiguration":
        return SpinConfiguration(self.value ^ (1 << (self.n - 1 - i)), self.n)

    def hamming(self, other: "SpinConfiguration") -> int:
        if other.n != self.n:
            raise ValueError("length mismatch")
        return (self.value ^ other.value).bit_count()


def as_config(x, n: int | None = None) -> SpinConfiguration:
    """Coerce a string, ``SpinConfiguration`` or ``(value, n)`` integer to a configuration."""
    if isinstance(x, SpinConfiguration):
        cfg = x
    elif isinstance(x, str):
        cfg = SpinConfiguration.from_string(x)
    elif isinstance(x, (int, np.integer)):
        if n is None:
            raise ValueError("integer configurations need an explicit length")
        cfg = SpinConfiguration(int(x), n)
    else:
        raise TypeError(f"cannot interpret {x!r} as a spin configuration")
    if n is not None and cfg.n != n:
        raise ValueError(f"configuration {cfg} has length {cfg.n}, expected {n}")
    return cfg


def config_bits(values: np.ndarray, n: int) -> np.ndarray:
    """Bit matrix of shape ``(len(values), n)``; column 0 is the leftmost spin."""
    values = np.asarray(values, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((values[:, None] >> shifts[None, :]) & 1).astype(np.int8)


def config_spins(values: np.ndarray, n: int) -> np.ndarray:
    return (1 - 2 * config_bits(values, n)).astype(np.int8)


def popcount(x: np.ndarray) -> np.ndarray:
    """Elementwise number of set bits of a non-negative int64 array."""
    x = np.asarray(x, dtype=np.uint64)
    return np.bitwise_count(x).astype(np.int64)


# ---------------------------------------------------------------------------
# index tuples in colexicographic order


def colex_rank(chi: Sequence[int]) -> int:
    """Rank of a strictly increasing tuple among all tuples of its length (colex order)."""
    return sum(math.comb(c, i + 1) for i, c in enumerate(chi))


def index_tuples(n: int, k: int) -> np.ndarray:
    """All strictly increasing ``k``-tuples over ``range(n)`` in colex order, shape ``(C(n,k), k)``."""
    combos = list(itertools.combinations(range(n), k))
    combos.sort(key=lambda c: tuple(reversed(c)))
    return np.array(combos, dtype=np.int64).reshape(len(combos), k)


def tuple_masks(n: int, k: int) -> np.ndarray:
    """Bitmask of each colex-ordered ``k``-tuple, consistent with the configuration encoding."""
    idx = index_tuples(n, k)
    if k == 0:
        return np.zeros(1, dtype=np.int64)
    return np.sum(np.int64(1) << (n - 1 - idx), axis=1)


def parities(values: np.ndarray, n: int, k: int) -> np.ndarray:
    """Matrix ``prod_{i in chi} s_i`` of shape ``(len(values), C(n,k))``."""
    masks = tuple_masks(n, k)
    values = np.asarray(values, dtype=np.int64)
    odd = popcount(values[:, None] & masks[None, :]) & 1
    return 1 - 2 * odd


# ---------------------------------------------------------------------------
# Hamiltonian


@dataclass
class SpinGlassHamiltonian:
    """All-to-all Ising Hamiltonian with interaction orders ``orders``.

    ``couplings[k]`` is a dense array over the colex-ordered ``k``-tuples.
    Couplings are always stored in the plus-sign convention; inputs tagged
    ``paper_example_minus`` are negated on the way in.
    """

    n: int
    couplings: dict[int, np.ndarray]
    sign_convention: str = EQ6_PLUS
    _tuples: dict[int, np.ndarray] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.sign_convention not in SIGN_CONVENTIONS:
            raise ValueError(f"unknown sign convention {self.sign_convention!r}")
        table = {}
        for k, J in sorted(self.couplings.items()):
            if not 0 <= k <= self.n:
                raise ValueError(f"interaction order {k} outside 0..{self.n}")
            J = np.array(J, dtype=float)
            if J.shape != (math.comb(self.n, k),):
                raise ValueError(f"order {k} needs {math.comb(self.n, k)} couplings, got {J.shape}")
            table[k] = J
        if self.sign_convention == PAPER_EXAMPLE_MINUS:
            table = {k: -J for k, J in table.items()}
            self.sign_convention = EQ6_PLUS
        self.couplings = table

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(self.couplings)

    @classmethod
    def zeros(cls, n: int, orders: Iterable[int]) -> "SpinGlassHamiltonian":
        return cls(n, {k: np.zeros(math.comb(n, k)) for k in sorted(set(orders))})

    @classmethod
    def from_terms(
        cls,
        n: int,
        orders: Iterable[int],
        terms: Mapping[tuple[int, ...], float] | Iterable[tuple[Sequence[int], float]],
        sign_convention: str = EQ6_PLUS,
    ) -> "SpinGlassHamiltonian":
        """Build from ``{indices: J}``; unspecified couplings of the listed orders are zero."""
        orders = sorted(set(orders))
        table = {k: np.zeros(math.comb(n, k)) for k in orders}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for chi, J in items:
            chi = tuple(int(i) for i in chi)
            if any(b <= a for a, b in zip(chi, chi[1:])):
                raise ValueError(f"indices must be strictly increasing: {chi}")
            if chi and (chi[0] < 0 or chi[-1] >= n):
                raise ValueError(f"indices out of range: {chi}")
            if len(chi) not in table:
                raise ValueError(f"term {chi} has order {len(chi)} not in {orders}")
            table[len(chi)][colex_rank(chi)] += float(J)
        return cls(n, table, sign_convention)

    def tuples(self, k: int) -> np.ndarray:
        if k not in self._tuples:
            self._tuples[k] = index_tuples(self.n, k)
        return self._tuples[k]

    def terms(self) -> list[tuple[tuple[int, ...], float]]:
        """All ``(indices, J)`` pairs, grouped by order, colex order within an order."""
        out = []
        for k, J in self.couplings.items():
            out.extend((tuple(int(i) for i in chi), float(j)) for chi, j in zip(self.tuples(k), J))
        return out

    def coupling(self, chi: Sequence[int]) -> float:
        chi = tuple(chi)
        return float(self.couplings[len(chi)][colex_rank(chi)])

    def copy(self) -> "SpinGlassHamiltonian":
        return SpinGlassHamiltonian(self.n, {k: J.copy() for k, J in self.couplings.items()})

    def scaled(self, factor: float) -> "SpinGlassHamiltonian":
        return SpinGlassHamiltonian(self.n, {k: factor * J for k, J in self.couplings.items()})

    def max_abs_coupling(self) -> float:
        return max((float(np.max(np.abs(J))) for J in self.couplings.values() if J.size), default=0.0)

    def energies(self, values: np.ndarray) -> np.ndarray:
        """Energies of many configurations given as integer bitmasks."""
        values = np.asarray(values, dtype=np.int64)
        E = np.zeros(len(values))
        for k, J in self.couplings.items():
            E += parities(values, self.n, k) @ J
        return E

    def to_dict(self) -> dict:
        return {
            "N": self.n,
            "K": list(self.orders),
            "sign_convention": EQ6_PLUS,
            "terms": [{"indices": list(chi), "J": J} for chi, J in self.terms()],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "SpinGlassHamiltonian":
        terms = [(tuple(t["indices"]), t["J"]) for t in data.get("terms", [])]
        return cls.from_terms(
            int(data["N"]), data["K"], terms, data.get("sign_convention", EQ6_PLUS)
        )


def energy(h: SpinGlassHamiltonian, s) -> float:
    """Energy of one configuration, summed term by term."""
    cfg = as_config(s)
    if cfg.n != h.n:
        raise ValueError(f"configuration has {cfg.n} spins, Hamiltonian has {h.n}")
    spins = cfg.spins()
    total = 0.0
    for k, J in h.couplings.items():
        prods = np.prod(spins[h.tuples(k)], axis=1) if k else np.ones(1)
        total += float(prods @ J)
    return total


def full_spectrum(h: SpinGlassHamiltonian) -> np.ndarray:
    """Energies of all ``2**n`` configurations, indexed by integer value."""
    return h.energies(np.arange(1 << h.n))


# ---------------------------------------------------------------------------
# restricted spectra


def hamming_ball(center, radius: int) -> set[SpinConfiguration]:
    cfg = as_config(center)
    if not 0 <= radius <= cfg.n:
        raise ValueError(f"radius must lie in [0, {cfg.n}]")
    return {SpinConfiguration(int(v), cfg.n) for v in _ball_values(cfg.value, cfg.n, radius)}


def _ball_values(center: int, n: int, radius: int) -> np.ndarray:
    flips = [0]
    for j in range(1, min(radius, n) + 1):
        for pos in itertools.combinations(range(n), j):
            flips.append(sum(1 << p for p in pos))
    return np.asarray(flips, dtype=np.int64) ^ np.int64(center)


@dataclass(frozen=True)
class EnergyTable:
    """Energies over a configuration set, sorted by configuration value.

    ``min_hamming[i]`` is the smallest Hamming distance from ``configs[i]`` to any
    pattern, so patterns are exactly the rows with ``min_hamming == 0``.
    """

    n: int
    configs: np.ndarray
    energies: np.ndarray
    min_hamming: np.ndarray
    patterns: tuple[SpinConfiguration, ...]

    def __len__(self) -> int:
        return len(self.configs)

    @property
    def entries(self) -> list[tuple[SpinConfiguration, float, int]]:
        return [
            (SpinConfiguration(int(c), self.n), float(e), int(h))
            for c, e, h in zip(self.configs, self.energies, self.min_hamming)
        ]

    @property
    def pattern_rows(self) -> np.ndarray:
        """Row index of each pattern, in pattern order."""
        return np.searchsorted(self.configs, [p.value for p in self.patterns])

    @property
    def bulk_mask(self) -> np.ndarray:
        return self.min_hamming >= 1


def configuration_set(patterns: Sequence[SpinConfiguration], radius: int) -> np.ndarray:
    """Sorted union of the Hamming balls of ``radius`` around ``patterns``."""
    n = patterns[0].n
    radius = min(radius, n)
    if radius == n:
        return np.arange(1 << n, dtype=np.int64)
    return np.unique(np.concatenate([_ball_values(p.value, n, radius) for p in patterns]))


def min_hamming_distances(configs: np.ndarray, patterns: Sequence[SpinConfiguration]) -> np.ndarray:
    pv = np.array([p.value for p in patterns], dtype=np.int64)
    return popcount(np.asarray(configs, dtype=np.int64)[:, None] ^ pv[None, :]).min(axis=1)


def restricted_spectrum(h: SpinGlassHamiltonian, patterns: Sequence, radius: int) -> EnergyTable:
    """Energies on the union of Hamming balls around the patterns."""
    if len(patterns) == 0:
        raise ValueError("need at least one pattern")
    pats = tuple(as_config(p, h.n) for p in patterns)
    if len(set(pats)) != len(pats):
        raise ValueError("patterns must be distinct")
    if radius < 1:
        raise ValueError("radius must be >= 1")
    configs = configuration_set(pats, radius)
    return EnergyTable(h.n, configs, h.energies(configs), min_hamming_distances(configs, pats), pats)


# ---------------------------------------------------------------------------
# Krawtchouk fast path


def krawtchouk_subset_sum(d: int, n: int, k: int) -> int:
    """Sum over all ``k``-subsets of a ±1 vector with ``d`` minus signs of the subset product.

    This is the binary Krawtchouk polynomial ``sum_j (-1)^j C(d,j) C(n-d,k-j)``.
    """
    if not 0 <= d <= n:
        raise ValueError("need 0 <= d <= n")
    return sum((-1) ** j * math.comb(d, j) * math.comb(n - d, k - j) for j in range(0, min(d, k) + 1))


def krawtchouk_table(n: int, orders: Sequence[int]) -> np.ndarray:
    """``table[a, d] = krawtchouk_subset_sum(d, n, orders[a])`` as float64."""
    return np.array([[krawtchouk_subset_sum(d, n, k) for d in range(n + 1)] for k in orders], dtype=float)


# ---------------------------------------------------------------------------
# projector expansion

MAX_PROJECTOR_N = 16


def walsh_hadamard(f: np.ndarray) -> np.ndarray:
    """Unnormalised transform ``F[m] = sum_v f[v] (-1)^popcount(v & m)``."""
    F = np.array(f, dtype=float)
    n = F.size.bit_length() - 1
    if F.size != 1 << n:
        raise ValueError("length must be a power of two")
    h = 1
    while h < F.size:
        F = F.reshape(-1, 2, h)
        a, b = F[:, 0, :].copy(), F[:, 1, :].copy()
        F[:, 0, :], F[:, 1, :] = a + b, a - b
        F = F.reshape(-1)
        h *= 2
    return F


def projector_couplings(patterns: Sequence, n: int | None = None) -> SpinGlassHamiltonian:
    """Exact parity expansion of ``1 - sum_n |x_n><x_n|`` over all orders 0..n.

    The result has ``2**n`` couplings; it is only meant as a small oracle.
    """
    pats = [as_config(p, n) for p in patterns]
    if n is None:
        if not pats:
            raise ValueError("need n when no patterns are given")
        n = pats[0].n
    if n > MAX_PROJECTOR_N:
        raise ValueError(f"projector expansion limited to n <= {MAX_PROJECTOR_N}")
    if len(set(pats)) != len(pats):
        raise ValueError("patterns must be distinct")
    f = np.ones(1 << n)
    for p in pats:
        f[p.value] = 0.0
    F = walsh_hadamard(f) / (1 << n)
    table = {}
    for k in range(n + 1):
        table[k] = F[tuple_masks(n, k)]
    return SpinGlassHamiltonian(n, table)
