"""Parity (LHZ) encoding of logical spin glasses with up to three-body terms.

Every logical coupling of the top order ``k`` becomes one physical qubit labelled
by its index tuple.  Lower-order couplings are absorbed by an ancilla spin with
index 0 that is fixed to +1, so ``J_i`` sits on qubit ``(0, i)`` and ``J_ij`` on
``(0, i, j)``.  Logical spin ``i`` of the Hamiltonian (0-based) has layout index
``i + 1`` whenever an ancilla is present.

Energy conventions:

* ``H_J = -sum_q Jt_q sz_q`` with ``Jt_q = -J_chi``, so the physical field
  energy of an encoded configuration equals its logical energy;
* ``H_C = -sum_p C_p prod_{q in p} sz_q``, which favours even parity for
  ``C_p > 0``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .spinmodel import SpinConfiguration, SpinGlassHamiltonian, as_config

SUPPORTED_ORDERS = ({2}, {1, 2}, {3}, {2, 3})


class ConstraintError(RuntimeError):
    """Raised when weight <= 4 plaquettes cannot span the constraint space."""


@dataclass(frozen=True)
class LhzLayout:
    logical_n: int  # includes the ancilla when present
    order: int
    qubits: tuple[tuple[int, ...], ...]
    fields: np.ndarray
    ancilla: int | None = None

    def __post_init__(self):
        if len(self.qubits) != len(self.fields):
            raise ValueError("one field per qubit")
        if list(self.qubits) != sorted(self.qubits):
            raise ValueError("qubits must be sorted lexicographically")
        object.__setattr__(self, "fields", np.asarray(self.fields, dtype=float))

    @property
    def n_physical(self) -> int:
        return len(self.qubits)

    @property
    def n_free(self) -> int:
        """Number of logical spins that are not the ancilla."""
        return self.logical_n - (self.ancilla is not None)

    def qubit_index(self, label: Sequence[int]) -> int:
        return self.qubits.index(tuple(label))

    def incidence(self, include_ancilla: bool = False) -> np.ndarray:
        """GF(2) incidence matrix, shape ``(n_physical, logical_n)``."""
        A = np.zeros((self.n_physical, self.logical_n), dtype=np.uint8)
        for q, chi in enumerate(self.qubits):
            A[q, list(chi)] = 1
        if self.ancilla is not None and not include_ancilla:
            A[:, self.ancilla] = 0
        return A

    def to_dict(self) -> dict:
        return {
            "logical_n": self.logical_n,
            "order": self.order,
            "ancilla": self.ancilla,
            "qubits": [list(q) for q in self.qubits],
            "fields": [float(f) for f in self.fields],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "LhzLayout":
        return cls(
            int(data["logical_n"]),
            int(data["order"]),
            tuple(tuple(int(i) for i in q) for q in data["qubits"]),
            np.asarray(data["fields"], dtype=float),
            data.get("ancilla"),
        )


@dataclass(frozen=True)
class Plaquette:
    members: tuple[int, ...]
    strength: float = 1.0

    def __post_init__(self):
        members = tuple(int(m) for m in self.members)
        if len(members) not in (3, 4):
            raise ValueError("plaquettes have three or four members")
        if len(set(members)) != len(members):
            raise ValueError("plaquette members must be distinct")
        object.__setattr__(self, "members", members)

    def with_strength(self, strength: float) -> "Plaquette":
        return Plaquette(self.members, float(strength))


def build_layout(h: SpinGlassHamiltonian) -> LhzLayout:
    """Physical qubits and fields for a logical Hamiltonian."""
    orders = {k for k in h.orders}
    if orders not in SUPPORTED_ORDERS:
        raise ValueError(f"interaction orders {sorted(orders)} not supported; use one of {SUPPORTED_ORDERS}")
    k = max(orders)
    ancilla = 0 if len(orders) > 1 else None
    shift = 1 if ancilla is not None else 0
    logical_n = h.n + shift
    qubits = tuple(itertools.combinations(range(logical_n), k))
    fields = np.zeros(len(qubits))
    index = {q: i for i, q in enumerate(qubits)}
    for chi, J in h.terms():
        label = tuple(i + shift for i in chi)
        label = (0,) * (k - len(label)) + label
        fields[index[label]] = -J
    return LhzLayout(logical_n, k, qubits, fields, ancilla)


def map_config(layout: LhzLayout, x) -> SpinConfiguration:
    """Physical image of a logical configuration (ancilla prepended automatically)."""
    cfg = as_config(x)
    if cfg.n == layout.n_free and layout.ancilla is not None:
        cfg = SpinConfiguration(cfg.value, cfg.n + 1)  # leading ancilla bit 0
    if cfg.n != layout.logical_n:
        raise ValueError(f"logical configuration has {cfg.n} spins, layout expects {layout.n_free}")
    if layout.ancilla is not None and cfg.bit(layout.ancilla):
        raise ValueError("ancilla spin must be +1")
    bits = cfg.bits()
    phys = "".join(str(int(bits[list(chi)].sum() & 1)) for chi in layout.qubits)
    return SpinConfiguration.from_string(phys)


def physical_field_energy(layout: LhzLayout, z) -> float:
    """Energy of ``H_J`` for a physical configuration."""
    spins = as_config(z, layout.n_physical).spins()
    return float(-np.dot(layout.fields, spins))


# ---------------------------------------------------------------------------
# GF(2) helpers


class _Gf2Basis:
    """Incremental row-echelon basis of bit-vectors stored as Python ints."""

    def __init__(self):
        self.rows: dict[int, int] = {}  # pivot bit -> row

    def reduce(self, v: int) -> int:
        while v:
            top = v.bit_length() - 1
            if top not in self.rows:
                return v
            v ^= self.rows[top]
        return 0

    def add(self, v: int) -> bool:
        v = self.reduce(v)
        if not v:
            return False
        self.rows[v.bit_length() - 1] = v
        return True

    def __len__(self) -> int:
        return len(self.rows)


def gf2_rank(vectors: Iterable[int]) -> int:
    basis = _Gf2Basis()
    for v in vectors:
        basis.add(v)
    return len(basis)


def _logical_vectors(layout: LhzLayout) -> list[int]:
    A = layout.incidence()
    return [int("".join(map(str, row[::-1])), 2) if row.any() else 0 for row in A]


def _subset_vector(members: Iterable[int]) -> int:
    v = 0
    for m in members:
        v |= 1 << m
    return v


def constraint_count(layout: LhzLayout) -> int:
    """Dimension of the plaquette space: ``n_physical - rank`` of the incidence vectors."""
    return layout.n_physical - gf2_rank(_logical_vectors(layout))


def closes(layout: LhzLayout, members: Iterable[int]) -> bool:
    vecs = _logical_vectors(layout)
    acc = 0
    for m in members:
        acc ^= vecs[m]
    return acc == 0


def find_constraints(layout: LhzLayout) -> list[Plaquette]:
    """Greedy lexicographic scan for an independent spanning set of 3- and 4-body plaquettes."""
    vecs = _logical_vectors(layout)
    target = constraint_count(layout)
    basis = _Gf2Basis()
    found: list[Plaquette] = []
    if target == 0:
        return found
    for size in (3, 4):
        for members in itertools.combinations(range(layout.n_physical), size):
            acc = 0
            for m in members:
                acc ^= vecs[m]
            if acc:
                continue
            if basis.add(_subset_vector(members)):
                found.append(Plaquette(members))
                if len(found) == target:
                    return found
    raise ConstraintError(
        f"only {len(found)} of {target} independent plaquettes of weight <= 4 exist for this layout"
    )


@dataclass
class ValidationReport:
    closure: bool
    independence: bool
    count: bool
    expected_count: int
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.closure and self.independence and self.count


def validate_constraints(layout: LhzLayout, plaquettes: Sequence[Plaquette]) -> ValidationReport:
    failures = []
    open_ones = [i for i, p in enumerate(plaquettes) if not closes(layout, p.members)]
    if open_ones:
        failures.append(f"plaquettes {open_ones} do not close over the logical indices")
    rank = gf2_rank(_subset_vector(p.members) for p in plaquettes)
    independent = rank == len(plaquettes)
    if not independent:
        failures.append(f"plaquettes are dependent over GF(2): rank {rank} of {len(plaquettes)}")
    expected = constraint_count(layout)
    count_ok = len(plaquettes) == expected
    if not count_ok:
        failures.append(f"{len(plaquettes)} plaquettes given, {expected} required")
    return ValidationReport(not open_ones, independent, count_ok, expected, failures)


def plaquettes_from_labels(layout: LhzLayout, labels: Sequence[Sequence[Sequence[int]]],
                           strengths: Sequence[float] | None = None) -> list[Plaquette]:
    strengths = strengths if strengths is not None else [1.0] * len(labels)
    return [
        Plaquette(tuple(layout.qubit_index(q) for q in group), float(c))
        for group, c in zip(labels, strengths)
    ]


# published constraint sets of the two worked examples, by qubit label;
# the keys double as the CLI fixture names
PLAQUETTES_2D = (
    ((0, 1), (0, 2), (1, 2)),
    ((1, 2), (1, 3), (2, 3)),
    ((2, 3), (2, 4), (3, 4)),
    ((0, 2), (0, 3), (1, 2), (1, 3)),
    ((1, 3), (1, 4), (2, 3), (2, 4)),
    ((0, 3), (0, 4), (1, 3), (1, 4)),
)

PLAQUETTES_3D = (
    ((0, 1, 2), (0, 1, 3), (0, 2, 3)),
    ((0, 2, 3), (0, 2, 4), (0, 3, 4)),
    ((0, 1, 3), (1, 2, 4), (2, 3, 4)),
    ((0, 1, 3), (0, 1, 4), (0, 2, 3), (0, 2, 4)),
    ((0, 2, 3), (0, 2, 4), (1, 2, 3), (1, 2, 4)),
    ((0, 2, 4), (0, 3, 4), (1, 2, 4), (1, 3, 4)),
)

FIXTURE_LABELS = {"eq17": PLAQUETTES_2D, "eq18": PLAQUETTES_3D}


def fixture_plaquettes(layout: LhzLayout, name: str,
                       strengths: Sequence[float] | None = None) -> list[Plaquette]:
    """The published constraint sets for the 2D (``eq17``) and 3D (``eq18``) examples."""
    if name not in FIXTURE_LABELS:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(FIXTURE_LABELS)}")
    return plaquettes_from_labels(layout, FIXTURE_LABELS[name], strengths)
