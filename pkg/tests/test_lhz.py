import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopfield_qsp.experiments import load_example
from hopfield_qsp.lhz import (
    ConstraintError,
    LhzLayout,
    Plaquette,
    build_layout,
    closes,
    constraint_count,
    find_constraints,
    fixture_plaquettes,
    map_config,
    physical_field_energy,
    validate_constraints,
)
from hopfield_qsp.quantum import plaquette_parities
from hopfield_qsp.spinmodel import SpinConfiguration, SpinGlassHamiltonian, energy


def random_hamiltonian(n, orders, seed):
    rng = np.random.default_rng(seed)
    return SpinGlassHamiltonian(n, {k: rng.normal(size=math.comb(n, k)) for k in orders})


class TestBuildLayout:
    def test_2d_with_ancilla(self):
        L = build_layout(random_hamiltonian(4, [1, 2], 0))
        assert L.logical_n == 5 and L.ancilla == 0 and L.n_physical == 10
        labels = ["".join(map(str, q)) for q in L.qubits]
        assert labels == ["01", "02", "03", "04", "12", "13", "14", "23", "24", "34"]

    def test_3d_with_ancilla(self):
        L = build_layout(random_hamiltonian(4, [2, 3], 0))
        assert L.n_physical == 10 and L.qubits[0] == (0, 1, 2) and L.qubits[-1] == (2, 3, 4)

    def test_no_ancilla(self):
        L = build_layout(random_hamiltonian(5, [2], 0))
        assert L.ancilla is None and L.n_physical == 10 and L.qubits[0] == (0, 1)

    @pytest.mark.parametrize("orders", [[1, 2, 3], [4], [1, 3]])
    def test_unsupported(self, orders):
        with pytest.raises(ValueError):
            build_layout(random_hamiltonian(5, orders, 0))

    def test_fields_follow_couplings(self):
        h = random_hamiltonian(4, [1, 2], 3)
        L = build_layout(h)
        assert L.fields[L.qubit_index((0, 2))] == -h.coupling((1,))
        assert L.fields[L.qubit_index((2, 4))] == -h.coupling((1, 3))

    def test_missing_orders_get_zero_field(self):
        h = random_hamiltonian(4, [3], 1)
        L = build_layout(h)
        assert L.n_physical == 4 and L.ancilla is None

    def test_dict_roundtrip(self):
        L = build_layout(random_hamiltonian(4, [2, 3], 2))
        L2 = LhzLayout.from_dict(L.to_dict())
        assert L2.qubits == L.qubits and np.array_equal(L2.fields, L.fields) and L2.ancilla == L.ancilla


class TestMapConfig:
    def test_example_strings(self):
        for which in (1, 2):
            fx = load_example(which)
            assert [str(map_config(fx.layout, x)) for x in fx.patterns] == fx.physical_patterns

    def test_z2_example1(self):
        assert str(map_config(load_example(1).layout, "0011")) == "0011011110"

    def test_z4_example2(self):
        assert str(map_config(load_example(2).layout, "0100")) == "1001101101"

    def test_zero_maps_to_zero(self):
        L = build_layout(random_hamiltonian(5, [2, 3], 0))
        assert str(map_config(L, "00000")) == "0" * L.n_physical

    def test_length_mismatch(self):
        L = build_layout(random_hamiltonian(4, [2], 0))
        with pytest.raises(ValueError):
            map_config(L, "000")

    @given(st.sampled_from([[2], [1, 2], [3], [2, 3]]), st.integers(3, 6), st.data())
    def test_homomorphism(self, orders, n, data):
        L = build_layout(random_hamiltonian(n, orders, 0))
        a = data.draw(st.integers(0, 2**n - 1))
        b = data.draw(st.integers(0, 2**n - 1))
        za = map_config(L, SpinConfiguration(a, n)).value
        zb = map_config(L, SpinConfiguration(b, n)).value
        assert map_config(L, SpinConfiguration(a ^ b, n)).value == za ^ zb

    @settings(max_examples=20)
    @given(st.sampled_from([[2], [1, 2], [3], [2, 3]]), st.integers(3, 6), st.integers(0, 1000))
    def test_energy_preserved(self, orders, n, seed):
        h = random_hamiltonian(n, orders, seed)
        L = build_layout(h)
        for v in range(2**n):
            x = SpinConfiguration(v, n)
            assert physical_field_energy(L, map_config(L, x)) == pytest.approx(energy(h, x), abs=1e-12)


class TestConstraints:
    @pytest.mark.parametrize("which,name", [(1, "eq17"), (2, "eq18")])
    def test_fixture_sets_validate(self, which, name):
        L = load_example(which).layout
        rep = validate_constraints(L, fixture_plaquettes(L, name))
        assert rep.ok, rep.failures
        assert rep.expected_count == 6 == L.n_physical - L.logical_n + 1

    def test_3d_third_plaquette(self):
        L = load_example(2).layout
        p = fixture_plaquettes(L, "eq18")[2]
        assert [L.qubits[m] for m in p.members] == [(0, 1, 3), (1, 2, 4), (2, 3, 4)]

    @pytest.mark.parametrize("which", [1, 2])
    def test_finder(self, which):
        L = load_example(which).layout
        found = find_constraints(L)
        assert len(found) == 6
        assert validate_constraints(L, found).ok
        assert all(len(p.members) in (3, 4) for p in found)

    def test_finder_deterministic(self):
        L = load_example(1).layout
        assert find_constraints(L) == find_constraints(L)

    def test_duplicates_fail_independence(self):
        L = load_example(1).layout
        plaq = fixture_plaquettes(L, "eq17")
        rep = validate_constraints(L, plaq[:5] + [plaq[0]])
        assert not rep.independence and rep.closure and rep.count

    def test_open_plaquette_reported(self):
        L = load_example(1).layout
        plaq = fixture_plaquettes(L, "eq17")[:5] + [Plaquette((0, 1, 9))]
        rep = validate_constraints(L, plaq)
        assert not rep.closure and not rep.ok

    def test_wrong_count(self):
        L = load_example(1).layout
        rep = validate_constraints(L, fixture_plaquettes(L, "eq17")[:4])
        assert not rep.count and rep.expected_count == 6

    @pytest.mark.parametrize("n,orders", [(4, [2]), (5, [2]), (4, [1, 2]), (4, [3]), (4, [2, 3])])
    def test_code_space_is_plaquette_eigenspace(self, n, orders):
        L = build_layout(random_hamiltonian(n, orders, 0))
        plaq = find_constraints(L)
        par = plaquette_parities(L.n_physical, plaq)
        satisfied = set(np.flatnonzero(np.all(par > 0, axis=0)).tolist())
        images = {map_config(L, SpinConfiguration(v, n)).value for v in range(2**n)}
        assert satisfied == images
        assert len(plaq) == constraint_count(L)

    def test_unreachable_basis_raises(self):
        # a five-cycle of pair qubits: the only closed set has weight 5
        L = LhzLayout(5, 2, ((0, 1), (0, 4), (1, 2), (2, 3), (3, 4)), np.zeros(5))
        assert constraint_count(L) == 1
        with pytest.raises(ConstraintError):
            find_constraints(L)

    def test_plaquette_validation(self):
        with pytest.raises(ValueError):
            Plaquette((1, 2))
        with pytest.raises(ValueError):
            Plaquette((1, 1, 2))

    def test_closes(self):
        L = load_example(1).layout
        idx = [L.qubit_index(q) for q in [(0, 1), (0, 2), (1, 2)]]
        assert closes(L, idx)
        assert not closes(L, idx[:2] + [L.qubit_index((1, 3))])
