import numpy as np
import pytest
import scipy.linalg

from hopfield_qsp.experiments import load_example
from hopfield_qsp.lhz import build_layout, find_constraints
from hopfield_qsp.quantum import SweepProblem, SweepSchedule, final_amplitudes, transverse_field_matrix
from hopfield_qsp.spinmodel import SpinGlassHamiltonian
from hopfield_qsp.sw import (
    BlockPartition,
    DegenerateManifoldError,
    GapError,
    crossover_time,
    decompose_blocks,
    effective_evolve,
    effective_terms,
    second_order_sum,
    superop_L,
)


@pytest.fixture(scope="module")
def ex1():
    return load_example(1).problem(100.0)


@pytest.fixture(scope="module")
def ex1_model(ex1):
    return effective_terms(ex1, order=4)


def random_problem(seed, strengths=2.5, patterns=("0000", "0110")):
    rng = np.random.default_rng(seed)
    h = SpinGlassHamiltonian(4, {2: rng.uniform(-1, 1, 6)})
    L = build_layout(h)
    plaq = [p.with_strength(strengths) for p in find_constraints(L)]
    return SweepProblem.from_logical(L, plaq, list(patterns), SweepSchedule(50.0, 2000))


def direct_rotation(H0, V, low, eps):
    """Effective Hamiltonian from the exact block-diagonalising rotation (oracle)."""
    dim = len(H0)
    H = H0 + eps * V
    w, v = np.linalg.eigh(H)
    P = v[:, : len(low)] @ v[:, : len(low)].T
    P0 = np.zeros((dim, dim))
    P0[low, low] = 1.0
    U = scipy.linalg.sqrtm((np.eye(dim) - 2 * P0) @ (np.eye(dim) - 2 * P)).real
    return (U @ H @ U.T)[np.ix_(low, low)]


def series(model, eps, n):
    return model.h0 + eps * model.v + sum(eps**k * model.terms[k] for k in model.terms if k <= n)


def slope(xs, ys):
    return np.polyfit(np.log(xs), np.log(ys), 1)[0]


class TestBlocks:
    def test_diagonal_has_no_off_block(self, ex1):
        part = BlockPartition.from_problem(ex1)
        d, od = decompose_blocks(np.diag(ex1.h0_diagonal()), part)
        assert not od.any()

    def test_pvp_vanishes_for_distant_patterns(self, ex1):
        part = BlockPartition.from_problem(ex1)
        d, _ = decompose_blocks(transverse_field_matrix(ex1.n_qubits), part)
        assert not d[np.ix_(part.low, part.low)].any()

    def test_sum_and_idempotence(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(8, 8))
        part = BlockPartition([1, 5], np.arange(8.0))
        d, od = decompose_blocks(X, part)
        np.testing.assert_array_equal(d + od, X)
        d2, od2 = decompose_blocks(d, part)
        np.testing.assert_array_equal(d2, d)
        assert not od2.any()

    def test_gap(self, ex1):
        part = BlockPartition.from_problem(ex1)
        assert part.gap > 0


class TestSuperopL:
    def test_block_diagonal_input(self):
        part = BlockPartition([0], np.array([0.0, 1.0, 2.0]))
        assert not superop_L(np.diag([1.0, 2.0, 3.0]), part).any()

    def test_two_level(self):
        gap = 1.7
        part = BlockPartition([0], np.array([0.0, gap]))
        sx = np.array([[0.0, 1.0], [1.0, 0.0]])
        sy = np.array([[0.0, -1j], [1j, 0.0]])
        # <0|X|1>/(0 - gap) |0><1| - h.c. = -(1/gap) (|0><1| - |1><0|) = -(i/gap) sigma_y
        np.testing.assert_allclose(superop_L(sx, part), -(1j / gap) * sy, atol=1e-15)

    def test_first_order_generator(self):
        for seed in range(5):
            p = random_problem(seed)
            part = BlockPartition.from_problem(p)
            H0 = np.diag(part.energies)
            _, Vod = decompose_blocks(transverse_field_matrix(p.n_qubits), part)
            S1 = superop_L(Vod, part)
            np.testing.assert_allclose(S1 @ H0 - H0 @ S1 + Vod, 0, atol=1e-12)
            np.testing.assert_allclose(S1, -S1.conj().T, atol=1e-15)

    def test_collision_names_pair(self):
        part = BlockPartition([0], np.array([0.0, 0.0, 1.0]))
        with pytest.raises(GapError, match="low state 0 and bulk state 1"):
            superop_L(np.ones((3, 3)), part)


class TestEffectiveTerms:
    def test_hermitian(self, ex1_model):
        for Hn in ex1_model.terms.values():
            assert np.max(np.abs(Hn - Hn.conj().T)) < 1e-12

    def test_single_pattern_second_order(self, ex1):
        for i in range(len(ex1.patterns)):
            p = SweepProblem(ex1.layout, ex1.plaquettes, (ex1.patterns[i],), ex1.schedule)
            m = effective_terms(p, order=2)
            assert m.terms[2][0, 0] == pytest.approx(second_order_sum(p), abs=1e-10)

    def test_distant_patterns_decouple(self, ex1_model, ex1):
        # example-1 physical patterns are at Hamming distance >= 4: all terms up to order 3 diagonal
        pats = ex1.pattern_indices()
        dist = min(bin(int(a ^ b)).count("1") for i, a in enumerate(pats) for b in pats[i + 1:])
        for n in range(2, min(dist, 5)):
            Hn = ex1_model.terms[n]
            assert not np.any(Hn - np.diag(np.diag(Hn)))

    def test_matrix_error_orders(self):
        # against the direct-rotation oracle the order-n series is off by eps^(n+1);
        # an odd-weight pattern keeps every order of the series populated
        p = random_problem(0)
        energies = np.random.default_rng(2).uniform(0.0, 3.0, p.dim)
        energies[[0, 7]] = [-5.0, -4.7]
        part = BlockPartition([0, 7], energies)
        model = effective_terms(p, part)
        H0 = np.diag(part.energies)
        V = transverse_field_matrix(p.n_qubits)
        eps = np.geomspace(0.04, 0.01, 4)
        oracle = [direct_rotation(H0, V, part.low, e) for e in eps]
        for n in (1, 2, 3, 4):
            errs = [np.abs(series(model, e, n) - o).max() for e, o in zip(eps, oracle)]
            assert slope(eps, errs) == pytest.approx(n + 1, abs=0.3)

    def test_even_patterns_kill_odd_terms(self, ex1, ex1_model):
        assert all(bin(int(z)).count("1") % 2 == 0 for z in ex1.pattern_indices())
        assert not ex1_model.terms[3].any()

    def test_eigenvalue_error_parity(self, ex1, ex1_model):
        # prod sigma_z maps V -> -V and commutes with H0: eigenvalue errors carry only even powers
        H0 = np.diag(ex1.h0_diagonal())
        V = transverse_field_matrix(ex1.n_qubits)
        eps = np.geomspace(0.2, 0.05, 4)
        for n, expected in ((2, 4), (3, 4), (4, 6)):
            errs = [np.abs(np.linalg.eigvalsh(series(ex1_model, e, n))
                           - np.linalg.eigvalsh(H0 + e * V)[:3]).max() for e in eps]
            assert slope(eps, errs) == pytest.approx(expected, abs=0.3)

    def test_first_order_rotation_reduces_off_block(self, ex1):
        part = BlockPartition.from_problem(ex1)
        H0 = np.diag(part.energies)
        V = transverse_field_matrix(ex1.n_qubits)
        S1 = superop_L(decompose_blocks(V, part)[1], part)
        q = part.bulk
        eps = np.geomspace(0.04, 0.01, 4)
        norms = []
        for e in eps:
            U = scipy.linalg.expm(e * S1)
            R = U @ (H0 + e * V) @ U.conj().T
            norms.append(np.linalg.norm(R[np.ix_(q, part.low)]))
        assert slope(eps, norms) == pytest.approx(2, abs=0.3)

    def test_gauge_invariance(self, ex1, ex1_model):
        # flipping the sign of one pattern state conjugates H_eff by a diagonal sign matrix
        part = BlockPartition.from_problem(ex1)
        G = np.ones(ex1.dim)
        G[part.low[1]] = -1
        V = transverse_field_matrix(ex1.n_qubits)
        Vg = G[:, None] * V * G[None, :]
        _, Vod = decompose_blocks(Vg, part)
        S1 = superop_L(Vod, part)
        H2 = 0.5 * (S1 @ Vod - Vod @ S1)[np.ix_(part.low, part.low)]
        g = G[part.low]
        np.testing.assert_allclose(H2, g[:, None] * ex1_model.terms[2] * g[None, :], atol=1e-14)

    def test_order_limit(self, ex1):
        with pytest.raises(ValueError):
            effective_terms(ex1, order=5)

    def test_degenerate_manifold(self):
        p = load_example(2).problem(50.0)
        with pytest.raises(DegenerateManifoldError):
            effective_terms(p)

    def test_assembly(self, ex1_model):
        m = ex1_model
        H = m.hamiltonian(80.0)
        d, e = 0.8, 0.2
        ref = d * m.h0 + e * m.v + sum(e**n / d ** (n - 1) * m.terms[n] for n in (2, 3, 4))
        np.testing.assert_allclose(H, ref, atol=1e-14)


class TestEvolution:
    def test_crossover(self):
        assert crossover_time(SweepSchedule(100.0), 1.0) == 50.0
        with pytest.raises(ValueError):
            crossover_time(SweepSchedule(100.0), 0.0)

    def test_single_pattern_norm(self, ex1):
        p = SweepProblem(ex1.layout, ex1.plaquettes, ex1.patterns[:1], ex1.schedule)
        a = effective_evolve(effective_terms(p), p)
        assert abs(a[0]) == pytest.approx(1.0, abs=1e-12)

    def test_order_zero_freezes_populations(self, ex1):
        model = effective_terms(ex1, order=0)
        a = effective_evolve(model, ex1, mode="hybrid")
        from hopfield_qsp.quantum import minus_state, propagate

        psi, _ = propagate(ex1, minus_state(ex1.n_qubits), 0.0, 50.0, 2000)
        proj = psi[ex1.pattern_indices()]
        np.testing.assert_allclose(np.abs(a) ** 2, np.abs(proj) ** 2 / np.sum(np.abs(proj) ** 2), atol=1e-10)

    def test_effective_only_is_normalised(self, ex1_model, ex1):
        a = effective_evolve(ex1_model, ex1, mode="effective_only")
        assert np.sum(np.abs(a) ** 2) == pytest.approx(1.0, abs=1e-10)

    def test_bad_mode(self, ex1_model, ex1):
        with pytest.raises(ValueError):
            effective_evolve(ex1_model, ex1, mode="other")

    def test_hybrid_agrees_with_exact(self, ex1_model, ex1):
        eff = np.abs(effective_evolve(ex1_model, ex1)) ** 2
        exact = np.abs(final_amplitudes(ex1)) ** 2
        assert np.max(np.abs(eff - exact)) < 0.1

    def test_agreement_improves_with_T(self, ex1):
        diffs = []
        for T in (50.0, 100.0, 200.0):
            p = ex1.with_schedule(SweepSchedule(T, int(40 * T)))
            eff = np.abs(effective_evolve(effective_terms(p), p)) ** 2
            diffs.append(np.max(np.abs(eff - np.abs(final_amplitudes(p)) ** 2)))
        assert diffs[2] <= diffs[0]
