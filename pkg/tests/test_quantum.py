import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from hopfield_qsp.experiments import load_example
from hopfield_qsp.lhz import LhzLayout, build_layout, find_constraints
from hopfield_qsp.quantum import (
    SweepProblem,
    SweepSchedule,
    adiabaticity_from_eigensystem,
    adiabaticity_metrics,
    eigensystem,
    evolve_sweep,
    final_amplitudes,
    fix_phases,
    hamiltonian_derivative,
    minus_state,
    propagate,
    sweep_hamiltonian,
    transverse_field_matrix,
)
from hopfield_qsp.spinmodel import SpinGlassHamiltonian, config_spins


def small_problem(T=10.0, steps=400, samples=21, strengths=2.0, seed=0):
    """Four-spin pair Hamiltonian: 6 physical qubits, 3 plaquettes."""
    rng = np.random.default_rng(seed)
    h = SpinGlassHamiltonian(4, {2: rng.uniform(-1, 1, 6)})
    L = build_layout(h)
    plaq = [p.with_strength(strengths) for p in find_constraints(L)]
    return SweepProblem.from_logical(L, plaq, ["0000", "0110"], SweepSchedule(T, steps, samples))


def dense_reference(p, psi0, t0, t1, n):
    """Piecewise-constant midpoint propagation with exact matrix exponentials."""
    psi = psi0.astype(complex)
    h = (t1 - t0) / n
    for k in range(n):
        psi = scipy.linalg.expm(-1j * h * sweep_hamiltonian(p, t0 + (k + 0.5) * h)) @ psi
    return psi


@pytest.fixture(scope="module")
def example1():
    fx = load_example(1)
    return fx.problem(100.0)


class TestHamiltonian:
    def test_initial_is_transverse_field(self):
        p = small_problem()
        H = sweep_hamiltonian(p, 0.0)
        np.testing.assert_array_equal(H, transverse_field_matrix(p.n_qubits))
        w, v = eigensystem(H, 2)
        assert w[0] == pytest.approx(-p.n_qubits)
        assert w[1] - w[0] > 1.0
        assert abs(abs(np.vdot(v[:, 0], minus_state(p.n_qubits))) - 1) < 1e-10

    def test_final_is_classical(self):
        p = small_problem()
        H = sweep_hamiltonian(p, p.schedule.total_time)
        assert np.count_nonzero(H - np.diag(np.diag(H))) == 0
        spins = config_spins(np.arange(p.dim), p.n_qubits)
        constraint = -sum(pl.strength * spins[:, list(pl.members)].prod(axis=1) for pl in p.plaquettes)
        np.testing.assert_allclose(np.diag(H), -spins @ p.layout.fields + constraint)

    def test_derivative(self):
        p = small_problem()
        T = p.schedule.total_time
        fd = (sweep_hamiltonian(p, 0.7 * T) - sweep_hamiltonian(p, 0.3 * T)) / (0.4 * T)
        np.testing.assert_allclose(hamiltonian_derivative(p), fd, atol=1e-12)

    def test_real_symmetric(self):
        H = sweep_hamiltonian(small_problem(), 3.3)
        assert H.dtype == float and np.array_equal(H, H.T)

    def test_time_out_of_range(self):
        with pytest.raises(ValueError):
            sweep_hamiltonian(small_problem(), -1.0)

    def test_dimension_guard(self):
        L = LhzLayout(6, 2, tuple((i, j) for i in range(6) for j in range(i + 1, 6)), np.zeros(15))
        with pytest.raises(ValueError):
            SweepProblem(L, (), ())

    def test_positive_strengths(self):
        p = small_problem()
        with pytest.raises(ValueError):
            p.with_strengths([-1.0] * len(p.plaquettes))


class TestEigensystem:
    def test_two_qubit_oracle(self):
        L = LhzLayout(2, 1, ((0,), (1,)), np.array([0.7, 0.0]))
        p = SweepProblem(L, (), (), SweepSchedule(1.0))
        H = sweep_hamiltonian(p, 0.5)
        sz = np.diag([1.0, -1.0])
        sx = np.array([[0.0, 1.0], [1.0, 0.0]])
        ref = 0.5 * (-0.7 * np.kron(sz, np.eye(2))) + 0.5 * (np.kron(sx, np.eye(2)) + np.kron(np.eye(2), sx))
        w, v = eigensystem(H, 4)
        np.testing.assert_allclose(w, np.linalg.eigvalsh(ref), atol=1e-12)

    def test_residual_and_order(self):
        H = sweep_hamiltonian(small_problem(), 4.0)
        w, v = eigensystem(H, 5)
        assert np.all(np.diff(w) >= 0)
        assert np.linalg.norm(H @ v - v * w) < 1e-8 * np.linalg.norm(H, 2)
        np.testing.assert_allclose(v.T @ v, np.eye(5), atol=1e-10)

    def test_phase_convention(self):
        H = sweep_hamiltonian(small_problem(), 4.0)
        _, v = eigensystem(H, 5)
        lead = v[np.argmax(np.abs(v), axis=0), np.arange(5)]
        assert np.all(lead.real > 0) and np.max(np.abs(v.imag)) < 1e-10

    def test_fix_phases_removes_global_phase(self):
        v = np.linalg.qr(np.random.default_rng(0).normal(size=(6, 3)))[0]
        np.testing.assert_allclose(fix_phases(v * np.exp(1.3j)), fix_phases(v), atol=1e-12)

    def test_non_hermitian(self):
        with pytest.raises(ValueError):
            eigensystem(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_example1_final_manifold(self, example1):
        p = example1.with_strengths([3.0] * 6)
        _, v = eigensystem(sweep_hamiltonian(p, 100.0), 3)
        support = {int(np.argmax(np.abs(v[:, i]))) for i in range(3)}
        assert support == set(p.pattern_indices().tolist())


class TestIntegrator:
    def test_matches_dense_reference(self):
        p = small_problem(T=5.0)
        psi0 = minus_state(p.n_qubits)
        ours, _ = propagate(p, psi0, 0.0, 5.0, 200)
        ref = dense_reference(p, psi0, 0.0, 5.0, 4000)
        assert abs(np.vdot(ref, ours)) > 1 - 1e-6

    def test_fourth_order(self):
        p = small_problem(T=5.0)
        psi0 = minus_state(p.n_qubits)
        exact, _ = propagate(p, psi0, 0.0, 5.0, 3200)
        errs = [np.linalg.norm(propagate(p, psi0, 0.0, 5.0, n)[0] - exact) for n in (25, 50, 100)]
        slopes = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(slopes > 3.6)

    def test_norm(self):
        p = small_problem()
        traj = evolve_sweep(p, diagnostics=False)
        assert traj.norm_drift < 1e-9

    def test_initial_uniform(self):
        p = small_problem()
        traj = evolve_sweep(p, diagnostics=False)
        np.testing.assert_allclose(np.abs(traj.states[0]) ** 2, 1 / p.dim, atol=1e-15)

    def test_adiabatic_limit(self):
        p = small_problem(T=400.0, steps=8000, strengths=2.0, seed=4)
        E = p.h0_diagonal()
        order = np.argsort(E)
        assert E[order[1]] - E[order[0]] > 0.05
        psi, _ = propagate(p, minus_state(p.n_qubits), 0.0, 400.0, 8000)
        assert abs(psi[order[0]]) ** 2 > 0.99

    def test_step_halving(self, example1):
        a = final_amplitudes(example1)
        b = final_amplitudes(example1, 8000)
        assert np.max(np.abs(np.abs(a) ** 2 - np.abs(b) ** 2)) < 1e-6

    def test_frozen_energy_conservation(self):
        p = small_problem()
        H = sweep_hamiltonian(p, 4.0)
        psi0 = minus_state(p.n_qubits)
        psi, _ = propagate(p, psi0, 0.0, 7.0, 1500, frozen_at=4.0)
        e0 = np.vdot(psi0, H @ psi0).real
        assert np.vdot(psi, H @ psi).real == pytest.approx(e0, abs=1e-9)

    def test_linearity(self):
        p = small_problem()
        rng = np.random.default_rng(3)
        a = rng.normal(size=p.dim) + 1j * rng.normal(size=p.dim)
        b = rng.normal(size=p.dim) + 1j * rng.normal(size=p.dim)
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        c = (a + 0.5j * b)
        ea, eb, ec = (propagate(p, x, 0.0, 10.0, 200)[0] for x in (a, b, c))
        combo = ea + 0.5j * eb
        fid = abs(np.vdot(combo, ec)) ** 2 / (np.vdot(combo, combo).real * np.vdot(ec, ec).real)
        assert fid > 1 - 1e-9

    def test_populations_sum(self):
        p = small_problem()
        traj = evolve_sweep(p)
        np.testing.assert_allclose(traj.overlaps.sum(axis=1) + traj.p_bulk, 1.0, atol=1e-9)
        assert np.all(traj.overlaps >= -1e-12)

    def test_final_amplitudes_agree(self):
        p = small_problem()
        traj = evolve_sweep(p, diagnostics=False)
        np.testing.assert_allclose(traj.final_amplitudes, final_amplitudes(p), atol=1e-12)


class TestAdiabaticity:
    def test_frozen_hamiltonian_gives_zero(self):
        H = sweep_hamiltonian(small_problem(), 3.0)
        w, v = np.linalg.eigh(H)
        A, B, _ = adiabaticity_from_eigensystem(w, v, np.zeros_like(H), 2)
        assert np.all(A == 0) and np.all(B == 0)

    def test_symmetric(self):
        p = small_problem()
        w, v = np.linalg.eigh(sweep_hamiltonian(p, 4.0))
        A, _, _ = adiabaticity_from_eigensystem(w, v, hamiltonian_derivative(p), 4)
        np.testing.assert_allclose(A[:, :4], A[:, :4].T, rtol=1e-10)
        assert np.all(A[~np.isnan(A)] >= 0)

    def test_definition(self):
        p = small_problem()
        w, v = np.linalg.eigh(sweep_hamiltonian(p, 6.0))
        dH = hamiltonian_derivative(p)
        A, B, _ = adiabaticity_from_eigensystem(w, v, dH, 2)
        assert A[0, 1] == pytest.approx(abs(v[:, 0] @ dH @ v[:, 1]) / (w[0] - w[1]) ** 2)
        assert B[0] == pytest.approx(sum(abs(v[:, 0] @ dH @ v[:, m]) / (w[0] - w[m]) ** 2 for m in range(2, p.dim)))

    def test_degenerate_pairs_flagged(self):
        w = np.array([0.0, 0.0, 1.0])
        v = np.eye(3)
        A, _, flags = adiabaticity_from_eigensystem(w, v, np.ones((3, 3)), 2)
        assert flags[0, 1] and np.isnan(A[0, 1])

    def test_interior_only(self):
        p = small_problem()
        with pytest.raises(ValueError):
            adiabaticity_metrics(p, times=[0.0, 5.0])

    def test_attached_to_trajectory(self):
        p = small_problem()
        traj = evolve_sweep(p, adiabaticity=True)
        ref = adiabaticity_metrics(p, times=traj.sample_times[1:-1])
        np.testing.assert_allclose(traj.adiabaticity.B[1:-1], ref.B, rtol=1e-9)
        assert np.all(np.isnan(traj.adiabaticity.B[[0, -1]]))


class TestSchedule:
    def test_switching_functions(self):
        s = SweepSchedule(50.0)
        assert s.delta(0) == 0 and s.eps(0) == 1 and s.delta(50.0) == 1 and s.eps(50.0) == 0

    @settings(max_examples=20)
    @given(st.floats(1.0, 500.0), st.integers(2, 300))
    def test_samples_cover_endpoints(self, T, n):
        s = SweepSchedule(T, 1000, n)
        t = s.sample_times()
        assert t[0] == 0 and t[-1] == pytest.approx(T) and np.all(np.diff(t) > 0)

    def test_invalid(self):
        with pytest.raises(ValueError):
            SweepSchedule(0.0)
