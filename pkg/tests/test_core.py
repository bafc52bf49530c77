import numpy as np
import pytest

import oracles
from sparsespin import (GlobalRotation, HalfAngleRotationZ, PairPhase,
                        PairRotationZ, SitePermutation, StateVector,
                        apply_gate, apply_hxy, basis_state, build_graph,
                        coherent_x_state, evolve_xy, ghz_x_state, load_state,
                        overlap, qfi_axis, reduced_density, save_state)
from sparsespin.strobe import faro_perm


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(n, amps / np.linalg.norm(amps))


class TestStates:
    def test_coherent_single_spin(self):
        psi = coherent_x_state(1)
        assert np.allclose(psi.amplitudes, [1 / np.sqrt(2), 1 / np.sqrt(2)])

    def test_coherent_polarization(self):
        psi = coherent_x_state(4)
        jx = oracles.collective_op(4, "x")
        jz = oracles.collective_op(4, "z")
        assert np.vdot(psi.amplitudes, jx @ psi.amplitudes).real == pytest.approx(2.0)
        assert np.vdot(psi.amplitudes, jz @ psi.amplitudes).real == pytest.approx(0.0)

    def test_coherent_sql(self):
        # transverse QFI of an uncorrelated probe sits at the standard
        # quantum limit F_Q = N
        psi = coherent_x_state(8)
        assert qfi_axis(psi, "y") == pytest.approx(8.0)
        assert qfi_axis(psi, "z") == pytest.approx(8.0)

    def test_coherent_range(self):
        with pytest.raises(ValueError):
            coherent_x_state(0)
        with pytest.raises(ValueError):
            coherent_x_state(21)

    def test_ghz_bell_pair(self):
        # the x-basis GHZ for n=2 carries Heisenberg-limit QFI along x
        psi = ghz_x_state(2, 0.0)
        assert psi.norm() == pytest.approx(1.0)
        assert qfi_axis(psi, "x") == pytest.approx(4.0)

    @pytest.mark.parametrize("phi", [0.0, 0.7, -2.3])
    def test_ghz_normalized(self, phi):
        assert ghz_x_state(5, phi).norm() == pytest.approx(1.0, abs=1e-12)

    def test_ghz_heisenberg_limit(self):
        assert qfi_axis(ghz_x_state(8), "x") == pytest.approx(64.0)


class TestApplyHxy:
    def test_flip_flop_pair(self):
        g = build_graph("a2a", 2, chi0=1.0)
        out = apply_hxy(g, basis_state(2, 0b10))
        expect = np.zeros(4, dtype=complex)
        expect[0b01] = 0.5
        assert np.allclose(out.amplitudes, expect)

    def test_aligned_state_annihilated(self):
        g = build_graph("pwr2", 8)
        out = apply_hxy(g, basis_state(8, 0))
        assert np.all(out.amplitudes == 0)

    def test_dense_oracle_nn3(self):
        g = build_graph("nn", 3)
        psi = random_state(3, 11)
        ref = oracles.dense_hxy(g) @ psi.amplitudes
        assert np.max(np.abs(apply_hxy(g, psi).amplitudes - ref)) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            apply_hxy(build_graph("a2a", 3), coherent_x_state(4))

    def test_magnetization_conserved(self):
        g = build_graph("hypercube", 4)
        psi = random_state(4, 3)
        jz = oracles.collective_op(4, "z")
        before = np.vdot(psi.amplitudes, jz @ psi.amplitudes)
        evolved = evolve_xy(g, psi, 0.9)
        after = np.vdot(evolved.amplitudes, jz @ evolved.amplitudes)
        assert abs(before - after) < 1e-10


class TestEvolve:
    def test_zero_time_identity(self):
        g = build_graph("a2a", 4)
        psi = random_state(4, 5)
        out = evolve_xy(g, psi, 0.0)
        assert np.array_equal(out.amplitudes, psi.amplitudes)

    def test_forward_backward(self):
        g = build_graph("hypercube", 4)
        psi = coherent_x_state(4)
        there = evolve_xy(g, psi, 0.7)
        back = evolve_xy(g, there, -0.7)
        assert abs(overlap(psi, back)) ** 2 >= 1 - 1e-10

    @pytest.mark.parametrize("kind,n,bnd,alpha,t", [
        ("a2a", 6, "open", None, 1.3),
        ("nn", 6, "periodic", None, 2.0),
        ("pwr2", 8, "open", None, 1.3),
        ("hypercube", 8, "open", None, 2.5),
        ("powerlaw", 6, "periodic", 1.5, 1.7),
    ])
    def test_dense_propagator_oracle(self, kind, n, bnd, alpha, t):
        g = build_graph(kind, n, boundary=bnd, alpha=alpha)
        psi = random_state(n, 42)
        fast = evolve_xy(g, psi, t, tol=1e-10)
        ref = oracles.dense_propagate(oracles.dense_hxy(g), psi.amplitudes, t)
        assert np.max(np.abs(fast.amplitudes - ref)) < 1e-9

    def test_norm_preserved_long_run(self):
        g = build_graph("nn", 8, boundary="periodic")
        out = evolve_xy(g, coherent_x_state(8), 25.0)
        assert out.norm() == pytest.approx(1.0, abs=1e-10)

    def test_energy_conserved(self):
        g = build_graph("pwr2", 8)
        psi = coherent_x_state(8)
        e0 = np.vdot(psi.amplitudes, apply_hxy(g, psi).amplitudes).real
        out = evolve_xy(g, psi, 3.7)
        e1 = np.vdot(out.amplitudes, apply_hxy(g, out).amplitudes).real
        assert e1 == pytest.approx(e0, rel=1e-8)

    def test_a2a_collectivity(self):
        # uniform couplings commute with J^2: the total spin length stays
        # maximal along the whole trajectory
        from sparsespin import j2_expectation
        g = build_graph("a2a", 6)
        psi = coherent_x_state(6)
        for t in (0.4, 0.9, 2.2):
            psi = evolve_xy(g, psi, 0.5)
            assert j2_expectation(psi) == pytest.approx(3 * 4, abs=1e-8)

    def test_bad_tol(self):
        with pytest.raises(ValueError):
            evolve_xy(build_graph("a2a", 2), coherent_x_state(2), 1.0, tol=0.0)


class TestGates:
    def test_global_rotation_x(self):
        n = 3
        out = apply_gate(basis_state(n, 0), GlobalRotation("x", np.pi / 2))
        jy = oracles.collective_op(n, "y")
        val = np.vdot(out.amplitudes, jy @ out.amplitudes).real
        assert val == pytest.approx(-n / 2)  # sign fixed by e^{-i angle/2 sigma}

    def test_pair_phase_on_bell(self):
        bell = StateVector(2, np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2))
        out = apply_gate(bell, PairPhase(0, 1, np.pi))
        expect = np.array([1, 0, 0, -1], dtype=complex) / np.sqrt(2)
        assert np.allclose(out.amplitudes, expect)

    def test_pair_phase_matches_dense(self):
        psi = random_state(2, 9)
        out = apply_gate(psi, PairPhase(0, 1, 0.77))
        # basis order 00,01,10,11 with bit 0 = spin 0
        ref = oracles.cphase_matrix(0.77) @ psi.amplitudes
        assert np.allclose(out.amplitudes, ref)

    def test_pair_rotation_z_matches_dense(self):
        psi = random_state(2, 10)
        out = apply_gate(psi, PairRotationZ(((0, 1),), 0.31))
        ref = oracles.rz_pair_matrix(0.31) @ psi.amplitudes
        assert np.allclose(out.amplitudes, ref)

    def test_half_angle_rotation(self):
        psi = random_state(1, 12)
        out = apply_gate(psi, HalfAngleRotationZ((0,), 0.5))
        ref = psi.amplitudes * np.exp(-1j * 0.5 / 2 * np.array([1, -1]))
        assert np.allclose(out.amplitudes, ref)

    def test_faro_cubed_is_identity(self):
        psi = random_state(8, 21)
        gate = SitePermutation(faro_perm(8))
        out = apply_gate(apply_gate(apply_gate(psi, gate), gate), gate)
        assert np.allclose(out.amplitudes, psi.amplitudes)

    def test_permutation_matches_literal(self):
        psi = random_state(4, 2)
        perm = (2, 0, 3, 1)
        out = apply_gate(psi, SitePermutation(perm))
        ref = oracles.permute_amplitudes(psi.amplitudes, 4, perm)
        assert np.allclose(out.amplitudes, ref)

    def test_norm_preserved(self):
        psi = random_state(4, 8)
        for gate in (GlobalRotation("y", 1.1), PairPhase(1, 3, 0.4),
                     PairRotationZ(((0, 2),), 0.9), SitePermutation((1, 2, 3, 0)),
                     HalfAngleRotationZ((0, 3), 1.7)):
            psi = apply_gate(psi, gate)
        assert psi.norm() == pytest.approx(1.0, abs=1e-12)

    def test_index_validation(self):
        psi = coherent_x_state(3)
        with pytest.raises(ValueError):
            apply_gate(psi, PairPhase(0, 3, 0.1))
        with pytest.raises(ValueError):
            apply_gate(psi, SitePermutation((0, 1, 1)))
        with pytest.raises(ValueError):
            apply_gate(psi, PairPhase(1, 1, 0.1))


class TestReducedDensity:
    def test_product_state_pure(self):
        rho = reduced_density(coherent_x_state(5), (1, 3))
        evals = np.linalg.eigvalsh(rho.matrix)
        assert evals[-1] == pytest.approx(1.0)
        assert rho.trace() == pytest.approx(1.0, abs=1e-12)

    def test_ghz_single_site(self):
        rho = reduced_density(ghz_x_state(4), (0,))
        assert np.allclose(rho.matrix, np.eye(2) / 2)

    def test_dense_oracle(self):
        g = build_graph("a2a", 6)
        psi = evolve_xy(g, coherent_x_state(6), np.pi / 2)
        rho = reduced_density(psi, (0, 1, 2))
        ref = oracles.dense_partial_trace(psi.amplitudes, 6, (0, 1, 2))
        assert np.max(np.abs(rho.matrix - ref)) < 1e-10

    def test_subset_ordering_convention(self):
        psi = random_state(3, 17)
        r01 = reduced_density(psi, (0, 1))
        r10 = reduced_density(psi, (1, 0))
        # bit t of the row index is subset[t]: swapping the subset swaps bits
        perm = [0, 2, 1, 3]
        assert np.allclose(r10.matrix, r01.matrix[np.ix_(perm, perm)])

    def test_validation(self):
        psi = coherent_x_state(4)
        with pytest.raises(ValueError):
            reduced_density(psi, ())
        with pytest.raises(ValueError):
            reduced_density(psi, (0, 1, 2, 3))
        with pytest.raises(ValueError):
            reduced_density(psi, (0, 0))


class TestOverlap:
    def test_self(self):
        psi = random_state(4, 4)
        assert overlap(psi, psi) == pytest.approx(1.0)

    def test_basis_vs_coherent(self):
        assert overlap(basis_state(6, 0), coherent_x_state(6)) == \
            pytest.approx(2 ** -3)

    def test_mismatch(self):
        with pytest.raises(ValueError):
            overlap(coherent_x_state(2), coherent_x_state(3))


def test_save_load_round_trip(tmp_path):
    psi = random_state(5, 31)
    path = tmp_path / "state.bin"
    save_state(psi, path)
    back = load_state(path)
    assert back.n_spins == 5
    assert np.array_equal(back.amplitudes, psi.amplitudes)
    raw = path.read_bytes()
    assert raw[:8] == b"SSPINSV1" and len(raw) == 16 + 32 * 16
