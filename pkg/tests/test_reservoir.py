import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from werner_qelm.quantum import (
    PAULI_X,
    PAULI_Z,
    check_density_matrix,
    expectation,
    pauli_z_string,
)
from werner_qelm.reservoir import (
    FeatureSpec,
    ReservoirSpec,
    ShotPlan,
    build_hamiltonian,
    build_reservoir,
    draw_couplings,
    estimate_features_from_shots,
    evolve,
    evolved_populations,
    ising_hamiltonian,
    measure_features_exact,
    sample_bitstrings,
)
from werner_qelm.states import compose_initial, make_werner, random_density, singlet

LOCAL = FeatureSpec(True, "local-z")
EXTENDED = FeatureSpec(True, "local-plus-zz")


def pure(v):
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def oracle_features(rho, n, spec):
    # Tr[O rho] for every Pauli-Z string, built operator by operator
    out = [1.0] if spec.include_bias else []
    out += [expectation(pauli_z_string({i}, n), rho) for i in range(n)]
    if spec.correlation_order.value == "local-plus-zz":
        out += [expectation(pauli_z_string({i, j}, n), rho) for i in range(n) for j in range(i + 1, n)]
    return np.array(out)


class TestHamiltonian:
    def test_decoupled(self):
        h = ising_hamiltonian(np.zeros((2, 2)), 0.1)
        np.testing.assert_allclose(h, np.diag([0.2, 0, 0, -0.2]), atol=1e-15)

    def test_pure_xx(self):
        j = np.array([[0, 0.25], [0.25, 0]])
        h = ising_hamiltonian(j, 0.0)
        np.testing.assert_allclose(h, 0.25 * np.kron(PAULI_X, PAULI_X))
        lam = np.linalg.eigvalsh(h)
        np.testing.assert_allclose(lam, [-0.25, -0.25, 0.25, 0.25], atol=1e-15)

    def test_coupling_range_and_shape(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            j = draw_couplings(5, 1.0, rng)
            assert np.all(np.abs(j) <= 0.5)
            np.testing.assert_array_equal(j, j.T)
            assert np.all(np.diag(j) == 0)

    def test_draw_order_is_row_major(self):
        j = draw_couplings(4, 1.0, np.random.default_rng(9))
        vals = np.random.default_rng(9).uniform(-0.5, 0.5, size=6)
        np.testing.assert_array_equal([j[0, 1], j[0, 2], j[0, 3], j[1, 2], j[1, 3], j[2, 3]], vals)

    def test_seeded_reproducible(self):
        spec = ReservoirSpec(5, 0.1, seed=42)
        h1, j1 = build_hamiltonian(spec)
        h2, j2 = build_hamiltonian(spec)
        np.testing.assert_array_equal(j1, j2)
        np.testing.assert_array_equal(h1, h2)
        assert np.max(np.abs(h1 - h1.conj().T)) == 0

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            ReservoirSpec(1, 0.1)
        with pytest.raises(ValueError):
            ReservoirSpec(3, 0.1, coupling_scale=0)


class TestEvolve:
    def test_zero_time(self):
        rng = np.random.default_rng(1)
        h, _ = build_hamiltonian(ReservoirSpec(3, 0.3), rng)
        rho = random_density(8, rng)
        np.testing.assert_allclose(evolve(rho, h, 0.0), rho, atol=1e-12)

    def test_field_only_keeps_diagonal_states(self):
        h = ising_hamiltonian(np.zeros((3, 3)), 0.7)
        rho = np.diag(np.random.default_rng(2).dirichlet(np.ones(8))).astype(complex)
        np.testing.assert_allclose(evolve(rho, h, 3.3), rho, atol=1e-12)

    def test_rabi_flip(self):
        out = evolve(pure([1, 0]), PAULI_X, np.pi / 2)
        np.testing.assert_allclose(out, pure([0, 1]), atol=1e-10)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0, 50), st.floats(0.01, 2))
    def test_spectrum_and_purity_preserved(self, seed, dt, h):
        rng = np.random.default_rng(seed)
        ham, _ = build_hamiltonian(ReservoirSpec(4, h), rng)
        rho = compose_initial(make_werner(rng.uniform()), random_density(4, rng), 4)
        out = evolve(rho, ham, dt)
        check_density_matrix(out)
        np.testing.assert_allclose(np.linalg.eigvalsh(out), np.linalg.eigvalsh(rho), atol=1e-9)
        assert np.trace(out @ out).real == pytest.approx(np.trace(rho @ rho).real, abs=1e-10)

    def test_propagator_unitary_and_consistent(self):
        rng = np.random.default_rng(3)
        res = build_reservoir(draw_couplings(4, 1.0, rng), 0.2)
        u = res.propagator(7.5)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(16), atol=1e-10)
        rho = random_density(16, rng)
        pops = evolved_populations(rho[None], u)[0]
        np.testing.assert_allclose(pops, np.diag(evolve(rho, res.hamiltonian, 7.5)).real, atol=1e-12)

    def test_rejects_negative_time(self):
        with pytest.raises(ValueError):
            evolve(np.eye(2) / 2, PAULI_Z, -1.0)


class TestExactFeatures:
    def test_maximally_mixed(self):
        x = measure_features_exact(np.eye(32) / 32, EXTENDED)
        assert x[0] == 1.0
        np.testing.assert_allclose(x[1:], 0, atol=1e-15)

    def test_all_zero_state(self):
        rho = np.zeros((8, 8), dtype=complex)
        rho[0, 0] = 1
        np.testing.assert_array_equal(measure_features_exact(rho, EXTENDED), np.ones(1 + 3 + 3))

    def test_ordering_and_counts(self):
        assert EXTENDED.count(5) == 16 and LOCAL.count(5) == 6
        assert FeatureSpec(False, "local-z").count(5) == 5
        assert EXTENDED.names(3) == ["bias", "z0", "z1", "z2", "z0z1", "z0z2", "z1z2"]

    @pytest.mark.parametrize("p", [0.0, 0.35, 0.9])
    def test_werner_inputs_silent_at_t0(self, p):
        rho = compose_initial(make_werner(p), random_density(8, np.random.default_rng(4)), 5)
        x = measure_features_exact(rho, LOCAL)
        assert x[1] == pytest.approx(0, abs=1e-14) and x[2] == pytest.approx(0, abs=1e-14)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_matches_trace_oracle(self, seed):
        rho = random_density(16, np.random.default_rng(seed))
        np.testing.assert_allclose(measure_features_exact(rho, EXTENDED), oracle_features(rho, 4, EXTENDED), atol=1e-12)

    def test_field_only_features_constant_in_time(self):
        rng = np.random.default_rng(5)
        h = ising_hamiltonian(np.zeros((4, 4)), 0.4)
        rho = random_density(16, rng)
        x0 = measure_features_exact(rho, LOCAL)
        for t in (0.5, 3.0, 40.0):
            np.testing.assert_allclose(measure_features_exact(evolve(rho, h, t), LOCAL), x0, atol=1e-12)


class TestShots:
    def test_pure_zero(self):
        rho = pure([1, 0, 0, 0, 0, 0, 0, 0])
        assert sample_bitstrings(rho, ShotPlan(100), np.random.default_rng(0)) == {"000": 100}

    def test_plus_state_statistics(self):
        rho = pure([1, 1]) / 2
        counts = sample_bitstrings(rho, ShotPlan(1000), np.random.default_rng(6))
        assert sum(counts.values()) == 1000
        z = estimate_features_from_shots(counts, FeatureSpec(False, "local-z"))[0]
        assert abs(z) <= 0.127

    def test_singlet_support(self):
        counts = sample_bitstrings(pure(singlet()), ShotPlan(5000), np.random.default_rng(7))
        assert set(counts) <= {"01", "10"}
        x = estimate_features_from_shots(counts, EXTENDED)
        assert x[-1] == -1.0

    def test_estimator_examples(self):
        np.testing.assert_array_equal(estimate_features_from_shots({"01": 50, "10": 50}, EXTENDED), [1, 0, 0, -1])
        np.testing.assert_array_equal(estimate_features_from_shots({"00": 100}, EXTENDED), [1, 1, 1, 1])

    def test_pair_features_use_same_shots(self):
        counts = {"00": 3, "01": 1, "11": 4}
        bits = [b for b, c in counts.items() for _ in range(c)]
        z = np.array([[1 - 2 * int(ch) for ch in b] for b in bits])
        expected = [1, z[:, 0].mean(), z[:, 1].mean(), (z[:, 0] * z[:, 1]).mean()]
        np.testing.assert_allclose(estimate_features_from_shots(counts, EXTENDED), expected)

    def test_errors(self):
        with pytest.raises(ValueError):
            sample_bitstrings(np.eye(2) / 2, ShotPlan(), np.random.default_rng(0))
        with pytest.raises(ValueError):
            estimate_features_from_shots({}, LOCAL)
        with pytest.raises(ValueError):
            ShotPlan(0)

    def test_same_seed_same_shots(self):
        rho = random_density(16, np.random.default_rng(8))
        a = sample_bitstrings(rho, ShotPlan(500), np.random.default_rng(11))
        b = sample_bitstrings(rho, ShotPlan(500), np.random.default_rng(11))
        assert a == b

    def test_converges_to_exact(self):
        rng = np.random.default_rng(10)
        rho = random_density(16, rng)
        exact = measure_features_exact(rho, EXTENDED)
        est = estimate_features_from_shots(sample_bitstrings(rho, ShotPlan(200_000), rng), EXTENDED)
        np.testing.assert_allclose(est, exact, atol=4 / np.sqrt(200_000))
