"""Simulator kernels checked against expm/kron oracles, plus sampling laws."""

import numpy as np
import pytest
from scipy.linalg import expm

from helpers import (
    circuit_unitary,
    dense_sum,
    gate_matrix,
    random_state,
    random_sum,
)
from gsee.circuits import Circuit, Gate, hea_ansatz
from gsee.pauli import PauliString, PauliSum
from gsee.simulator import (
    ShotRecord,
    StateVector,
    apply_circuit,
    derived_rng,
    estimate_pauli_z,
    evolve_exact,
    expectation,
    sample_z,
    simulate_batch,
)


def random_gate(rng, n):
    kind = rng.choice(["h", "sdg", "rx", "rz", "zzphase", "pauliexp", "cpauliexp"])
    angle = float(rng.uniform(-np.pi, np.pi))
    if kind in ("h", "sdg"):
        return Gate(kind, (int(rng.integers(n)),))
    if kind in ("rx", "rz"):
        return Gate(kind, (int(rng.integers(n)),), angle=angle)
    if kind == "zzphase":
        a, b = (int(q) for q in rng.choice(n, size=2, replace=False))
        return Gate(kind, (a, b), angle=angle)
    support = {}
    qubits = list(rng.choice(n, size=int(rng.integers(0, n + 1)), replace=False))
    for q in qubits:
        support[int(q)] = str(rng.choice(["X", "Y", "Z"]))
    string = PauliString.from_support(support)
    if kind == "pauliexp":
        return Gate(kind, tuple(string.support), angle=angle, pauli=string)
    free = sorted(set(range(n)) - set(string.support))
    control = int(rng.choice(free)) if free else None
    if control is None:
        return Gate("pauliexp", tuple(string.support), angle=angle, pauli=string)
    return Gate("cpauliexp", (control, *string.support), angle=angle, pauli=string)


class TestStateVector:
    def test_norm_enforced(self):
        with pytest.raises(ValueError, match="norm"):
            StateVector(1, np.array([1.0, 1.0]))

    def test_width_enforced(self):
        with pytest.raises(ValueError, match="amplitudes"):
            StateVector(2, np.array([1.0, 0.0]))

    def test_basis_state_and_overlap(self):
        a = StateVector.basis_state(2, 3)
        assert a.amplitudes[3] == 1.0
        b = StateVector(2, np.array([0.6, 0.0, 0.0, 0.8j]))
        assert abs(a.overlap(b) - 0.8j) < 1e-15
        assert abs(a.fidelity(b) - 0.64) < 1e-15
        with pytest.raises(ValueError):
            StateVector.basis_state(2, 4)


class TestGateKernels:
    def test_every_kind_matches_dense_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(60):
            n = int(rng.integers(2, 5))
            gate = random_gate(rng, n)
            psi = random_state(rng, n)
            got = simulate_batch(Circuit(n, [gate]), psi)[0]
            want = gate_matrix(gate, n) @ psi
            assert np.linalg.norm(got - want) < 1e-12

    def test_identity_string_is_global_phase(self):
        psi = StateVector.zero_state(2)
        g = Gate("pauliexp", (), angle=0.8, pauli=PauliString.from_label(""))
        out = apply_circuit(psi, Circuit(2, [g]))
        assert abs(out.amplitudes[0] - np.exp(-0.4j)) < 1e-12

    def test_random_circuits_stay_normalized(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            n = int(rng.integers(2, 5))
            circuit = Circuit(n, [random_gate(rng, n) for _ in range(12)])
            out = apply_circuit(StateVector(n, random_state(rng, n)), circuit)
            assert abs(np.linalg.norm(out.amplitudes) - 1.0) < 1e-10

    def test_full_circuit_matches_unitary_product(self):
        rng = np.random.default_rng(13)
        n = 3
        circuit = Circuit(n, [random_gate(rng, n) for _ in range(15)])
        psi = random_state(rng, n)
        got = simulate_batch(circuit, psi)[0]
        want = circuit_unitary(circuit) @ psi
        assert np.linalg.norm(got - want) < 1e-11

    def test_unbound_circuit_rejected_by_apply(self):
        c, _ = hea_ansatz(2, 1)
        with pytest.raises(ValueError, match="unbound"):
            apply_circuit(StateVector.zero_state(2), c)


class TestSimulateBatch:
    def test_batched_params_equal_bound_loop(self):
        rng = np.random.default_rng(21)
        circuit, spec = hea_ansatz(3, 2)
        thetas = rng.uniform(-np.pi, np.pi, size=(4, spec.n_params))
        psi = random_state(rng, 3)
        batched = simulate_batch(circuit, psi, thetas)
        for k in range(4):
            single = simulate_batch(circuit.bind(thetas[k]), psi)[0]
            assert np.linalg.norm(batched[k] - single) < 1e-12

    def test_parameter_matrix_required_iff_symbolic(self):
        circuit, spec = hea_ansatz(2, 1)
        psi = random_state(np.random.default_rng(0), 2)
        with pytest.raises(ValueError, match="parameter matrix"):
            simulate_batch(circuit, psi)
        bound = circuit.bind(np.zeros(spec.n_params))
        with pytest.raises(ValueError, match="parameter matrix"):
            simulate_batch(bound, psi, np.zeros((1, 0)))

    def test_batched_states_supported(self):
        rng = np.random.default_rng(2)
        states = np.stack([random_state(rng, 2) for _ in range(3)])
        c = Circuit(2, [Gate("h", (0,)), Gate("zzphase", (0, 1), angle=0.4)])
        out = simulate_batch(c, states)
        for k in range(3):
            assert (
                np.linalg.norm(out[k] - simulate_batch(c, states[k])[0]) < 1e-12
            )


class TestEvolveExact:
    def test_matches_expm(self):
        rng = np.random.default_rng(31)
        for _ in range(5):
            h = random_sum(rng, 3, 5)
            psi = StateVector(3, random_state(rng, 3))
            t = float(rng.uniform(-2, 2))
            got = evolve_exact(psi, h, t).amplitudes
            want = expm(-1j * t * dense_sum(h)) @ psi.amplitudes
            assert np.linalg.norm(got - want) < 1e-10

    def test_group_property_and_identity(self):
        rng = np.random.default_rng(37)
        h = random_sum(rng, 2, 4)
        psi = StateVector(2, random_state(rng, 2))
        one = evolve_exact(evolve_exact(psi, h, 0.3), h, 0.5)
        two = evolve_exact(psi, h, 0.8)
        assert np.linalg.norm(one.amplitudes - two.amplitudes) < 1e-12
        frozen = evolve_exact(psi, h, 0.0)
        assert np.linalg.norm(frozen.amplitudes - psi.amplitudes) < 1e-14


class TestExpectation:
    def test_matches_dense_quadratic_form(self):
        rng = np.random.default_rng(41)
        for _ in range(5):
            h = random_sum(rng, 3, 6)
            psi = random_state(rng, 3)
            got = expectation(StateVector(3, psi), h)
            want = psi.conj() @ dense_sum(h) @ psi
            assert abs(got - want) < 1e-12
            assert abs(got.imag) < 1e-12

    def test_width_mismatch_rejected(self):
        h = PauliSum(2, {PauliString.from_label("Z0"): 1.0})
        with pytest.raises(ValueError, match="widths"):
            expectation(StateVector.zero_state(3), h)


class TestSampling:
    def test_deterministic_per_seed_and_stream(self):
        psi = StateVector(1, np.sqrt([0.3, 0.7]).astype(complex))
        a = sample_z(psi, 50, seed=123, stream=(4, 5))
        b = sample_z(psi, 50, seed=123, stream=(4, 5))
        c = sample_z(psi, 50, seed=123, stream=(4, 6))
        assert np.array_equal(a.outcomes, b.outcomes)
        assert not np.array_equal(a.outcomes, c.outcomes)

    def test_basis_state_is_noiseless(self):
        psi = StateVector.basis_state(3, 5)
        rec = sample_z(psi, 17, seed=0)
        assert set(rec.outcomes.tolist()) == {5}
        # <Z0 Z2> on |101> is +1, <Z1> is +1, <Z0> is -1
        assert estimate_pauli_z(rec, 0b101) == 1.0
        assert estimate_pauli_z(rec, 0b010) == 1.0
        assert estimate_pauli_z(rec, 0b001) == -1.0
        assert estimate_pauli_z(rec, 0) == 1.0

    def test_plus_state_statistics(self):
        n, spc = 2, 40000
        psi = StateVector(n, np.full(4, 0.5, dtype=complex))
        rec = sample_z(psi, spc, seed=77)
        sigma = 1.0 / np.sqrt(spc)
        for mask in (0b01, 0b10, 0b11):
            assert abs(estimate_pauli_z(rec, mask)) < 5 * sigma

    def test_depolarizing_shrinks_mean(self):
        psi = StateVector.basis_state(2, 0)
        spc = 40000
        rec = sample_z(psi, spc, seed=3, depolarize=0.5)
        est = estimate_pauli_z(rec, 0b01)
        # mean (1-p), variance (1-(1-p)^2)/spc
        sigma = np.sqrt((1 - 0.25) / spc)
        assert abs(est - 0.5) < 5 * sigma

    def test_depolarize_zero_matches_plain_draw(self):
        psi = StateVector(1, np.sqrt([0.4, 0.6]).astype(complex))
        a = sample_z(psi, 30, seed=9)
        b = sample_z(psi, 30, seed=9, depolarize=0.0)
        assert np.array_equal(a.outcomes, b.outcomes)

    def test_argument_validation(self):
        psi = StateVector.zero_state(1)
        with pytest.raises(ValueError, match="spc"):
            sample_z(psi, 0, seed=1)
        with pytest.raises(ValueError, match="depolarize"):
            sample_z(psi, 1, seed=1, depolarize=1.5)

    def test_estimator_input_validation(self):
        rec = sample_z(StateVector.zero_state(2), 5, seed=1)
        with pytest.raises(ValueError, match="Z-type"):
            estimate_pauli_z(rec, PauliString.from_label("X0"))
        with pytest.raises(ValueError, match="register"):
            estimate_pauli_z(rec, 0b100)
        assert estimate_pauli_z(rec, PauliString.from_label("Z0 Z1")) == 1.0


class TestShotRecordCsv:
    def test_round_trip(self):
        rec = sample_z(StateVector(2, np.full(4, 0.5, dtype=complex)), 8, seed=42)
        again = ShotRecord.from_csv(rec.to_csv())
        assert again.n_qubits == rec.n_qubits
        assert again.spc == rec.spc
        assert again.seed == rec.seed
        assert np.array_equal(again.outcomes, rec.outcomes)

    def test_bitstring_orientation(self):
        rec = ShotRecord(3, 1, 0, np.array([1], dtype=np.int64))
        assert rec.bitstrings() == ["100"]

    def test_malformed_inputs_rejected(self):
        with pytest.raises(ValueError, match="header"):
            ShotRecord.from_csv("0101\n")
        with pytest.raises(ValueError, match="rows"):
            ShotRecord.from_csv("# seed=1 spc=2 n_qubits=2\n01\n")
        with pytest.raises(ValueError, match="shot row"):
            ShotRecord.from_csv("# seed=1 spc=1 n_qubits=2\n0x\n")

    def test_counts(self):
        rec = ShotRecord(2, 5, 0, np.array([0, 3, 3, 1, 3], dtype=np.int64))
        assert rec.counts() == {0: 1, 1: 1, 3: 3}


class TestDerivedRng:
    def test_reproducible_and_stream_separated(self):
        a = derived_rng(5, 1, 2).random(4)
        b = derived_rng(5, 1, 2).random(4)
        c = derived_rng(5, 2, 1).random(4)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)
