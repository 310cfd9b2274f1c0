import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phasekick.circuit import CX, H, X, Circuit, RY, SWAP
from phasekick.sim import (
    StateVector,
    apply_circuit,
    apply_gate,
    circuit_unitary,
    eigen_residual,
    eigenphase,
    fidelity_up_to_global_phase,
    gate_unitary,
    mapping_unitary,
    marginal_probabilities,
    new_basis_state,
    project_out,
    reduced_density_matrix,
    reduced_purity,
    sample,
    tensor,
)

from conftest import random_state, random_unitary


def test_basis_state_and_bounds():
    s = new_basis_state(3, 5)
    assert s.amplitudes[5] == 1 and np.count_nonzero(s.amplitudes) == 1
    with pytest.raises(ValueError, match="basis index exceeds register"):
        new_basis_state(2, 4)
    with pytest.raises(ValueError):
        new_basis_state(0)


def test_x_on_qubit0_sets_least_significant_bit():
    out = apply_gate(new_basis_state(3), X(0))
    assert out.amplitudes[1] == 1


def test_tensor_puts_first_factor_on_low_qubits():
    a, b = new_basis_state(1, 1), new_basis_state(2, 0)
    assert np.argmax(np.abs(tensor(a, b).amplitudes)) == 1
    assert np.argmax(np.abs(tensor(b, a).amplitudes)) == 4


def test_normalization_is_enforced():
    with pytest.raises(ValueError, match="not normalized"):
        StateVector(1, np.array([1.0, 1.0]))
    s = StateVector.from_amplitudes([3, 4j], normalize=True)
    assert np.isclose(np.linalg.norm(s.amplitudes), 1)
    with pytest.raises(ValueError):
        StateVector.from_amplitudes([0, 0], normalize=True)


def test_state_is_immutable():
    s = new_basis_state(2)
    with pytest.raises(ValueError):
        s.amplitudes[0] = 0


def test_bell_state_purity_and_marginals():
    bell = apply_circuit(new_basis_state(2), Circuit(2, (H(0), CX(0, 1))))
    assert np.allclose(np.abs(bell.amplitudes) ** 2, [0.5, 0, 0, 0.5])
    assert reduced_purity(bell, [0]) == pytest.approx(0.5, abs=1e-12)
    assert np.allclose(reduced_density_matrix(bell, [1]), np.eye(2) / 2)
    assert np.allclose(marginal_probabilities(bell, [1]), [0.5, 0.5])


def test_marginal_bit_order_follows_subset():
    s = new_basis_state(3, 0b011)
    assert marginal_probabilities(s, [0, 2])[0b01] == 1
    assert marginal_probabilities(s, [2, 0])[0b10] == 1
    with pytest.raises(ValueError, match="duplicate"):
        marginal_probabilities(s, [0, 0])


def test_purity_rejects_trivial_subsets():
    s = new_basis_state(2)
    with pytest.raises(ValueError):
        reduced_purity(s, [])
    with pytest.raises(ValueError):
        reduced_purity(s, [0, 1])


def test_sample_is_seeded_and_counts_all_shots():
    s = apply_circuit(new_basis_state(2), Circuit(2, (H(0), H(1))))
    a = sample(s, [0, 1], 1000, seed=7)
    assert a == sample(s, [0, 1], 1000, seed=7)
    assert sum(a.values()) == 1000 and set(a) <= {0, 1, 2, 3}


def test_apply_circuit_matches_dense_unitary():
    c = Circuit(3, (H(0), CX(0, 2), RY(0.3, 1), SWAP(1, 2), X(1).with_control(0, 0)))
    psi = random_state(3, 0)
    assert np.allclose(apply_circuit(psi, c).amplitudes, circuit_unitary(c) @ psi.amplitudes)


def test_open_control_acts_on_zero_branch():
    u = gate_unitary(X(1).with_control(0, 0), 2)
    assert np.allclose(u @ np.eye(4)[:, 0], np.eye(4)[:, 2])
    assert np.allclose(u @ np.eye(4)[:, 1], np.eye(4)[:, 1])


def test_qubit_count_mismatch_raises():
    with pytest.raises(ValueError):
        apply_circuit(new_basis_state(2), Circuit(3))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10_000), st.floats(0, 2 * np.pi))
def test_fidelity_ignores_global_phase(n, seed, phase):
    s = random_state(n, seed)
    t = StateVector(n, np.exp(1j * phase) * s.amplitudes)
    assert fidelity_up_to_global_phase(s, t) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10_000))
def test_mapping_unitary_sends_src_to_dst(n, seed):
    a, b = random_state(n, seed), random_state(n, seed + 1)
    u = mapping_unitary(a.amplitudes, b.amplitudes)
    assert np.allclose(u.conj().T @ u, np.eye(2 ** n), atol=1e-12)
    assert np.allclose(u @ a.amplitudes, b.amplitudes, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.integers(0, 10_000))
def test_product_states_are_pure_on_every_cut(n, seed):
    parts = [random_state(1, seed + k) for k in range(n)]
    s = tensor(*parts)
    for q in range(n):
        assert reduced_purity(s, [q]) == pytest.approx(1.0, abs=1e-10)


def test_project_out_keeps_phase():
    a = StateVector(1, np.array([1j, 0]))
    s = tensor(new_basis_state(1, 1), a)  # qubit 0 = |1>, qubit 1 = i|0>
    amps = project_out(s, [1], new_basis_state(1, 1))
    assert np.allclose(amps, [1j, 0])


def test_eigenphase_and_residual():
    d = np.diag(np.exp(2j * np.pi * np.array([0.1, 0.7])))
    from conftest import dense
    c = dense(d)
    s = new_basis_state(1, 1)
    assert eigenphase(c, s) == pytest.approx(0.7)
    assert eigen_residual(c, s, 0.7) < 1e-12
    assert eigen_residual(c, random_state(1, 3), 0.7) > 1e-3


def test_random_unitary_circuit_preserves_norm():
    from conftest import dense
    u = random_unitary(8, 5)
    out = apply_circuit(random_state(3, 9), dense(u))
    assert np.linalg.norm(out.amplitudes) == pytest.approx(1.0, abs=1e-12)
