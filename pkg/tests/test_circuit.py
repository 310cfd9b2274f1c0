import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from phasekick.circuit import (
    CP,
    CX,
    CZ,
    RXX,
    RYY,
    RZZ,
    SWAP,
    Circuit,
    GateOp,
    H,
    P,
    RX,
    RY,
    RZ,
    X,
    Y,
    Z,
    circuit_from_dict,
    circuit_to_dict,
    compile_controlled,
    compose,
    controlled,
    count_gates,
    embed,
    inverse_qft,
    invert,
    power,
    qft,
    unitary_gate,
)
from phasekick.sim import circuit_unitary

from conftest import random_unitary

XX = np.kron([[0, 1], [1, 0]], [[0, 1], [1, 0]])
YY = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])
ZZ = np.diag([1, -1, -1, 1])


def dft(m):
    N = 2 ** m
    j, k = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    return np.exp(2j * np.pi * j * k / N) / np.sqrt(N)


@pytest.mark.parametrize("gate,pauli", [(RXX, XX), (RYY, YY), (RZZ, ZZ)])
def test_two_qubit_rotations(gate, pauli):
    t = 0.37
    assert np.allclose(gate(t, 0, 1).base_matrix, expm(-0.5j * t * pauli))


def test_phase_gate_and_rotations():
    assert np.allclose(P(0.4, 0).base_matrix, np.diag([1, np.exp(0.4j)]))
    assert np.allclose(RZ(0.4, 0).base_matrix, np.diag([np.exp(-0.2j), np.exp(0.2j)]))


def test_gate_validation():
    with pytest.raises(ValueError):
        GateOp("FOO", (0,))
    with pytest.raises(ValueError):
        GateOp("X", (0,), controls=((0, 1),))
    with pytest.raises(ValueError):
        GateOp("X", (0,), controls=((1, 2),))
    with pytest.raises(ValueError, match="not unitary"):
        unitary_gate(np.array([[1, 1], [0, 1]]), [0])
    with pytest.raises(ValueError):
        RX(float("nan"), 0)
    with pytest.raises(ValueError):
        Circuit(1, (X(1),))


@pytest.mark.parametrize("op", [H(0), X(1), Y(0), Z(1), P(0.3, 0), RX(0.2, 1), RY(-1.1, 0),
                                RZ(2.0, 1), CX(0, 1), CP(0.7, 1, 0), SWAP(0, 1),
                                RXX(0.5, 0, 1), GateOp("S", (0,)), GateOp("T", (1,))])
def test_inverse_gives_identity(op):
    c = Circuit(2, (op, op.inverse()))
    assert np.allclose(circuit_unitary(c), np.eye(4))


def test_power_and_invert():
    c = Circuit(2, (H(0), CX(0, 1), RZ(0.3, 1)))
    u = circuit_unitary(c)
    assert np.allclose(circuit_unitary(power(c, 3)), u @ u @ u)
    assert np.allclose(circuit_unitary(invert(c)), u.conj().T)
    with pytest.raises(ValueError):
        power(c, 0)


def test_embed_relabels_qubits():
    c = embed(Circuit(2, (CX(0, 1),)), [2, 0], 3)
    assert c.ops[0].controls == ((2, 1),) and c.ops[0].targets == (0,)


def test_controlled_matches_block_matrix():
    c = Circuit(2, (H(0), RY(0.4, 1), CX(0, 1)))
    big = embed(c, [0, 1], 3)
    u = circuit_unitary(c)
    for pol in (0, 1):
        cu = circuit_unitary(controlled(big, 2, pol))
        blocks = [np.eye(4), np.eye(4)]
        blocks[pol] = u
        expected = np.block([[blocks[0], np.zeros((4, 4))], [np.zeros((4, 4)), blocks[1]]])
        assert np.allclose(cu, expected)


def test_count_gates_by_total_arity():
    c = Circuit(3, (H(0), CX(0, 1), X(2).with_control(0).with_control(1), RZZ(0.1, 1, 2)))
    r = count_gates(c)
    assert (r.n1, r.n2, r.rejected) == (1, 2, 1)
    assert r.flagged and r.total == 4


def test_qft_is_dft():
    for m in range(1, 6):
        assert np.allclose(circuit_unitary(qft(m)), dft(m), atol=1e-12)
        assert np.allclose(circuit_unitary(inverse_qft(m)), dft(m).conj().T, atol=1e-12)


def test_inverse_qft_decodes_fourier_state():
    m = 3
    for j in range(8):
        v = np.exp(2j * np.pi * j * np.arange(8) / 8) / np.sqrt(8)
        out = circuit_unitary(inverse_qft(m)) @ v
        assert abs(out[j]) == pytest.approx(1.0, abs=1e-12)


_ONE_Q = [lambda q, a: H(q), lambda q, a: X(q), lambda q, a: Y(q), lambda q, a: Z(q),
          lambda q, a: RX(a, q), lambda q, a: RY(a, q), lambda q, a: RZ(a, q),
          lambda q, a: P(a, q), lambda q, a: GateOp("T", (q,)),
          lambda q, a: GateOp("SDG", (q,))]
_TWO_Q = [lambda q, r, a: CX(q, r), lambda q, r, a: CZ(q, r), lambda q, r, a: CP(a, q, r),
          lambda q, r, a: RXX(a, q, r), lambda q, r, a: RYY(a, q, r),
          lambda q, r, a: RZZ(a, q, r), lambda q, r, a: RY(a, r).with_control(q, 0)]


@st.composite
def small_circuits(draw):
    n = 3
    ops = []
    for _ in range(draw(st.integers(1, 6))):
        a = draw(st.floats(-np.pi, np.pi, allow_nan=False))
        if draw(st.booleans()):
            q = draw(st.integers(0, n - 1))
            ops.append(draw(st.sampled_from(_ONE_Q))(q, a))
        else:
            q, r = draw(st.permutations(range(n)))[:2]
            ops.append(draw(st.sampled_from(_TWO_Q))(q, r, a))
    return Circuit(n + 1, tuple(ops))


@settings(max_examples=40, deadline=None)
@given(small_circuits(), st.integers(0, 1))
def test_compiled_control_equals_semantic_control(c, pol):
    compiled = compile_controlled(c, 3, pol)
    assert np.allclose(circuit_unitary(compiled), circuit_unitary(controlled(c, 3, pol)),
                       atol=1e-10)
    before, after = count_gates(c), count_gates(compiled)
    assert after.n2 == 2 * before.n1 + 6 * before.n2
    assert after.rejected == 0


def test_compile_controlled_rejects_unsupported():
    with pytest.raises(ValueError, match="no local diagonal form"):
        compile_controlled(Circuit(3, (SWAP(0, 1),)), 2)
    with pytest.raises(ValueError, match="no local diagonal form"):
        compile_controlled(Circuit(3, (unitary_gate(random_unitary(4, 0), [0, 1]),)), 2)
    with pytest.raises(ValueError, match="arity"):
        compile_controlled(Circuit(4, (X(2).with_control(0).with_control(1),)), 3)
    with pytest.raises(ValueError, match="already used"):
        compile_controlled(Circuit(2, (CX(0, 1),)), 1)


def test_dense_single_qubit_gate_compiles():
    u = random_unitary(2, 3)
    c = Circuit(2, (unitary_gate(u, [0]),))
    out = compile_controlled(c, 1)
    assert np.allclose(circuit_unitary(out), circuit_unitary(controlled(c, 1)))
    assert count_gates(out).n2 == 2


def test_serialization_round_trip():
    c = Circuit(3, (H(0), CP(0.25, 0, 2), X(1).with_control(2, 0),
                    unitary_gate(random_unitary(4, 1), [1, 2], label="V")), "demo")
    d = json.loads(json.dumps(circuit_to_dict(c)))
    back = circuit_from_dict(d)
    assert np.allclose(circuit_unitary(back), circuit_unitary(c))
    assert back.ops[3].label == "V"


def test_compose_checks_width():
    with pytest.raises(ValueError):
        compose(Circuit(1), Circuit(2))
    assert len(Circuit(2, (H(0),)) + Circuit(2, (H(1),))) == 2
