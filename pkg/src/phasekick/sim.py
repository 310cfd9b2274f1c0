"""Dense statevector simulation.

Amplitude index ``i`` has qubit ``q`` equal to ``(i >> q) & 1``. Controls are
applied semantically, by acting only on the matching control subspace; no
decomposition happens here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import MAX_QUBITS, Circuit, GateOp

NORM_ATOL = 1e-12
STATE_ATOL = 1e-10


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized amplitudes over ``num_qubits`` qubits (little-endian index)."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        n = int(self.num_qubits)
        if not 1 <= n <= MAX_QUBITS:
            raise ValueError(f"num_qubits must be in [1, {MAX_QUBITS}], got {n}")
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2 ** n:
            raise ValueError(f"expected {2 ** n} amplitudes, got {amps.size}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("non-finite amplitude")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > STATE_ATOL:
            raise ValueError(f"state is not normalized (norm {norm:.12g})")
        amps.setflags(write=False)
        object.__setattr__(self, "num_qubits", n)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = False) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = amps.size.bit_length() - 1
        if 2 ** n != amps.size:
            raise ValueError("amplitude count is not a power of two")
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / norm
        return cls(n, amps)

    def __len__(self) -> int:
        return self.amplitudes.size

    def __repr__(self) -> str:
        return f"StateVector({self.num_qubits} qubits)"


def _wrap(n: int, amps: np.ndarray) -> StateVector:
    # internal constructor for amplitudes already known to be normalized
    s = object.__new__(StateVector)
    amps = np.ascontiguousarray(amps, dtype=complex)
    amps.setflags(write=False)
    object.__setattr__(s, "num_qubits", n)
    object.__setattr__(s, "amplitudes", amps)
    return s


def new_basis_state(num_qubits: int, basis_index: int = 0) -> StateVector:
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise ValueError(f"num_qubits must be in [1, {MAX_QUBITS}], got {num_qubits}")
    if not 0 <= basis_index < 2 ** num_qubits:
        raise ValueError("basis index exceeds register")
    amps = np.zeros(2 ** num_qubits, dtype=complex)
    amps[basis_index] = 1.0
    return _wrap(num_qubits, amps)


def tensor(*states: StateVector) -> StateVector:
    """Product state; the first argument occupies the lowest qubits."""
    amps = np.ones(1, dtype=complex)
    n = 0
    for s in states:
        amps = np.kron(s.amplitudes, amps)
        n += s.num_qubits
    if n > MAX_QUBITS:
        raise ValueError(f"product exceeds {MAX_QUBITS} qubits")
    return _wrap(n, amps)


def _apply(psi: np.ndarray, n: int, matrix: np.ndarray, targets: Sequence[int],
           controls: Sequence[tuple[int, int]]) -> np.ndarray:
    t = psi.reshape((2,) * n)
    idx: list = [slice(None)] * n
    ctrl_axes = set()
    for q, p in controls:
        idx[n - 1 - q] = p
        ctrl_axes.add(n - 1 - q)
    idx = tuple(idx)
    sub = t[idx]
    remaining = [a for a in range(n) if a not in ctrl_axes]
    k = len(targets)
    # matrix axes run most-significant target first
    in_axes = [remaining.index(n - 1 - targets[k - 1 - i]) for i in range(k)]
    u = matrix.reshape((2,) * (2 * k))
    res = np.tensordot(u, sub, axes=(list(range(k, 2 * k)), in_axes))
    res = np.moveaxis(res, list(range(k)), in_axes)
    out = t.copy()
    out[idx] = res
    return out.reshape(-1)


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    n = state.num_qubits
    if max(gate.qubits) >= n:
        raise ValueError(f"{gate!r} addresses a qubit outside {n} qubits")
    return _wrap(n, _apply(state.amplitudes, n, gate.base_matrix, gate.targets, gate.controls))


def apply_circuit(state: StateVector, circuit: Circuit) -> StateVector:
    n = state.num_qubits
    if circuit.num_qubits != n:
        raise ValueError(
            f"circuit has {circuit.num_qubits} qubits but state has {n}"
        )
    psi = state.amplitudes
    for op in circuit.ops:
        psi = _apply(psi, n, op.base_matrix, op.targets, op.controls)
    return _wrap(n, psi)


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense matrix of a circuit, column ``j`` being the image of ``|j>``."""
    n = circuit.num_qubits
    if n > 12:
        raise ValueError("dense circuit matrix limited to 12 qubits")
    dim = 2 ** n
    cols = np.eye(dim, dtype=complex)
    out = np.empty((dim, dim), dtype=complex)
    for j in range(dim):
        psi = cols[j]
        for op in circuit.ops:
            psi = _apply(psi, n, op.base_matrix, op.targets, op.controls)
        out[:, j] = psi
    return out


def gate_unitary(gate: GateOp, num_qubits: int) -> np.ndarray:
    return circuit_unitary(Circuit(num_qubits, (gate,)))


def inner(a: StateVector, b: StateVector) -> complex:
    """<a|b>."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("dimension mismatch")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity_up_to_global_phase(a: StateVector, b: StateVector) -> float:
    return float(min(1.0, abs(inner(a, b)) ** 2))


def _split(state: StateVector, subset: Sequence[int]) -> np.ndarray:
    """Matrix M with rows indexed by ``subset`` (subset[0] least significant)."""
    n = state.num_qubits
    subset = list(subset)
    rest = [q for q in range(n) if q not in subset]
    t = state.amplitudes.reshape((2,) * n)
    # C-order flattening puts the first listed axis most significant
    axes = [n - 1 - q for q in reversed(subset)] + [n - 1 - q for q in reversed(rest)]
    return t.transpose(axes).reshape(2 ** len(subset), -1)


def _check_subset(n: int, subset: Sequence[int]) -> list[int]:
    subset = [int(q) for q in subset]
    if not subset:
        raise ValueError("subset must be nonempty")
    if len(set(subset)) != len(subset):
        raise ValueError("duplicate qubit indices in subset")
    if min(subset) < 0 or max(subset) >= n:
        raise ValueError("subset index outside the register")
    return subset


def reduced_density_matrix(state: StateVector, subset: Sequence[int]) -> np.ndarray:
    subset = _check_subset(state.num_qubits, subset)
    m = _split(state, subset)
    return m @ m.conj().T


def reduced_purity(state: StateVector, subset: Sequence[int]) -> float:
    """Tr(rho^2) of the reduced state on ``subset``."""
    subset = _check_subset(state.num_qubits, subset)
    if len(subset) == state.num_qubits:
        raise ValueError("subset must be a strict subset of the qubits")
    m = _split(state, subset)
    # Tr((M M^+)^2) == Tr((M^+ M)^2); use the smaller Gram matrix
    g = m @ m.conj().T if m.shape[0] <= m.shape[1] else m.conj().T @ m
    return float(np.real(np.vdot(g, g)))


def marginal_probabilities(state: StateVector, subset: Sequence[int]) -> np.ndarray:
    """Outcome distribution of measuring ``subset``.

    Outcome index has bit ``i`` equal to the value of qubit ``subset[i]``.
    """
    subset = _check_subset(state.num_qubits, subset)
    m = _split(state, subset)
    probs = np.sum(np.abs(m) ** 2, axis=1)
    return probs / probs.sum()


def sample(state: StateVector, subset: Sequence[int], shots: int,
           seed: int = 0) -> dict[int, int]:
    """Seeded finite-shot measurement of ``subset``; returns nonzero counts."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = marginal_probabilities(state, subset)
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs)
    return {int(k): int(c) for k, c in enumerate(counts) if c}


def project_out(state: StateVector, subset: Sequence[int],
                rest_state: StateVector) -> np.ndarray:
    """Amplitudes of ``(I_subset x <rest_state|) |state>``, keeping the phase.

    ``rest_state`` covers the complementary qubits in increasing index order.
    """
    subset = _check_subset(state.num_qubits, subset)
    m = _split(state, subset)
    if rest_state.amplitudes.size != m.shape[1]:
        raise ValueError("rest_state does not match the complementary register")
    return m @ rest_state.amplitudes.conj()


def eigenphase(circuit: Circuit, state: StateVector) -> float:
    """Phase in [0, 1) of <state|U|state>."""
    ov = inner(state, apply_circuit(state, circuit))
    return float(np.angle(ov) / (2 * np.pi) % 1.0)


def eigen_residual(circuit: Circuit, state: StateVector, phase: float) -> float:
    """|| U|s> - exp(2 pi i phase)|s> ||."""
    out = apply_circuit(state, circuit).amplitudes
    return float(np.linalg.norm(out - np.exp(2j * np.pi * phase) * state.amplitudes))


def mapping_unitary(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Unitary sending unit vector ``src`` to unit vector ``dst``.

    A phase times one Householder reflection, so the completion is
    deterministic.
    """
    src = np.asarray(src, dtype=complex)
    dst = np.asarray(dst, dtype=complex)
    if src.shape != dst.shape or src.ndim != 1:
        raise ValueError("src and dst must be vectors of equal length")
    for v in (src, dst):
        if abs(np.linalg.norm(v) - 1) > STATE_ATOL:
            raise ValueError("mapping_unitary needs normalized vectors")
    ov = np.vdot(src, dst)
    alpha = np.angle(ov) if abs(ov) > 1e-14 else 0.0
    d = np.exp(-1j * alpha) * dst
    u = src - d
    nu = np.vdot(u, u).real
    eye = np.eye(src.size, dtype=complex)
    if nu < 1e-28:
        return np.exp(1j * alpha) * eye
    return np.exp(1j * alpha) * (eye - 2.0 * np.outer(u, u.conj()) / nu)
