"""Circuit data model and transformations.

Qubit ordering follows one convention everywhere: qubit 0 is the least
significant bit of a basis index. A gate's matrix is indexed the same way over
its ``targets``: ``targets[0]`` is the least significant bit of the matrix
index. Controls are kept separate from the base matrix as ``(qubit, polarity)``
pairs; polarity 1 acts on the control's ``|1>`` subspace, polarity 0 on ``|0>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import schur

UNITARY_ATOL = 1e-10
MAX_QUBITS = 22

_SQ2 = 1.0 / math.sqrt(2.0)

_FIXED = {
    "I": np.eye(2, dtype=complex),
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.diag([1, 1j]).astype(complex),
    "SDG": np.diag([1, -1j]).astype(complex),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]),
    "TDG": np.diag([1, np.exp(-1j * np.pi / 4)]),
    "SWAP": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}

_XX = np.kron(_FIXED["X"], _FIXED["X"])
_YY = np.kron(_FIXED["Y"], _FIXED["Y"])
_ZZ = np.kron(_FIXED["Z"], _FIXED["Z"])


def _rot(pauli: np.ndarray, theta: float) -> np.ndarray:
    # exp(-i theta/2 P) for an involutory P
    dim = pauli.shape[0]
    return math.cos(theta / 2) * np.eye(dim) - 1j * math.sin(theta / 2) * pauli


_PARAMETRIC = {
    "P": (1, lambda lam: np.diag([1.0, np.exp(1j * lam)])),
    "RX": (1, lambda t: _rot(_FIXED["X"], t)),
    "RY": (1, lambda t: _rot(_FIXED["Y"], t)),
    "RZ": (1, lambda t: np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])),
    "RXX": (2, lambda t: _rot(_XX, t)),
    "RYY": (2, lambda t: _rot(_YY, t)),
    "RZZ": (2, lambda t: _rot(_ZZ, t)),
}

_SELF_INVERSE = {"I", "H", "X", "Y", "Z", "SWAP"}
_INVERSE_NAME = {"S": "SDG", "SDG": "S", "T": "TDG", "TDG": "T"}

GATE_NAMES = frozenset(_FIXED) | frozenset(_PARAMETRIC) | {"unitary"}


def _name_arity(name: str) -> int:
    if name in _FIXED:
        return int(round(math.log2(_FIXED[name].shape[0])))
    return _PARAMETRIC[name][0]


def _is_frozen_complex(a) -> bool:
    return (isinstance(a, np.ndarray) and a.dtype == np.complex128
            and not a.flags.writeable and a.base is None)


def is_unitary(matrix: np.ndarray, atol: float = UNITARY_ATOL) -> bool:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    eye = np.eye(matrix.shape[0])
    return bool(np.allclose(matrix.conj().T @ matrix, eye, atol=atol, rtol=0))


@dataclass(frozen=True, eq=False)
class GateOp:
    """One gate instance: a named primitive or a dense unitary.

    ``name`` is one of :data:`GATE_NAMES`. For ``name == "unitary"`` the
    ``matrix`` field carries the dense base matrix acting on ``targets``.
    """

    name: str
    targets: tuple[int, ...]
    controls: tuple[tuple[int, int], ...] = ()
    params: tuple[float, ...] = ()
    matrix: np.ndarray | None = field(default=None, repr=False)
    label: str = ""

    def __post_init__(self):
        name = self.name.upper() if self.name != "unitary" else self.name
        if name not in GATE_NAMES:
            raise ValueError(f"unknown gate {self.name!r}")
        targets = tuple(int(q) for q in self.targets)
        controls = tuple((int(q), int(p)) for q, p in self.controls)
        params = tuple(float(x) for x in self.params)
        if not targets:
            raise ValueError("gate needs at least one target")
        for q, p in controls:
            if p not in (0, 1):
                raise ValueError(f"control polarity must be 0 or 1, got {p}")
        indices = list(targets) + [q for q, _ in controls]
        if min(indices) < 0:
            raise ValueError("negative qubit index")
        if len(set(indices)) != len(indices):
            raise ValueError("targets and controls must be disjoint without duplicates")
        if not all(math.isfinite(x) for x in params):
            raise ValueError("non-finite gate parameter")

        matrix = None
        if name == "unitary":
            if self.matrix is None:
                raise ValueError("dense unitary gate needs a matrix")
            if _is_frozen_complex(self.matrix):
                # already validated by another GateOp; shared, not copied
                matrix = self.matrix
                if matrix.shape != (2 ** len(targets),) * 2:
                    raise ValueError(
                        f"matrix shape {matrix.shape} does not match {len(targets)} targets"
                    )
                if params:
                    raise ValueError("dense unitary takes no params")
                object.__setattr__(self, "targets", targets)
                object.__setattr__(self, "controls", controls)
                object.__setattr__(self, "params", params)
                return
            matrix = np.array(self.matrix, dtype=complex)
            if matrix.shape != (2 ** len(targets),) * 2:
                raise ValueError(
                    f"matrix shape {matrix.shape} does not match {len(targets)} targets"
                )
            if not np.all(np.isfinite(matrix)):
                raise ValueError("non-finite matrix entry")
            if not is_unitary(matrix):
                raise ValueError("gate matrix is not unitary within tolerance")
            matrix.setflags(write=False)
            if params:
                raise ValueError("dense unitary takes no params")
        else:
            if self.matrix is not None:
                raise ValueError(f"named gate {name} takes no matrix")
            if len(targets) != _name_arity(name):
                raise ValueError(f"{name} acts on {_name_arity(name)} qubit(s)")
            want = 1 if name in _PARAMETRIC else 0
            if len(params) != want:
                raise ValueError(f"{name} expects {want} parameter(s)")

        object.__setattr__(self, "name", name)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "controls", controls)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "matrix", matrix)

    @property
    def base_matrix(self) -> np.ndarray:
        """Matrix on ``targets`` alone, ignoring controls."""
        if self.name == "unitary":
            return self.matrix
        if self.name in _FIXED:
            return _FIXED[self.name]
        return np.asarray(_PARAMETRIC[self.name][1](self.params[0]), dtype=complex)

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + tuple(q for q, _ in self.controls)

    @property
    def arity(self) -> int:
        return len(self.targets) + len(self.controls)

    def inverse(self) -> "GateOp":
        if self.name == "unitary":
            return GateOp("unitary", self.targets, self.controls,
                          matrix=self.matrix.conj().T, label=_dagger_label(self.label))
        if self.name in _SELF_INVERSE:
            return self
        if self.name in _INVERSE_NAME:
            return GateOp(_INVERSE_NAME[self.name], self.targets, self.controls,
                          label=_dagger_label(self.label))
        return GateOp(self.name, self.targets, self.controls, (-self.params[0],),
                      label=_dagger_label(self.label))

    def with_control(self, qubit: int, polarity: int = 1) -> "GateOp":
        return GateOp(self.name, self.targets, self.controls + ((qubit, polarity),),
                      self.params, self.matrix, self.label)

    def remapped(self, mapping: Sequence[int]) -> "GateOp":
        return GateOp(self.name, tuple(mapping[q] for q in self.targets),
                      tuple((mapping[q], p) for q, p in self.controls),
                      self.params, self.matrix, self.label)

    def __repr__(self) -> str:
        parts = [self.name]
        if self.params:
            parts.append(f"({', '.join(f'{p:.6g}' for p in self.params)})")
        s = "".join(parts) + f"{list(self.targets)}"
        if self.controls:
            s += " ctrl=" + ",".join(f"{q}:{p}" for q, p in self.controls)
        if self.label:
            s += f" '{self.label}'"
        return f"GateOp({s})"


def _dagger_label(label: str) -> str:
    if not label:
        return label
    return label[:-1] if label.endswith("†") else label + "†"


# Constructors for the common primitives.
def H(q: int) -> GateOp: return GateOp("H", (q,))
def X(q: int) -> GateOp: return GateOp("X", (q,))
def Y(q: int) -> GateOp: return GateOp("Y", (q,))
def Z(q: int) -> GateOp: return GateOp("Z", (q,))
def P(lam: float, q: int) -> GateOp: return GateOp("P", (q,), params=(lam,))
def RX(t: float, q: int) -> GateOp: return GateOp("RX", (q,), params=(t,))
def RY(t: float, q: int) -> GateOp: return GateOp("RY", (q,), params=(t,))
def RZ(t: float, q: int) -> GateOp: return GateOp("RZ", (q,), params=(t,))
def CX(c: int, t: int) -> GateOp: return GateOp("X", (t,), ((c, 1),))
def CZ(c: int, t: int) -> GateOp: return GateOp("Z", (t,), ((c, 1),))
def CP(lam: float, c: int, t: int) -> GateOp: return GateOp("P", (t,), ((c, 1),), (lam,))
def SWAP(a: int, b: int) -> GateOp: return GateOp("SWAP", (a, b))
def RXX(t: float, a: int, b: int) -> GateOp: return GateOp("RXX", (a, b), params=(t,))
def RYY(t: float, a: int, b: int) -> GateOp: return GateOp("RYY", (a, b), params=(t,))
def RZZ(t: float, a: int, b: int) -> GateOp: return GateOp("RZZ", (a, b), params=(t,))


def unitary_gate(matrix: np.ndarray, targets: Iterable[int], label: str = "") -> GateOp:
    return GateOp("unitary", tuple(targets), matrix=matrix, label=label)


@dataclass(frozen=True, eq=False)
class Circuit:
    """Ordered gate sequence on a fixed number of qubits."""

    num_qubits: int
    ops: tuple[GateOp, ...] = ()
    label: str = ""

    def __post_init__(self):
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise ValueError(f"num_qubits must be in [1, {MAX_QUBITS}], got {self.num_qubits}")
        ops = tuple(self.ops)
        for op in ops:
            if not isinstance(op, GateOp):
                raise TypeError(f"expected GateOp, got {type(op).__name__}")
            if max(op.qubits) >= self.num_qubits:
                raise ValueError(f"{op!r} addresses a qubit outside {self.num_qubits} qubits")
        object.__setattr__(self, "ops", ops)

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def __add__(self, other: "Circuit") -> "Circuit":
        return compose(self, other)

    def __repr__(self) -> str:
        tag = f" {self.label!r}" if self.label else ""
        return f"Circuit({self.num_qubits} qubits, {len(self.ops)} ops{tag})"


def compose(*circuits: Circuit, label: str = "") -> Circuit:
    """Concatenate circuits that share a qubit count, first argument first in time."""
    if not circuits:
        raise ValueError("nothing to compose")
    n = circuits[0].num_qubits
    if any(c.num_qubits != n for c in circuits):
        raise ValueError("qubit-count mismatch in compose")
    return Circuit(n, tuple(op for c in circuits for op in c.ops), label)


def embed(circuit: Circuit, qubits: Sequence[int], num_qubits: int) -> Circuit:
    """Place ``circuit`` on the given qubits of a larger register."""
    if len(qubits) != circuit.num_qubits:
        raise ValueError("need one target index per circuit qubit")
    return Circuit(num_qubits, tuple(op.remapped(qubits) for op in circuit.ops), circuit.label)


def power(circuit: Circuit, k: int) -> Circuit:
    """The circuit repeated ``k`` times. ``k`` must be at least 1."""
    if k < 1:
        raise ValueError("power requires k >= 1")
    return Circuit(circuit.num_qubits, circuit.ops * k,
                   f"{circuit.label}^{k}" if circuit.label else "")


def invert(circuit: Circuit) -> Circuit:
    return Circuit(circuit.num_qubits, tuple(op.inverse() for op in reversed(circuit.ops)),
                   _dagger_label(circuit.label))


def controlled(circuit: Circuit, control: int, polarity: int = 1) -> Circuit:
    """Semantic control: attach ``(control, polarity)`` to every gate."""
    return Circuit(circuit.num_qubits,
                   tuple(op.with_control(control, polarity) for op in circuit.ops),
                   circuit.label)


@dataclass(frozen=True)
class GateCountReport:
    n1: int
    n2: int
    rejected: int = 0

    @property
    def flagged(self) -> bool:
        """True when gates of arity three or more were present."""
        return self.rejected > 0

    @property
    def total(self) -> int:
        return self.n1 + self.n2 + self.rejected


def count_gates(circuit: Circuit) -> GateCountReport:
    """Tally gates by total arity (targets plus controls)."""
    n1 = n2 = rejected = 0
    for op in circuit.ops:
        if op.arity == 1:
            n1 += 1
        elif op.arity == 2:
            n2 += 1
        else:
            rejected += 1
    return GateCountReport(n1, n2, rejected)


# --- controlled compilation -------------------------------------------------

_LOCAL_BASIS = {
    "RXX": _FIXED["H"],
    "RYY": _FIXED["S"] @ _FIXED["H"],
    "RZZ": np.eye(2, dtype=complex),
}


def _local_diagonal_form(op: GateOp) -> tuple[list[int], list[np.ndarray], np.ndarray]:
    """Write ``op`` as (V_0 x V_1) diag(exp(i d)) (V_0 x V_1)^dagger.

    Returns the qubits (bit 0 first), the per-qubit basis changes ``V`` and
    the phase angles ``d`` indexed over those qubits.
    """
    if op.arity == 1:
        t, z = schur(op.base_matrix, output="complex")
        return [op.targets[0]], [z], np.angle(np.diag(t))
    if op.arity == 2 and len(op.controls) == 1:
        (c, pol), tgt = op.controls[0], op.targets[0]
        t, z = schur(op.base_matrix, output="complex")
        lam = np.angle(np.diag(t))
        vc = np.eye(2, dtype=complex) if pol == 1 else _FIXED["X"]
        # bit 0 = control, bit 1 = target
        d = np.array([0.0, lam[0], 0.0, lam[1]])
        return [c, tgt], [vc, z], d
    if op.arity == 2 and op.name in _LOCAL_BASIS:
        v = _LOCAL_BASIS[op.name]
        theta = op.params[0]
        d = np.array([-theta / 2, theta / 2, theta / 2, -theta / 2])
        return list(op.targets), [v, v], d
    raise ValueError(f"{op!r} has no local diagonal form; decompose it first")


def _parity_weights(f: np.ndarray) -> np.ndarray:
    """Weights w_s with f(x) = sum_s w_s * parity(s & x), given f(0) == 0."""
    n = f.size
    w = np.zeros(n)
    for s in range(1, n):
        signs = np.array([(-1) ** bin(s & x).count("1") for x in range(n)])
        w[s] = -2.0 * float(signs @ f) / n
    return w


def _phase_polynomial(qubits: list[int], f: np.ndarray) -> list[GateOp]:
    """CNOT + phase network for diag(exp(i f)) on 2 or 3 qubits (bit 0 first).

    Uses 2 CNOTs on two qubits and 6 on three, visiting every nonzero parity.
    """
    w = _parity_weights(f)
    ops: list[GateOp] = []

    def phase(mask: int, q: int):
        if abs(w[mask]) > 1e-15:
            ops.append(P(w[mask], q))

    if len(qubits) == 2:
        q, t = qubits
        phase(0b01, q)
        phase(0b10, t)
        ops.append(CX(q, t))
        phase(0b11, t)
        ops.append(CX(q, t))
        return ops
    q, a, b = qubits
    phase(0b001, q)
    phase(0b010, a)
    phase(0b100, b)
    ops.append(CX(a, b))
    phase(0b110, b)
    ops.append(CX(q, b))
    phase(0b111, b)
    ops.append(CX(a, b))
    phase(0b101, b)
    ops.append(CX(q, b))
    ops.append(CX(q, a))
    phase(0b011, a)
    ops.append(CX(q, a))
    return ops


def _basis_change(v: np.ndarray, q: int) -> list[GateOp]:
    if np.allclose(v, np.eye(2), atol=1e-14):
        return []
    return [unitary_gate(v, (q,))]


def _compile_controlled_op(op: GateOp, control: int, polarity: int) -> list[GateOp]:
    qubits, bases, d = _local_diagonal_form(op)
    k = len(qubits)
    # f(x_ctrl, x_local) = x_ctrl * d(x_local); control is bit 0
    f = np.zeros(2 ** (k + 1))
    f[1::2] = d
    out: list[GateOp] = []
    if polarity == 0:
        out.append(X(control))
    for q, v in zip(qubits, bases):
        out += _basis_change(v.conj().T, q)
    out += _phase_polynomial([control] + qubits, f)
    for q, v in zip(qubits, bases):
        out += _basis_change(v, q)
    if polarity == 0:
        out.append(X(control))
    return out


def compile_controlled(circuit: Circuit, control: int, polarity: int = 1) -> Circuit:
    """Gate-level controlled version of ``circuit``.

    Every single-qubit gate becomes exactly 2 CNOTs plus single-qubit gates and
    every two-qubit gate exactly 6 CNOTs plus single-qubit gates, so the
    output's two-qubit count is ``2*n1 + 6*n2`` of the input. Each gate is
    rotated to a diagonal by local basis changes; the controlled diagonal is a
    phase polynomial realised by a fixed CNOT ladder.
    """
    if polarity not in (0, 1):
        raise ValueError("polarity must be 0 or 1")
    if not 0 <= control < circuit.num_qubits:
        raise ValueError("control index outside the circuit register")
    ops: list[GateOp] = []
    for op in circuit.ops:
        if control in op.qubits:
            raise ValueError(f"control qubit {control} is already used by {op!r}")
        if op.arity > 2:
            raise ValueError(f"{op!r} has arity {op.arity}; only 1- and 2-qubit gates compile")
        ops += _compile_controlled_op(op, control, polarity)
    return Circuit(circuit.num_qubits, tuple(ops), circuit.label)


# --- Fourier transform ------------------------------------------------------

def qft(m: int, swaps: bool = True) -> Circuit:
    """Forward DFT on ``m`` qubits: entry (j, k) = exp(2 pi i jk / 2^m) / sqrt(2^m)."""
    if not 1 <= m <= MAX_QUBITS:
        raise ValueError(f"m must be in [1, {MAX_QUBITS}]")
    ops: list[GateOp] = []
    for j in reversed(range(m)):
        ops.append(H(j))
        for k in reversed(range(j)):
            ops.append(CP(math.pi / 2 ** (j - k), k, j))
    if swaps:
        ops += [SWAP(j, m - 1 - j) for j in range(m // 2)]
    return Circuit(m, tuple(ops), "QFT")


def inverse_qft(m: int, swaps: bool = True) -> Circuit:
    """Inverse DFT on ``m`` qubits.

    With ``swaps=True`` the circuit matrix is exactly the conjugate transpose
    of the DFT in the little-endian index convention, so the Fourier state
    ``sum_y exp(2 pi i y j / 2^m)|y>`` decodes to ``|j>``: qubit ``b`` of the
    register receives bit ``b`` of ``j``. Worked 3-bit case: phase fraction
    0.101 (j = 5) leaves qubit 0 = 1, qubit 1 = 0, qubit 2 = 1, so reading the
    register from its highest qubit down gives the fraction's digits in order.
    ``swaps=False`` drops the final reversal; the output register is then
    bit-reversed.
    """
    c = invert(qft(m, swaps))
    return Circuit(m, c.ops, "QFT†")


# --- serialization ----------------------------------------------------------

def op_to_dict(op: GateOp) -> dict:
    d = {
        "kind": op.name,
        "params": list(op.params),
        "targets": list(op.targets),
        "controls": [[q, p] for q, p in op.controls],
    }
    if op.matrix is not None:
        d["matrix"] = [[[float(z.real), float(z.imag)] for z in row] for row in op.matrix]
    if op.label:
        d["label"] = op.label
    return d


def op_from_dict(d: dict) -> GateOp:
    matrix = None
    if "matrix" in d:
        matrix = np.array([[complex(re, im) for re, im in row] for row in d["matrix"]])
    return GateOp(d["kind"], tuple(d["targets"]),
                  tuple((q, p) for q, p in d.get("controls", [])),
                  tuple(d.get("params", [])), matrix, d.get("label", ""))


def circuit_to_dict(circuit: Circuit) -> dict:
    return {
        "num_qubits": circuit.num_qubits,
        "label": circuit.label,
        "ops": [op_to_dict(op) for op in circuit.ops],
    }


def circuit_from_dict(d: dict) -> Circuit:
    return Circuit(int(d["num_qubits"]), tuple(op_from_dict(o) for o in d["ops"]),
                   d.get("label", ""))
