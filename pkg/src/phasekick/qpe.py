"""m-bit phase estimation, with and without controlled powers of U.

Register layout: system qubits ``0 .. n-1``; the ancilla that carries
``U^(2^e)`` sits at qubit ``n + e``. The inverse QFT on the ancillas then
decodes a phase difference ``j / 2^m`` to the integer ``j`` read with
ancilla ``n`` as the least significant bit.

Blocks run in time order ``t = 0 .. m-1`` and block ``t`` uses exponent
``power_order[t]`` (default ``t``).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .circuit import (
    MAX_QUBITS,
    Circuit,
    GateOp,
    H,
    P,
    compose,
    controlled,
    embed,
    inverse_qft,
    invert,
    power,
)
from .kickback import EIGEN_ATOL, check_reference, reference_vector
from .sim import (
    StateVector,
    apply_circuit,
    eigen_residual,
    eigenphase,
    inner,
    mapping_unitary,
    marginal_probabilities,
    new_basis_state,
    project_out,
    reduced_density_matrix,
    reduced_purity,
    tensor,
)

FINAL_MODES = ("open_controlled_W", "controlled_W_dagger")
VARIANTS = ("uncontrolled", "standard")
EXACT_GRID_ATOL = 1e-9


@dataclass(frozen=True)
class QpeSpec:
    W: Circuit
    U: Circuit
    m: int
    reference_state: int | StateVector = 0
    reference_phase: float = 0.0
    final_block_mode: str = "open_controlled_W"
    power_order: tuple[int, ...] | None = None
    check_eigenstate: bool = True
    fuse_dense_powers: bool = True

    def __post_init__(self):
        if self.W.num_qubits != self.U.num_qubits:
            raise ValueError("W and U must act on the same system register")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.U.num_qubits + self.m > MAX_QUBITS:
            raise ValueError(
                f"qubit budget exceeded: {self.U.num_qubits} + {self.m} > {MAX_QUBITS}"
            )
        if self.final_block_mode not in FINAL_MODES:
            raise ValueError(f"final_block_mode must be one of {FINAL_MODES}")
        order = tuple(range(self.m)) if self.power_order is None else tuple(
            int(e) for e in self.power_order)
        if sorted(order) != list(range(self.m)):
            raise ValueError("power_order must be a permutation of 0..m-1")
        object.__setattr__(self, "power_order", order)
        object.__setattr__(self, "reference_phase", float(self.reference_phase) % 1.0)
        if self.check_eigenstate:
            check_reference(self.U, self.reference(), self.reference_phase)

    @property
    def system_qubits(self) -> int:
        return self.U.num_qubits

    @property
    def num_qubits(self) -> int:
        return self.system_qubits + self.m

    @property
    def ancillas(self) -> list[int]:
        """Ancilla qubits, least significant phase bit first."""
        return [self.system_qubits + e for e in range(self.m)]

    def reference(self) -> StateVector:
        return reference_vector(self.reference_state, self.system_qubits)

    def target(self) -> StateVector:
        return apply_circuit(self.reference(), self.W)

    def phase_difference(self) -> float:
        """(theta - phi) mod 1, with theta read off the prepared target state."""
        return (eigenphase(self.U, self.target()) - self.reference_phase) % 1.0

    def initial_state(self) -> StateVector:
        return tensor(self.reference(), new_basis_state(self.m, 0))


def _sys(spec: QpeSpec, c: Circuit) -> Circuit:
    return embed(c, list(range(spec.system_qubits)), spec.num_qubits)


def _u_power(spec: QpeSpec, e: int) -> Circuit:
    k = 2 ** e
    u = spec.U
    ops = u.ops
    if (spec.fuse_dense_powers and len(ops) == 1 and ops[0].name == "unitary"
            and not ops[0].controls and k > 1):
        g = ops[0]
        mat = np.linalg.matrix_power(g.base_matrix, k)
        name = f"{g.label or 'U'}^{k}"
        return _sys(spec, Circuit(u.num_qubits, (GateOp("unitary", g.targets, matrix=mat,
                                                         label=name),), name))
    return _sys(spec, power(u, k))


def _qft_dagger(spec: QpeSpec) -> Circuit:
    return embed(inverse_qft(spec.m), spec.ancillas, spec.num_qubits)


def uncontrolled_qpe_blocks(spec: QpeSpec) -> list[Circuit]:
    """One circuit per ancilla block, in time order, without the final QFT."""
    n = spec.num_qubits
    w = _sys(spec, spec.W)
    w_dag = invert(w)
    blocks = []
    for t, e in enumerate(spec.power_order):
        a = spec.system_qubits + e
        last = t == spec.m - 1
        if last and spec.final_block_mode == "open_controlled_W":
            closing = controlled(w, a, 0)
        else:
            closing = controlled(w_dag, a, 1)
        blocks.append(compose(Circuit(n, (H(a),)), controlled(w, a, 1),
                              _u_power(spec, e), closing, label=f"block {t}"))
    return blocks


def build_uncontrolled_qpe(spec: QpeSpec, include_qft: bool = True) -> Circuit:
    parts = uncontrolled_qpe_blocks(spec)
    if include_qft:
        parts.append(_qft_dagger(spec))
    return compose(*parts, label="uncontrolled QPE")


def build_standard_qpe(spec: QpeSpec, include_qft: bool = True) -> Circuit:
    """Textbook QPE with controlled powers of U.

    Each ancilla also gets the known-phase correction ``P(-2 pi 2^e phi)`` so
    the register reads ``theta - phi``, the same quantity the uncontrolled
    circuit reads. With ``reference_phase == 0`` no correction is emitted.
    """
    n = spec.num_qubits
    phi = spec.reference_phase
    parts = [_sys(spec, spec.W)]
    for e in spec.power_order:
        a = spec.system_qubits + e
        parts.append(Circuit(n, (H(a),)))
        parts.append(controlled(_u_power(spec, e), a, 1))
        shift = (-(2 ** e) * phi) % 1.0
        if shift:
            parts.append(Circuit(n, (P(2 * math.pi * shift, a),)))
    if include_qft:
        parts.append(_qft_dagger(spec))
    return compose(*parts, label="standard QPE")


def build_qpe(spec: QpeSpec, variant: str = "uncontrolled", include_qft: bool = True) -> Circuit:
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    if variant == "standard":
        return build_standard_qpe(spec, include_qft)
    return build_uncontrolled_qpe(spec, include_qft)


def final_state(spec: QpeSpec, variant: str = "uncontrolled",
                include_qft: bool = True) -> StateVector:
    return apply_circuit(spec.initial_state(), build_qpe(spec, variant, include_qft))


@dataclass(frozen=True)
class PhaseEstimate:
    m: int
    distribution: np.ndarray
    map_outcome: int
    map_fraction: float
    success_probability: float
    target_phase: float

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "distribution": [float(p) for p in self.distribution],
            "map_outcome": self.map_outcome,
            "map_fraction": self.map_fraction,
            "success_probability": self.success_probability,
            "target_phase": self.target_phase,
        }


def success_mass(distribution: np.ndarray, phase: float) -> float:
    """Mass on the grid point at ``phase`` if representable, else on the two
    grid points bracketing it."""
    size = distribution.size
    x = (phase % 1.0) * size
    j = round(x)
    if abs(x - j) <= EXACT_GRID_ATOL:
        return float(distribution[j % size])
    lo = math.floor(x)
    return float(distribution[lo % size] + distribution[(lo + 1) % size])


def phase_estimate_from(distribution: np.ndarray, target_phase: float) -> PhaseEstimate:
    distribution = np.asarray(distribution, dtype=float)
    m = distribution.size.bit_length() - 1
    best = int(np.argmax(distribution))  # first maximum on ties
    return PhaseEstimate(
        m=m,
        distribution=distribution,
        map_outcome=best,
        map_fraction=best / distribution.size,
        success_probability=success_mass(distribution, target_phase),
        target_phase=float(target_phase % 1.0),
    )


def estimate_phase(spec: QpeSpec, variant: str = "uncontrolled",
                   target_phase: float | None = None) -> PhaseEstimate:
    """Exact readout distribution of the ancilla register after the inverse QFT."""
    state = final_state(spec, variant)
    dist = marginal_probabilities(state, spec.ancillas)
    if target_phase is None:
        target_phase = spec.phase_difference()
    return phase_estimate_from(dist, target_phase)


def pre_qft_ancilla_state(spec: QpeSpec, variant: str = "uncontrolled") -> StateVector:
    """Ancilla register state just before the inverse QFT.

    The global phase is kept by projecting the system onto the state it is
    expected to end in (the target, or the reference for the W-dagger closing
    block).
    """
    state = final_state(spec, variant, include_qft=False)
    anc = spec.ancillas
    if reduced_purity(state, anc) < 1 - 1e-10:
        raise ValueError("residual entanglement between ancillas and system")
    if variant == "uncontrolled" and spec.final_block_mode == "controlled_W_dagger":
        sys_state = spec.reference()
    else:
        sys_state = spec.target()
    amps = project_out(state, anc, sys_state)
    norm = np.linalg.norm(amps)
    if norm < 1 - 1e-8:
        # system ended elsewhere; fall back to the phase-free dominant vector
        w, v = np.linalg.eigh(reduced_density_matrix(state, anc))
        amps = v[:, -1]
    else:
        amps = amps / norm
    return StateVector(spec.m, amps)


def product_fourier_state(delta: float, m: int, global_phase: float = 0.0) -> StateVector:
    """``exp(2 pi i g) (x)_e (|0> + exp(2 pi i 2^e delta)|1>)/sqrt 2``, e = bit index."""
    y = np.arange(2 ** m)
    amps = np.exp(2j * np.pi * (y * delta + global_phase)) / math.sqrt(2 ** m)
    return StateVector(m, amps)


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return float(0.5 * np.sum(np.abs(np.asarray(p) - np.asarray(q))))


def joint_state_fidelity(spec: QpeSpec) -> float:
    """|<uncontrolled|standard>|^2 of the final joint states."""
    a = final_state(spec, "uncontrolled")
    b = final_state(spec, "standard")
    return float(abs(inner(a, b)) ** 2)


def _check_perp(spec: QpeSpec, perp_state: StateVector) -> None:
    if perp_state.num_qubits != spec.system_qubits:
        raise ValueError("perp_state does not match the system register")
    if abs(inner(spec.target(), perp_state)) > EIGEN_ATOL:
        raise ValueError("perp_state is not orthogonal to the target state")
    perp_phase = eigenphase(spec.U, perp_state)
    if eigen_residual(spec.U, perp_state, perp_phase) > EIGEN_ATOL:
        raise ValueError("perp_state is not an eigenstate of U")


def perturbed_spec(spec: QpeSpec, perp_state: StateVector, delta: float) -> QpeSpec:
    """Copy of ``spec`` whose W prepares ``(psi + delta perp) / sqrt(1 + delta^2)``."""
    _check_perp(spec, perp_state)
    n_s = spec.system_qubits
    tilde = (spec.target().amplitudes + delta * perp_state.amplitudes) / math.sqrt(1 + delta ** 2)
    w_tilde = GateOp("unitary", tuple(range(n_s)),
                     matrix=mapping_unitary(spec.reference().amplitudes, tilde), label="W~")
    return QpeSpec(
        W=Circuit(n_s, (w_tilde,), "W~"), U=spec.U, m=spec.m,
        reference_state=spec.reference_state, reference_phase=spec.reference_phase,
        final_block_mode=spec.final_block_mode, power_order=spec.power_order,
        check_eigenstate=False, fuse_dense_powers=spec.fuse_dense_powers,
    )


def eigenstate_error_sweep(spec: QpeSpec, perp_state: StateVector,
                           deltas: Iterable[float],
                           variant: str = "uncontrolled") -> list[tuple[float, float]]:
    """Readout success when W is replaced by one that prepares
    ``(psi + delta psi_perp) / sqrt(1 + delta^2)``.

    Success is the probability of the outcome the exact eigenstate produces.
    """
    _check_perp(spec, perp_state)
    ideal = estimate_phase(spec, variant).map_outcome
    rows = []
    for delta in deltas:
        perturbed = perturbed_spec(spec, perp_state, float(delta))
        dist = marginal_probabilities(final_state(perturbed, variant), perturbed.ancillas)
        rows.append((float(delta), float(dist[ideal])))
    return rows


def sweep_to_csv(rows: Sequence[tuple[float, float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["delta", "success_probability"])
    for d, p in rows:
        w.writerow([repr(float(d)), repr(float(p))])
    return buf.getvalue()


def sweep_to_json(rows: Sequence[tuple[float, float]]) -> str:
    return json.dumps([{"delta": float(d), "success_probability": float(p)} for d, p in rows])
