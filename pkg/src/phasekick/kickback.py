"""Single-ancilla phase kickback: the standard controlled-U form and the
uncontrolled gadget that controls only the preparation W.

Layout: the system register occupies qubits ``0 .. n-1`` and the ancilla is
qubit ``n`` (the highest index).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, GateOp, H, X, compose, controlled, embed
from .sim import (
    StateVector,
    apply_circuit,
    eigen_residual,
    marginal_probabilities,
    new_basis_state,
    reduced_density_matrix,
    reduced_purity,
    tensor,
)

EIGEN_ATOL = 1e-8
VARIANTS = ("standard", "uncontrolled")


def reference_vector(reference: int | StateVector, num_qubits: int) -> StateVector:
    if isinstance(reference, StateVector):
        if reference.num_qubits != num_qubits:
            raise ValueError("reference state does not match the system register")
        return reference
    return new_basis_state(num_qubits, int(reference))


def check_reference(U: Circuit, reference: StateVector, phase: float) -> None:
    if eigen_residual(U, reference, phase) > EIGEN_ATOL:
        raise ValueError("reference state is not an eigenstate within tolerance")


@dataclass(frozen=True)
class KickbackSpec:
    """Inputs of one kickback run.

    ``W`` maps the reference state to the target eigenstate, ``U`` is the
    unitary whose phase is kicked back and ``reference_phase`` is the known
    eigenphase of the reference state under ``U`` (reduced mod 1).
    """

    W: Circuit
    U: Circuit
    reference_state: int | StateVector = 0
    reference_phase: float = 0.0
    variant: str = "uncontrolled"
    check_eigenstate: bool = True

    def __post_init__(self):
        if self.W.num_qubits != self.U.num_qubits:
            raise ValueError("W and U must act on the same system register")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        object.__setattr__(self, "reference_phase", float(self.reference_phase) % 1.0)
        ref = reference_vector(self.reference_state, self.system_qubits)
        if self.check_eigenstate:
            check_reference(self.U, ref, self.reference_phase)

    @property
    def system_qubits(self) -> int:
        return self.U.num_qubits

    @property
    def ancilla(self) -> int:
        return self.system_qubits

    def reference(self) -> StateVector:
        return reference_vector(self.reference_state, self.system_qubits)

    def target(self) -> StateVector:
        """W applied to the reference state."""
        return apply_circuit(self.reference(), self.W)


def _system(c: Circuit, n_total: int) -> Circuit:
    return embed(c, list(range(c.num_qubits)), n_total)


def build_standard_kickback(spec: KickbackSpec) -> Circuit:
    if spec.variant != "standard":
        raise ValueError("spec variant is not 'standard'")
    n = spec.system_qubits + 1
    a = spec.ancilla
    h = Circuit(n, (H(a),))
    return compose(
        h,
        _system(spec.W, n),
        controlled(_system(spec.U, n), a, 1),
        h,
        label="standard kickback",
    )


def build_uncontrolled_kickback(spec: KickbackSpec) -> Circuit:
    if spec.variant != "uncontrolled":
        raise ValueError("spec variant is not 'uncontrolled'")
    n = spec.system_qubits + 1
    a = spec.ancilla
    h = Circuit(n, (H(a),))
    w = _system(spec.W, n)
    return compose(
        h,
        controlled(w, a, 1),
        _system(spec.U, n),
        controlled(w, a, 0),
        h,
        label="uncontrolled kickback",
    )


def build_kickback(spec: KickbackSpec) -> Circuit:
    if spec.variant == "standard":
        return build_standard_kickback(spec)
    return build_uncontrolled_kickback(spec)


def initial_state(spec: KickbackSpec) -> StateVector:
    """``|0>_a (x) |reference>_s``."""
    return tensor(spec.reference(), new_basis_state(1, 0))


@dataclass(frozen=True)
class KickbackResult:
    ancilla_p0: float
    system_purity: float
    final_system_fidelity_with_psi: float
    final_state: StateVector


def run_kickback(spec: KickbackSpec) -> KickbackResult:
    final = apply_circuit(initial_state(spec), build_kickback(spec))
    system = list(range(spec.system_qubits))
    p0 = float(marginal_probabilities(final, [spec.ancilla])[0])
    rho = reduced_density_matrix(final, system)
    psi = spec.target().amplitudes
    fid = float(np.real(psi.conj() @ rho @ psi))
    return KickbackResult(
        ancilla_p0=p0,
        system_purity=reduced_purity(final, system),
        final_system_fidelity_with_psi=fid,
        final_state=final,
    )


def predicted_p0(theta: float, phi: float = 0.0) -> float:
    return float(np.cos(np.pi * (theta - phi)) ** 2)


def diagonal_phase_unitary(phases) -> Circuit:
    """Diagonal U with ``U|k> = exp(2 pi i phases[k]) |k>`` as one dense gate."""
    phases = np.asarray(phases, dtype=float)
    n = phases.size.bit_length() - 1
    if phases.size != 2 ** n or n < 1:
        raise ValueError("need 2^n phases for n >= 1")
    g = GateOp("unitary", tuple(range(n)), matrix=np.diag(np.exp(2j * np.pi * phases)),
               label="U")
    return Circuit(n, (g,), "U")


def single_qubit_spec(theta: float, phi: float = 0.0,
                      variant: str = "uncontrolled") -> KickbackSpec:
    """One-qubit test bed: ``U = diag(e^{2 pi i phi}, e^{2 pi i theta})``, W = X."""
    return KickbackSpec(
        W=Circuit(1, (X(0),), "W"),
        U=diagonal_phase_unitary([phi, theta]),
        reference_state=0,
        reference_phase=phi,
        variant=variant,
    )
