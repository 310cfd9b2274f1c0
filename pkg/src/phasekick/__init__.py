"""Phase kickback and phase estimation without controlled powers of U.

Statevector simulation, a small circuit IR, the single-ancilla gadget, m-bit
uncontrolled QPE, a two-qubit gate cost model and two applications
(Heisenberg ground energy, order finding).
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .circuit import Circuit, GateOp, compile_controlled, count_gates, inverse_qft, qft
from .kickback import KickbackSpec, build_kickback, run_kickback
from .qpe import QpeSpec, build_qpe, estimate_phase
from .resources import CostProfile, reduction_ratio, standard_qpe_cost, uncontrolled_qpe_cost
from .sim import StateVector, apply_circuit, new_basis_state

__all__ = [
    "Circuit", "GateOp", "compile_controlled", "count_gates", "inverse_qft", "qft",
    "KickbackSpec", "build_kickback", "run_kickback",
    "QpeSpec", "build_qpe", "estimate_phase",
    "CostProfile", "reduction_ratio", "standard_qpe_cost", "uncontrolled_qpe_cost",
    "StateVector", "apply_circuit", "new_basis_state",
]
