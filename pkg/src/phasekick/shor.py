"""Order finding with an uncontrolled first phase bit.

The first block replaces controlled-M_a by the kickback gadget with
``W = X`` on system qubit 0: ``M_a|0...0> = |0...0>`` is the reference and
``W|0...0> = |1>`` is the input the textbook circuit would start from.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .circuit import MAX_QUBITS, Circuit, GateOp, H, X, compose, controlled, embed, inverse_qft
from .qpe import QpeSpec, build_standard_qpe
from .sim import StateVector, apply_circuit, marginal_probabilities, new_basis_state, sample

MA_LABEL = "M_a"


def _check_coprime(a: int, N: int) -> None:
    if N < 2:
        raise ValueError("modulus must be >= 2")
    if math.gcd(a, N) != 1:
        raise ValueError(f"base not coprime: gcd({a}, {N}) = {math.gcd(a, N)}")


def register_width(N: int) -> int:
    return max(1, (N - 1).bit_length())


def modular_mult_unitary(a: int, N: int, label: str = MA_LABEL) -> GateOp:
    """Permutation ``|x> -> |a x mod N>`` for ``x < N``; identity on ``x >= N``."""
    _check_coprime(a, N)
    n = register_width(N)
    dim = 2 ** n
    perm = np.arange(dim)
    perm[:N] = (a * np.arange(N)) % N
    mat = np.zeros((dim, dim), dtype=complex)
    mat[perm, np.arange(dim)] = 1.0
    return GateOp("unitary", tuple(range(n)), matrix=mat, label=label)


def classical_order(a: int, N: int) -> int:
    _check_coprime(a, N)
    r, x = 1, a % N
    while x != 1 % N:
        x = (x * a) % N
        r += 1
    return r


def eigenvector_psi(j: int, a: int, N: int) -> StateVector:
    """``(1/sqrt r) sum_k w_r^{-jk} |a^k mod N>``, eigenvalue ``w_r^j``."""
    r = classical_order(a, N)
    if not 0 <= j < r:
        raise ValueError(f"j must be in [0, {r})")
    n = register_width(N)
    amps = np.zeros(2 ** n, dtype=complex)
    for k in range(r):
        amps[pow(a, k, N)] += np.exp(-2j * np.pi * j * k / r) / math.sqrt(r)
    psi = StateVector(n, amps)
    ma = modular_mult_unitary(a, N).base_matrix
    if np.linalg.norm(ma @ amps - np.exp(2j * np.pi * j / r) * amps) > 1e-10:
        raise ArithmeticError("eigen-relation check failed")
    return psi


@dataclass(frozen=True)
class OrderFindingSpec:
    N: int
    a: int
    m: int
    seed: int = 0

    def __post_init__(self):
        if self.N < 3:
            raise ValueError("N must be >= 3")
        if not 1 <= self.a < self.N:
            raise ValueError("a must satisfy 1 <= a < N")
        _check_coprime(self.a, self.N)
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.n_sys + self.m > MAX_QUBITS:
            raise ValueError(f"qubit budget exceeded: {self.n_sys} + {self.m} > {MAX_QUBITS}")

    @property
    def n_sys(self) -> int:
        return register_width(self.N)

    @property
    def num_qubits(self) -> int:
        return self.n_sys + self.m

    @property
    def ancillas(self) -> list[int]:
        return [self.n_sys + e for e in range(self.m)]


def _sys_gate(spec: OrderFindingSpec, g: GateOp) -> Circuit:
    return embed(Circuit(spec.n_sys, (g,)), list(range(spec.n_sys)), spec.num_qubits)


def _power_gate(spec: OrderFindingSpec, e: int) -> GateOp:
    # M_a^(2^e) is M_b with b = a^(2^e) mod N
    b = pow(spec.a, 2 ** e, spec.N)
    return modular_mult_unitary(b, spec.N, label=f"{MA_LABEL}^{2 ** e}")


def build_hybrid_order_circuit(spec: OrderFindingSpec) -> Circuit:
    """Gadget on the first block, controlled M_a powers on the rest, then QFT-dagger."""
    n = spec.num_qubits
    a0 = spec.ancillas[0]
    w = Circuit(n, (X(0),), "W")
    parts = [
        Circuit(n, (H(a0),)),
        controlled(w, a0, 1),
        _sys_gate(spec, modular_mult_unitary(spec.a, spec.N)),
        controlled(w, a0, 0),
    ]
    for e in range(1, spec.m):
        anc = spec.ancillas[e]
        parts.append(Circuit(n, (H(anc),)))
        parts.append(controlled(_sys_gate(spec, _power_gate(spec, e)), anc, 1))
    parts.append(embed(inverse_qft(spec.m), spec.ancillas, n))
    return compose(*parts, label="hybrid order finding")


def reference_qpe_spec(spec: OrderFindingSpec) -> QpeSpec:
    """Textbook setting: W = X prepares |1>, every power of M_a controlled."""
    return QpeSpec(
        W=Circuit(spec.n_sys, (X(0),), "W"),
        U=Circuit(spec.n_sys, (modular_mult_unitary(spec.a, spec.N),), "U"),
        m=spec.m,
    )


def build_full_order_circuit(spec: OrderFindingSpec) -> Circuit:
    """Fully controlled order finding; starts from |0...0> and applies X first."""
    return build_standard_qpe(reference_qpe_spec(spec))


def initial_state(spec: OrderFindingSpec) -> StateVector:
    return new_basis_state(spec.num_qubits, 0)


def uncontrolled_block_count(circuit: Circuit) -> int:
    return sum(1 for op in circuit.ops
               if op.label.startswith(MA_LABEL) and not op.controls)


def controlled_block_count(circuit: Circuit) -> int:
    return sum(1 for op in circuit.ops
               if op.label.startswith(MA_LABEL) and op.controls)


def outcome_distribution(spec: OrderFindingSpec) -> np.ndarray:
    final = apply_circuit(initial_state(spec), build_hybrid_order_circuit(spec))
    return marginal_probabilities(final, spec.ancillas)


def convergents(x: Fraction):
    """Yield the continued-fraction convergents of ``x``."""
    h0, h1, k0, k1 = 0, 1, 1, 0
    num, den = x.numerator, x.denominator
    while den:
        q, rem = divmod(num, den)
        h0, h1 = h1, q * h1 + h0
        k0, k1 = k1, q * k1 + k0
        yield Fraction(h1, k1)
        num, den = den, rem


def recover_order(y: int, m: int, N: int) -> int | None:
    """First convergent denominator q <= N within 2^-(m+1) of y / 2^m."""
    if not 0 <= y < 2 ** m:
        raise ValueError("outcome out of range")
    if y == 0:
        return None
    x = Fraction(y, 2 ** m)
    tol = Fraction(1, 2 ** (m + 1))
    for c in convergents(x):
        if c.denominator > N:
            break
        if c.numerator and abs(x - c) <= tol:
            return c.denominator
    return None


@dataclass(frozen=True)
class OrderFindingResult:
    order: int | None
    outcome_histogram: dict[int, int]
    candidates: list[int | None]
    controlled_block_count: int
    runs_used: int
    success: bool = field(default=False)

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "outcome_histogram": {str(k): v for k, v in sorted(self.outcome_histogram.items())},
            "candidates": self.candidates,
            "controlled_block_count": self.controlled_block_count,
            "runs_used": self.runs_used,
            "success": self.success,
        }


def find_order(spec: OrderFindingSpec, runs: int = 16) -> OrderFindingResult:
    """Sample the hybrid circuit once per run and combine candidates by lcm.

    Run ``i`` draws from ``default_rng([seed, i])``, so runs are independent
    and reproducible. Candidates are combined by lcm only while the lcm
    stays <= N (any true order is below N), so one misleading outcome cannot
    poison later ones. Stops at the first run where some combination L
    satisfies ``a^L = 1 mod N`` and returns the smallest such L.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    circuit = build_hybrid_order_circuit(spec)
    probs = marginal_probabilities(apply_circuit(initial_state(spec), circuit), spec.ancillas)
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    hist: Counter[int] = Counter()
    candidates: list[int | None] = []
    reachable = {1}
    found = None
    used = 0
    for i in range(runs):
        used = i + 1
        rng = np.random.default_rng([spec.seed, i])
        y = int(rng.choice(probs.size, p=probs))
        hist[y] += 1
        q = recover_order(y, spec.m, spec.N)
        candidates.append(q)
        if q is not None:
            reachable |= {L for L in (math.lcm(l, q) for l in reachable) if L <= spec.N}
        valid = [L for L in sorted(reachable) if pow(spec.a, L, spec.N) == 1]
        if valid:
            found = valid[0]
            break
    return OrderFindingResult(
        order=found,
        outcome_histogram=dict(hist),
        candidates=candidates,
        controlled_block_count=controlled_block_count(circuit),
        runs_used=used,
        success=found is not None,
    )


def sample_outcomes(spec: OrderFindingSpec, shots: int) -> dict[int, int]:
    final = apply_circuit(initial_state(spec), build_hybrid_order_circuit(spec))
    return sample(final, spec.ancillas, shots, seed=spec.seed)
