"""Two-qubit gate accounting for standard vs. uncontrolled phase estimation.

Costs are exact counts under :func:`compile_controlled`. The headline ratio
uses the leading-order forms (``2^m`` in place of ``2^m - 1``); the exact
ratio is available separately. All formulas use Python integers and :class:`fractions.Fraction`, so nothing
overflows or rounds. The constants 2 and 6 are the exact CNOT costs of
controlling a single- and two-qubit gate under :func:`compile_controlled`.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .circuit import Circuit, compile_controlled, count_gates, embed, invert, power


@dataclass(frozen=True)
class CostProfile:
    n1_U: int
    n2_U: int
    n1_W: int
    n2_W: int
    m: int

    def __post_init__(self):
        for name in ("n1_U", "n2_U", "n1_W", "n2_W", "m"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise TypeError(f"{name} must be an integer")
            if v < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.m < 1:
            raise ValueError("m must be >= 1")


def controlled_cost(n1: int, n2: int) -> int:
    """Two-qubit gates in the controlled version of a circuit."""
    return 2 * n1 + 6 * n2


def standard_qpe_cost(p: CostProfile) -> int:
    return (2 ** p.m - 1) * controlled_cost(p.n1_U, p.n2_U)


def uncontrolled_qpe_cost(p: CostProfile) -> int:
    return p.m * (4 * p.n1_W + 12 * p.n2_W) + (2 ** p.m - 1) * p.n2_U


def leading_standard_cost(p: CostProfile) -> int:
    """Standard cost with ``2^m - 1`` replaced by its leading term ``2^m``."""
    return 2 ** p.m * controlled_cost(p.n1_U, p.n2_U)


def leading_uncontrolled_cost(p: CostProfile) -> int:
    return p.m * (4 * p.n1_W + 12 * p.n2_W) + 2 ** p.m * p.n2_U


def reduction_ratio(p: CostProfile) -> Fraction:
    """Leading-order cost ratio, standard over uncontrolled.

    With ``n2_U = n2_W = 0`` and ``n1_U = n1_W`` this is exactly
    ``2^m / (2m)``. See :func:`exact_ratio` for the ratio of the exact counts.
    """
    den = leading_uncontrolled_cost(p)
    if den == 0:
        raise ZeroDivisionError("uncontrolled cost is zero; ratio undefined")
    return Fraction(leading_standard_cost(p), den)


def exact_ratio(p: CostProfile) -> Fraction:
    den = uncontrolled_qpe_cost(p)
    if den == 0:
        raise ZeroDivisionError("uncontrolled cost is zero; ratio undefined")
    return Fraction(standard_qpe_cost(p), den)


def profile_from_circuits(U: Circuit, W: Circuit, m: int) -> CostProfile:
    cu, cw = count_gates(U), count_gates(W)
    if cu.flagged or cw.flagged:
        raise ValueError("circuits contain gates of arity >= 3; decompose them first")
    return CostProfile(cu.n1, cu.n2, cw.n1, cw.n2, m)


def cost_table(m_values: Iterable[int], n1_U: int, n2_U: int, n1_W: int,
               n2_W: int) -> list[dict]:
    rows = []
    for m in m_values:
        p = CostProfile(n1_U, n2_U, n1_W, n2_W, m)
        rows.append({
            "m": m,
            "cost_standard": standard_qpe_cost(p),
            "cost_uncontrolled": uncontrolled_qpe_cost(p),
            "ratio": reduction_ratio(p) if leading_uncontrolled_cost(p) else None,
            "ratio_exact": exact_ratio(p) if uncontrolled_qpe_cost(p) else None,
        })
    return rows


def cost_table_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "cost_standard", "cost_uncontrolled", "ratio"])
    for r in rows:
        ratio = r["ratio"]
        w.writerow([r["m"], r["cost_standard"], r["cost_uncontrolled"],
                    "" if ratio is None else str(ratio)])
    return buf.getvalue()


# --- literal compilation ----------------------------------------------------

def _with_control_qubit(c: Circuit) -> tuple[Circuit, int]:
    n = c.num_qubits
    return embed(c, list(range(n)), n + 1), n


def literal_standard_count(U: Circuit, m: int) -> int:
    """Two-qubit gates of the compiled controlled-U^(2^k) chain, k < m."""
    big, ctrl = _with_control_qubit(U)
    total = 0
    for k in range(m):
        total += count_gates(compile_controlled(power(big, 2 ** k), ctrl, 1)).n2
    return total


def literal_uncontrolled_counts(U: Circuit, W: Circuit, m: int) -> dict[str, int]:
    """Two-qubit gates of the uncontrolled QPE pieces after compilation.

    ``controlled_W`` covers the 1-controlled W and the closing gate of every
    block (1-controlled W-dagger, or open-controlled W on the last one);
    ``U_chain`` is the bare U^(2^k) chain.
    """
    big_w, ctrl = _with_control_qubit(W)
    w_dag = invert(big_w)
    cw = 0
    for t in range(m):
        cw += count_gates(compile_controlled(big_w, ctrl, 1)).n2
        closing = compile_controlled(big_w, ctrl, 0) if t == m - 1 else \
            compile_controlled(w_dag, ctrl, 1)
        cw += count_gates(closing).n2
    u_chain = sum(count_gates(power(U, 2 ** k)).n2 for k in range(m))
    return {"controlled_W": cw, "U_chain": u_chain, "total": cw + u_chain}
