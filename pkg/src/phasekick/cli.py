"""Command-line frontend.

Every subcommand prints a short text report, or with ``--json`` a run record
``{command, parameters, seed, results, wall_time_s, version}``. Exit codes:
0 success, 1 a run that completed without a usable answer, 2 bad input.
If ``PHASEKICK_OUTPUT_DIR`` (or ``--output-dir``) is set, the record and any
table are also written there.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from . import __version__
from .circuit import Circuit, X
from .heisenberg import HeisenbergSpec, estimate_ground_energy
from .kickback import diagonal_phase_unitary, predicted_p0, run_kickback, single_qubit_spec
from .qpe import QpeSpec, estimate_phase, perturbed_spec, total_variation
from .resources import cost_table, cost_table_csv
from .shor import OrderFindingSpec, find_order
from .sim import new_basis_state

OUTPUT_ENV = "PHASEKICK_OUTPUT_DIR"
MAX_SYNTHETIC_BITS = 12


class UsageError(Exception):
    pass


@dataclass
class RunRecord:
    command: str
    parameters: dict
    seed: int
    results: dict
    wall_time_s: float
    version: str

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


# --- argument helpers --------------------------------------------------------

def _unit_interval(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0.0 <= v < 1.0 or math.isnan(v):
        raise argparse.ArgumentTypeError(f"phase must lie in [0, 1), got {v}")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def parse_m_range(text: str) -> list[int]:
    """``"10"``, ``"1,4,8"`` or ``"1:10"`` (inclusive)."""
    try:
        if ":" in text:
            lo, hi = (int(s) for s in text.split(":"))
            values = list(range(lo, hi + 1))
        else:
            values = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad m range {text!r}")
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("m values must be >= 1")
    return values


def _load_descriptor(text: str | None) -> dict:
    if text is None:
        return {}
    path = Path(text)
    raw = path.read_text() if path.is_file() else text
    try:
        d = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise UsageError(f"descriptor is neither a file nor valid JSON: {exc}")
    if not isinstance(d, dict):
        raise UsageError("descriptor must be a JSON object")
    return d


# --- commands ----------------------------------------------------------------

def cmd_kickback(args) -> tuple[dict, dict, int]:
    params = {"theta": args.theta, "phi": args.phi, "variant": args.variant}
    res = run_kickback(single_qubit_spec(args.theta, args.phi, args.variant))
    # the textbook circuit has no reference branch, so it reads theta alone
    pred = predicted_p0(args.theta, 0.0 if args.variant == "standard" else args.phi)
    results = {
        "p0": res.ancilla_p0,
        "predicted_p0": pred,
        "abs_error": abs(res.ancilla_p0 - pred),
        "system_purity": res.system_purity,
        "system_fidelity": res.final_system_fidelity_with_psi,
    }
    return params, results, 0


def synthetic_qpe_spec(theta: float, phi: float, m: int) -> QpeSpec:
    """Two-qubit diagonal U: reference |00> at phi, target |10..> (qubit 0 set)
    at theta, and a spare eigenstate |qubit 1 set> at theta + 1/2 used as the
    error direction for ``--delta``."""
    U = diagonal_phase_unitary([phi, theta, (theta + 0.5) % 1.0, phi])
    return QpeSpec(W=Circuit(2, (X(0),), "W"), U=U, m=m, reference_phase=phi)


def cmd_qpe(args) -> tuple[dict, dict, int]:
    if not 1 <= args.bits <= MAX_SYNTHETIC_BITS:
        raise UsageError(f"--bits must be in [1, {MAX_SYNTHETIC_BITS}]")
    params = {"bits": args.bits, "theta": args.theta, "phi": args.phi,
              "delta": args.delta, "compare_standard": args.compare_standard}
    base = synthetic_qpe_spec(args.theta, args.phi, args.bits)
    target = (args.theta - args.phi) % 1.0
    spec = base if args.delta == 0 else perturbed_spec(base, new_basis_state(2, 2), args.delta)
    est = estimate_phase(spec, "uncontrolled", target_phase=target)
    results = est.to_dict()
    results["tvd_vs_standard"] = None
    if args.compare_standard:
        std = estimate_phase(spec, "standard", target_phase=target)
        results["tvd_vs_standard"] = total_variation(est.distribution, std.distribution)
    return params, results, 0


def cmd_resources(args) -> tuple[dict, dict, int]:
    params = {"m_range": args.m_range, "n1u": args.n1u, "n2u": args.n2u,
              "n1w": args.n1w, "n2w": args.n2w}
    rows = cost_table(args.m_range, args.n1u, args.n2u, args.n1w, args.n2w)
    out = []
    for r in rows:
        ratio = r["ratio"]
        out.append({
            "m": r["m"],
            "cost_standard": r["cost_standard"],
            "cost_uncontrolled": r["cost_uncontrolled"],
            "ratio": None if ratio is None else str(ratio),
            "ratio_float": None if ratio is None else float(ratio),
            "ratio_exact": None if r["ratio_exact"] is None else str(r["ratio_exact"]),
        })
    return params, {"rows": out, "csv": cost_table_csv(rows)}, 0


_HEIS_KEYS = ("N", "J", "t", "m", "evolution", "steps", "candidate")


def cmd_heisenberg(args) -> tuple[dict, dict, int]:
    desc = _load_descriptor(args.descriptor)
    unknown = set(desc) - set(_HEIS_KEYS)
    if unknown:
        raise UsageError(f"unknown descriptor keys: {sorted(unknown)}")
    merged = {k: desc.get(k) for k in _HEIS_KEYS}
    for k in _HEIS_KEYS:
        v = getattr(args, k)
        if v is not None:
            merged[k] = v
    if merged["N"] is None:
        raise UsageError("N is required")
    kwargs = {k: v for k, v in merged.items() if v is not None}
    if kwargs.get("evolution") == "exact_dense":
        kwargs["evolution"] = "exact"
    spec = HeisenbergSpec(**kwargs)
    res = estimate_ground_energy(spec, compare_standard=args.compare_standard)
    params = {"N": spec.N, "J": spec.J, "t": spec.t, "m": spec.m,
              "evolution": spec.evolution, "steps": spec.steps, "candidate": spec.candidate}
    results = res.to_dict()
    results["abs_error"] = abs(res.energy - res.exact_ground_energy)
    return params, results, 0


def cmd_shor(args) -> tuple[dict, dict, int]:
    desc = _load_descriptor(args.descriptor)
    keys = ("N", "a", "m", "runs", "seed")
    unknown = set(desc) - set(keys)
    if unknown:
        raise UsageError(f"unknown descriptor keys: {sorted(unknown)}")
    N = args.N if args.N is not None else desc.get("N")
    a = args.a if args.a is not None else desc.get("a")
    if N is None or a is None:
        raise UsageError("N and a are required")
    m = args.bits if args.bits is not None else desc.get("m")
    runs = args.runs if args.runs is not None else desc.get("runs", 16)
    seed = args.seed if args.seed_given else desc.get("seed", args.seed)
    args.seed = seed
    if m is None:
        m = 2 * max(1, (int(N) - 1).bit_length())
    spec = OrderFindingSpec(N=int(N), a=int(a), m=int(m), seed=int(seed))
    res = find_order(spec, int(runs))
    params = {"N": spec.N, "a": spec.a, "m": spec.m, "runs": int(runs)}
    return params, res.to_dict(), 0 if res.success else 1


# --- parser ------------------------------------------------------------------

class _SeedAction(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, values)
        namespace.seed_given = True


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="phasekick",
                                description="Uncontrolled phase kickback experiments.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--json", action="store_true", help="print a JSON run record")
        sp.add_argument("--seed", type=_nonneg_int, default=0, action=_SeedAction)
        sp.add_argument("--output-dir", default=None,
                        help=f"also write results here (default: ${OUTPUT_ENV})")
        sp.set_defaults(seed_given=False)

    k = sub.add_parser("kickback", help="single-ancilla gadget on a 1-qubit diagonal U")
    k.add_argument("--theta", type=_unit_interval, required=True)
    k.add_argument("--phi", type=_unit_interval, default=0.0)
    k.add_argument("--variant", choices=("standard", "uncontrolled"), default="uncontrolled")
    common(k)
    k.set_defaults(func=cmd_kickback)

    q = sub.add_parser("qpe", help="m-bit uncontrolled QPE on a synthetic diagonal U")
    q.add_argument("--bits", "-m", type=int, default=3)
    q.add_argument("--theta", type=_unit_interval, required=True)
    q.add_argument("--phi", type=_unit_interval, default=0.0)
    q.add_argument("--delta", type=float, default=0.0,
                   help="weight of the orthogonal eigenstate mixed into the candidate")
    q.add_argument("--compare-standard", action="store_true")
    common(q)
    q.set_defaults(func=cmd_qpe)

    r = sub.add_parser("resources", help="two-qubit gate cost table")
    r.add_argument("--m-range", type=parse_m_range, default=parse_m_range("1:10"))
    r.add_argument("--n1u", type=_nonneg_int, default=0)
    r.add_argument("--n2u", type=_nonneg_int, default=0)
    r.add_argument("--n1w", type=_nonneg_int, default=0)
    r.add_argument("--n2w", type=_nonneg_int, default=0)
    r.add_argument("--csv", action="store_true", help="print the table as CSV")
    common(r)
    r.set_defaults(func=cmd_resources)

    h = sub.add_parser("heisenberg", help="ground energy of the Heisenberg chain")
    h.add_argument("--descriptor", help="JSON object or path to a JSON file")
    h.add_argument("--N", "-N", dest="N", type=int)
    h.add_argument("--J", dest="J", type=float)
    h.add_argument("--t", dest="t", type=float)
    h.add_argument("--bits", "-m", dest="m", type=int)
    h.add_argument("--evolution", choices=("exact", "exact_dense", "trotter"))
    h.add_argument("--steps", type=int)
    h.add_argument("--candidate", help="'exact' or 'basis:<bits>', qubit 0 first")
    h.add_argument("--compare-standard", action="store_true")
    common(h)
    h.set_defaults(func=cmd_heisenberg)

    s = sub.add_parser("shor", help="order finding with a hybrid first block")
    s.add_argument("--descriptor", help="JSON object or path to a JSON file")
    s.add_argument("--N", "-N", dest="N", type=int)
    s.add_argument("--a", dest="a", type=int)
    s.add_argument("--bits", "-m", type=int)
    s.add_argument("--runs", type=int)
    common(s)
    s.set_defaults(func=cmd_shor)
    return p


def _text_report(record: RunRecord) -> str:
    lines = [f"{record.command} (seed {record.seed})"]
    for key, val in record.parameters.items():
        lines.append(f"  {key} = {val}")
    for key, val in record.results.items():
        if key in ("csv", "distribution", "rows"):
            continue
        if isinstance(val, dict):
            val = json.dumps({k: v for k, v in val.items() if k != "distribution"},
                             sort_keys=True)
        lines.append(f"  {key}: {val}")
    if "distribution" in record.results:
        lines.append("  outcome  probability")
        for j, p in enumerate(record.results["distribution"]):
            if p > 1e-12:
                lines.append(f"  {j:7d}  {p:.12f}")
    if "rows" in record.results:
        lines.append(record.results["csv"].rstrip("\n"))
    return "\n".join(lines)


def _write_outputs(record: RunRecord, out_dir: str) -> None:
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    stem = f"{record.command}-seed{record.seed}"
    (d / f"{stem}.json").write_text(record.to_json() + "\n")
    if "csv" in record.results:
        (d / f"{stem}.csv").write_text(record.results["csv"])


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    start = time.perf_counter()
    try:
        params, results, code = args.func(args)
    except (UsageError, ValueError, TypeError) as exc:
        print(f"phasekick {args.command}: error: {exc}", file=sys.stderr)
        return 2
    record = RunRecord(
        command=args.command,
        parameters=params,
        seed=args.seed,
        results=results,
        wall_time_s=time.perf_counter() - start,
        version=__version__,
    )
    if args.json:
        print(record.to_json())
    elif getattr(args, "csv", False):
        print(results["csv"], end="")
    else:
        print(_text_report(record))
    out_dir = args.output_dir or os.environ.get(OUTPUT_ENV)
    if out_dir:
        _write_outputs(record, out_dir)
    if code == 1:
        print(f"phasekick {args.command}: no validated result", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
