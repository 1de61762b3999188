"""Command line interface.

Every subcommand reads circuit or state files, runs one library
operation, and reports the outcome.  With ``--json`` the report is a
canonical single-line JSON document that is byte-identical across runs
for identical inputs and seed (its ``timing_ms`` field is always null;
wall-clock timing is printed only in the human-readable form).

Exit codes: 0 when the requested check passes or the computation
completes, 1 when a checked property is refuted (the report carries the
witness), 2 for usage, file, or validation errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path
from typing import Any

import numpy as np

from qaclab.circuit_io import (
    canonical_json,
    complex_pair,
    parse_circuit,
    parse_state,
    state_to_json_dict,
)
from qaclab.circuits import (
    check_clean_simulation,
    check_weak_parity,
    input_state,
    run_circuit,
)
from qaclab.constructions import (
    ProductSystemValues,
    check_product_system,
    generate_product_system_instance,
    kill_parity_state,
    refute_depth1,
)
from qaclab.entanglement import (
    entanglement_lemma_check,
    s_separability,
    simplify_status,
)
from qaclab.errors import CircuitValidationError, PreconditionError
from qaclab.linalg import DEFAULT_TOL, random_unitary_haar
from qaclab.search import optimize_depth2, sweep_topologies
from qaclab.states import (
    BitString,
    QuantumState,
    fanout_gate,
    parity_gate,
    toffoli_gate,
)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _read_text(path_str: str) -> tuple[str, dict[str, str]]:
    path = Path(path_str)
    return path.read_text(), {"path": path_str, "sha256": _sha256(path)}


def _parse_subset(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError:
        raise ValueError(f"subset must be comma-separated integers, got {text!r}")


def _parse_eta(text: str) -> complex:
    cleaned = text.strip().replace("i", "j")
    try:
        return complex(cleaned)
    except ValueError:
        raise ValueError(f"eta must be a complex literal like -1 or 0.6+0.8j, got {text!r}")


def _parse_topology(text: str) -> list[list[int]]:
    supports = []
    for part in text.split(";"):
        part = part.strip()
        if part:
            supports.append(_parse_subset(part))
    if not supports:
        raise ValueError(f"topology layer {text!r} holds no supports")
    return supports


def _bitstring_json(bits: BitString) -> dict:
    return {str(q): v for q, v in bits.items()}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qaclab",
        description="Layered circuit simulation, separability analysis, and depth-2 search.",
    )
    parser.add_argument("--tol", type=float, default=DEFAULT_TOL, help="numeric tolerance")
    parser.add_argument("--seed", type=int, default=0, help="random seed for seeded commands")
    parser.add_argument("--json", action="store_true", help="emit a canonical JSON report")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a circuit on a classical input")
    p.add_argument("circuit", help="circuit JSON file")
    p.add_argument("--input", required=True, help="input bits, e.g. 0110")
    p.add_argument("--trace", action="store_true", help="include every layer boundary state")

    p = sub.add_parser("check-clean", help="verify exact simulation of a target gate")
    p.add_argument("circuit")
    p.add_argument(
        "--target",
        default="parity",
        help="parity, fanout, toffoli, or a JSON file holding {'unitary': ...}",
    )

    p = sub.add_parser("check-weak", help="verify the target qubit carries the parity")
    p.add_argument("circuit")
    p.add_argument("--ancilla", help="ancilla state JSON file (default all zeros)")

    p = sub.add_parser("separability", help="decide separability relative to a qubit set")
    p.add_argument("state", help="state JSON file")
    p.add_argument("--subset", required=True, help="comma-separated qubit labels")

    p = sub.add_parser("simplify", help="classify a phase gate's action on a state")
    p.add_argument("state")
    p.add_argument("--subset", required=True)
    p.add_argument("--eta", default="-1")

    p = sub.add_parser(
        "lemma-entanglement",
        help="check the disjunction: entangled in, entangled out, or simplifies",
    )
    p.add_argument("state")
    p.add_argument("--subset", required=True)
    p.add_argument("--eta", default="-1")

    p = sub.add_parser("kill-parity", help="build a parity-preserving killer state")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--unitaries", help="JSON file with {'matrices': [...]}")
    group.add_argument(
        "--random",
        nargs=2,
        type=int,
        metavar=("N", "K"),
        help="draw K Haar unitaries on N qubits",
    )
    p.add_argument("--parity-bit", type=int, default=0, choices=(0, 1))

    p = sub.add_parser("refute-depth1", help="refute parity at depth 1 with a witness")
    p.add_argument("circuit")

    p = sub.add_parser(
        "product-system",
        help="generate or check a coupled product-equation system",
    )
    p.add_argument("--case", required=True, choices=("4sets", "3sets", "2sets"))
    p.add_argument("--values", help="JSON file with eta and the a/b/c/d tables")
    p.add_argument("--branch", choices=("c", "d"))
    p.add_argument("--eta")

    p = sub.add_parser("search-depth2", help="optimize one two-layer topology")
    p.add_argument("--layer1", required=True, help="supports like 1,2,3;4,5")
    p.add_argument("--layer2", required=True)
    p.add_argument("-n", "--inputs", type=int, required=True)
    p.add_argument("-m", "--qubits", type=int, required=True)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--budget-iters", type=int, default=200)
    p.add_argument("--phase-free", action="store_true")

    p = sub.add_parser("sweep", help="optimize every canonical two-layer topology")
    p.add_argument("-n", "--inputs", type=int, required=True)
    p.add_argument("--m-max", type=int, required=True)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--budget-iters", type=int, default=200)
    p.add_argument("--phase-free", action="store_true")
    p.add_argument("--force", action="store_true", help="ignore the topology count guard")
    p.add_argument("--threads", type=int, help="worker processes (default: THREADS env or 1)")
    return parser


def _cmd_simulate(args) -> tuple[int, dict, list[str]]:
    text, digest = _read_text(args.circuit)
    circuit = parse_circuit(text)
    trace = run_circuit(circuit, _input_from_bits(circuit, args.input))
    payload: dict[str, Any] = {
        "circuit": digest,
        "input": args.input,
        "final_state": state_to_json_dict(trace.final),
    }
    if args.trace:
        payload["boundaries"] = [state_to_json_dict(s) for s in trace.states]
    lines = [f"simulated {args.circuit} on |{args.input}>"]
    probs = np.abs(trace.final.amplitudes) ** 2
    for j in np.argsort(probs)[::-1][:4]:
        if probs[j] > 1e-12:
            lines.append(
                f"  |{j:0{circuit.n_qubits}b}>  amplitude {trace.final.amplitudes[j]:.6f}"
            )
    return 0, payload, lines


def _input_from_bits(circuit, bits: str) -> QuantumState:
    if len(bits) == circuit.n_qubits:
        return QuantumState.basis(circuit.n_qubits, bits)
    return input_state(circuit, bits)


def _cmd_check_clean(args) -> tuple[int, dict, list[str]]:
    text, digest = _read_text(args.circuit)
    circuit = parse_circuit(text)
    n = circuit.n_inputs
    named = {
        "parity": parity_gate,
        "fanout": fanout_gate,
        "toffoli": toffoli_gate,
    }
    if args.target in named:
        if n < 2:
            raise ValueError(f"target {args.target} needs at least 2 input qubits")
        target = named[args.target](range(1, n + 1))
        target_desc: Any = args.target
    else:
        ttext, tdigest = _read_text(args.target)
        data = json.loads(ttext)
        target = np.array(
            [[complex(*v) if isinstance(v, list) else complex(v) for v in row]
             for row in data["unitary"]]
        )
        target_desc = tdigest
    report = check_clean_simulation(circuit, target, args.tol)
    payload = {
        "circuit": digest,
        "target": target_desc,
        "passed": report.passed,
        "max_distance": report.max_distance,
        "worst_input": _bitstring_json(report.worst_input),
        "distances": [float(d) for d in report.distances],
    }
    verdict = "passes" if report.passed else "fails"
    lines = [
        f"clean simulation {verdict}: max distance {report.max_distance:.3e} "
        f"at input {report.worst_input!r} (tol {args.tol:g})"
    ]
    return (0 if report.passed else 1), payload, lines


def _cmd_check_weak(args) -> tuple[int, dict, list[str]]:
    text, digest = _read_text(args.circuit)
    circuit = parse_circuit(text)
    ancilla = None
    anc_desc: Any = None
    if args.ancilla:
        atext, anc_desc = _read_text(args.ancilla)
        ancilla = parse_state(atext)
    report = check_weak_parity(circuit, ancilla, args.tol)
    payload = {
        "circuit": digest,
        "ancilla": anc_desc,
        "passed": report.passed,
        "max_leakage": report.max_leakage,
        "worst_input": _bitstring_json(report.worst_input),
        "leakages": [float(v) for v in report.leakages],
    }
    verdict = "passes" if report.passed else "fails"
    lines = [
        f"weak parity {verdict}: max leakage {report.max_leakage:.3e} "
        f"at input {report.worst_input!r} (tol {args.tol:g})"
    ]
    return (0 if report.passed else 1), payload, lines


def _cmd_separability(args) -> tuple[int, dict, list[str]]:
    text, digest = _read_text(args.state)
    state = parse_state(text)
    result = s_separability(state, _parse_subset(args.subset), args.tol)
    payload = {
        "state": digest,
        "subset": sorted(_parse_subset(args.subset)),
        "separable": result.separable,
        "witness": list(map(list, result.witness)) if result.witness else None,
        "evidence": {",".join(map(str, a)): v for a, v in result.evidence.items()},
    }
    if result.separable:
        a, b = result.witness
        lines = [f"separable across A={list(a)} B={list(b)}"]
    else:
        worst = min(result.evidence.values())
        lines = [f"entangled: smallest second singular value {worst:.3e} (tol {args.tol:g})"]
    return 0, payload, lines


def _cmd_simplify(args) -> tuple[int, dict, list[str]]:
    text, digest = _read_text(args.state)
    state = parse_state(text)
    status = simplify_status(state, _parse_subset(args.subset), _parse_eta(args.eta), args.tol)
    payload = {
        "state": digest,
        "subset": sorted(_parse_subset(args.subset)),
        "eta": complex_pair(_parse_eta(args.eta)),
        "kind": status.kind,
        "target": sorted(status.target) if status.target is not None else None,
        "ones_mass": status.ones_mass,
        "pinned": sorted(status.pinned),
    }
    if status.disappears:
        lines = ["the gate disappears: no mass on the all-ones pattern"]
    elif status.simplifies:
        lines = [f"the gate simplifies to support {sorted(status.target)} "
                 f"(pinned {sorted(status.pinned)})"]
    else:
        lines = [f"no simplification: all-ones mass {status.ones_mass:.3e}, no pinned qubit"]
    return 0, payload, lines


def _cmd_lemma(args) -> tuple[int, dict, list[str]]:
    text, digest = _read_text(args.state)
    state = parse_state(text)
    report = entanglement_lemma_check(
        state, _parse_subset(args.subset), _parse_eta(args.eta), args.tol
    )
    payload = {
        "state": digest,
        "subset": sorted(_parse_subset(args.subset)),
        "eta": complex_pair(_parse_eta(args.eta)),
        "holds": report.holds,
        "input_entangled": report.psi_entangled,
        "output_entangled": report.phi_entangled,
        "simplifies": report.simplifies,
        "simplify_kind": report.simplify.kind,
    }
    lines = [
        f"disjunction {'holds' if report.holds else 'VIOLATED'}: "
        f"input entangled={report.psi_entangled}, output entangled={report.phi_entangled}, "
        f"simplifies={report.simplifies}"
    ]
    return (0 if report.holds else 1), payload, lines


def _cmd_kill_parity(args) -> tuple[int, dict, list[str]]:
    if args.unitaries:
        text, digest = _read_text(args.unitaries)
        data = json.loads(text)
        mats = [
            np.array([[complex(re, im) for re, im in row] for row in mat])
            for mat in data["matrices"]
        ]
        n = data.get("qubits")
        source: Any = digest
    else:
        n, k = args.random
        mats = [random_unitary_haar(2**n, args.seed + i) for i in range(k)]
        source = {"random": {"n": n, "k": k, "seed": args.seed}}
    cert = kill_parity_state(mats, args.parity_bit, args.tol, n=n)
    worst = float(max(cert.residuals, default=0.0))
    payload = {
        "unitaries": source,
        "b": cert.b,
        "state": state_to_json_dict(cert.state),
        "residuals": [float(r) for r in cert.residuals],
        "parity_leakage": cert.parity_leakage,
    }
    lines = [
        f"killer state on {cert.state.n_qubits} qubits, parity {cert.b}: "
        f"max residual {worst:.3e}, leakage {cert.parity_leakage:.3e}"
    ]
    return 0, payload, lines


def _cmd_refute_depth1(args) -> tuple[int, dict, list[str]]:
    text, digest = _read_text(args.circuit)
    circuit = parse_circuit(text)
    result = refute_depth1(circuit, args.tol)
    if result is None:
        payload = {
            "circuit": digest,
            "applicable": False,
            "note": "with fewer than 3 inputs depth 1 suffices; nothing to refute",
        }
        return 0, payload, ["not applicable: fewer than 3 inputs"]
    payload = {
        "circuit": digest,
        "applicable": True,
        "kind": result.kind,
        "toggle_qubit": result.toggle_qubit,
        "committed": list(result.committed) if result.committed else None,
        "gate_support": sorted(result.gate_support) if result.gate_support else None,
        "max_trace_distance": result.max_trace_distance,
        "killer": state_to_json_dict(result.killer.state) if result.killer else None,
    }
    lines = [
        f"refuted ({result.kind}): toggling qubit {result.toggle_qubit} flips the parity "
        f"but moves the target's state by at most {result.max_trace_distance:.3e}"
    ]
    return 1, payload, lines


def _values_from_json(case: str, data) -> ProductSystemValues:
    def arr(key):
        raw = np.asarray(data[key], dtype=float)
        if raw.shape[-1] != 2:
            raise ValueError(f"entries of {key!r} must be [re, im] pairs")
        return raw[..., 0] + 1j * raw[..., 1]

    eta = complex(*data["eta"]) if isinstance(data["eta"], list) else complex(data["eta"])
    return ProductSystemValues(case, eta, arr("a"), arr("b"), arr("c"), arr("d"))


def _cmd_product_system(args) -> tuple[int, dict, list[str]]:
    if args.values:
        text, digest = _read_text(args.values)
        values = _values_from_json(args.case, json.loads(text))
        source: Any = digest
    else:
        eta = _parse_eta(args.eta) if args.eta else None
        values = generate_product_system_instance(args.case, args.seed, eta, args.branch)
        source = {"generated": {"seed": args.seed, "branch": args.branch}}
    check = check_product_system(values, args.tol)
    ok = check.hypotheses_ok and check.conclusion_ok
    payload = {
        "source": source,
        "case": values.case,
        "eta": complex_pair(values.eta),
        "values": {
            name: np.asarray(getattr(values, name)).tolist()
            for name in ("a", "b", "c", "d")
        },
        "hypotheses_ok": check.hypotheses_ok,
        "applicable": check.applicable,
        "conclusion_ok": check.conclusion_ok,
        "vanishing_side": check.vanishing_side,
        "max_hypothesis_residual": max(check.hypothesis_residuals.values()),
    }
    lines = [
        f"{values.case}: hypotheses_ok={check.hypotheses_ok} "
        f"applicable={check.applicable} conclusion_ok={check.conclusion_ok} "
        f"(vanishing side: {check.vanishing_side})"
    ]
    return (0 if ok else 1), payload, lines


def _search_report_json(report) -> dict:
    return {
        "topology": [list(map(list, layer)) for layer in report.topology],
        "inputs": report.n_inputs,
        "qubits": report.n_qubits,
        "seed": report.seed,
        "restarts": report.restarts,
        "budget_iters": report.budget_iters,
        "phase_free": report.phase_free,
        "best_loss": report.best_loss,
        "restart_losses": list(report.restart_losses),
        "iterations": list(report.iterations),
        "best_params": report.best_params.tolist(),
    }


def _cmd_search_depth2(args) -> tuple[int, dict, list[str]]:
    topology = (_parse_topology(args.layer1), _parse_topology(args.layer2))
    report = optimize_depth2(
        topology,
        args.inputs,
        args.qubits,
        args.restarts,
        args.seed,
        args.budget_iters,
        args.phase_free,
    )
    payload = _search_report_json(report)
    lines = [
        f"best loss {report.best_loss:.6e} over {report.restarts} restarts "
        f"({report.wall_time_s:.2f}s)"
    ]
    return 0, payload, lines


def _cmd_sweep(args) -> tuple[int, dict, list[str]]:
    sweep = sweep_topologies(
        args.inputs,
        args.m_max,
        args.restarts,
        args.seed,
        args.budget_iters,
        args.phase_free,
        args.force,
        args.threads,
    )
    payload = {
        "inputs": sweep.n_inputs,
        "m_max": sweep.m_max,
        "restarts": sweep.restarts,
        "budget_iters": sweep.budget_iters,
        "phase_free": sweep.phase_free,
        "topology_count": len(sweep.reports),
        "evidence_note": sweep.evidence_note,
        "ranking": [
            {
                "topology": [list(map(list, layer)) for layer in r.topology],
                "qubits": r.n_qubits,
                "best_loss": r.best_loss,
            }
            for r in sweep.reports[:20]
        ],
        "best": _search_report_json(sweep.best) if sweep.reports else None,
    }
    lines = [
        f"swept {len(sweep.reports)} topologies; best loss "
        f"{sweep.best.best_loss:.6e}" if sweep.reports else "no topologies",
        sweep.evidence_note,
    ]
    return 0, payload, lines


_HANDLERS = {
    "simulate": _cmd_simulate,
    "check-clean": _cmd_check_clean,
    "check-weak": _cmd_check_weak,
    "separability": _cmd_separability,
    "simplify": _cmd_simplify,
    "lemma-entanglement": _cmd_lemma,
    "kill-parity": _cmd_kill_parity,
    "refute-depth1": _cmd_refute_depth1,
    "product-system": _cmd_product_system,
    "search-depth2": _cmd_search_depth2,
    "sweep": _cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        code, payload, lines = _HANDLERS[args.command](args)
    except (ValueError, CircuitValidationError, PreconditionError, OSError,
            json.JSONDecodeError, KeyError) as exc:
        message = f"{type(exc).__name__}: {exc}"
        if args.json:
            print(canonical_json({"schema": 1, "command": args.command, "error": message}))
        else:
            print(message, file=sys.stderr)
        return 2
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    if args.json:
        report = {
            "schema": 1,
            "command": args.command,
            "tol": float(args.tol),
            "seed": int(args.seed),
            "exit_code": code,
            **payload,
            "timing_ms": None,
        }
        print(canonical_json(report))
    else:
        for line in lines:
            print(line)
        print(f"done in {elapsed_ms:.1f} ms, exit {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
