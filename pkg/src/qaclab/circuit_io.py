"""Circuit and state files plus the canonical JSON emitter.

Circuits are JSON objects with ``qubits``, ``inputs``, and a ``layers``
list whose entries are either single-qubit layers (``{"kind": "single",
"gates": [{"q": 1, "matrix": ...}]}``, with ``zyz`` parameter lists
accepted in place of matrices) or multiqubit layers (``{"kind":
"multi", "csign": [[1, 2], ...]}``).  Missing single layers between,
before, or after multi layers are implied empty; two single layers in a
row are rejected.  The canonical serializer always emits matrices,
sorts gates by qubit, omits empty single layers, and prints floats with
17 significant digits, so serialization is byte stable and
``serialize(parse(text))`` is a fixed point.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from qaclab.circuits import QacCircuit, require_valid
from qaclab.search import zyz_matrix
from qaclab.states import QuantumState


def _format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError("reports cannot contain NaN or infinite values")
    if x == 0.0:
        x = 0.0  # normalize the sign of zero
    return f"{x:.17g}"


def canonical_json(obj: Any) -> str:
    """Serialize with sorted-insertion key order kept and stable floats."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        inner = ",".join(f"{json.dumps(str(k))}:{canonical_json(v)}" for k, v in obj.items())
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    if isinstance(obj, (complex, np.complexfloating)):
        return canonical_json([obj.real, obj.imag])
    if isinstance(obj, np.ndarray):
        return canonical_json(obj.tolist())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def complex_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _parse_complex_pair(pair) -> complex:
    if isinstance(pair, (int, float)):
        return complex(pair)
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise ValueError(f"expected [re, im], got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def _parse_gate_entry(entry) -> tuple[int, np.ndarray]:
    if not isinstance(entry, dict) or "q" not in entry:
        raise ValueError(f"gate entry must be an object with 'q', got {entry!r}")
    q = int(entry["q"])
    if "matrix" in entry:
        rows = entry["matrix"]
        if not isinstance(rows, list) or len(rows) != 2:
            raise ValueError(f"matrix for qubit {q} must have 2 rows")
        mat = np.array(
            [[_parse_complex_pair(v) for v in row] for row in rows], dtype=np.complex128
        )
        if mat.shape != (2, 2):
            raise ValueError(f"matrix for qubit {q} must be 2x2")
    elif "zyz" in entry:
        vals = entry["zyz"]
        if not isinstance(vals, list) or len(vals) != 4:
            raise ValueError(f"zyz for qubit {q} must be [beta, theta, phi, lam]")
        mat = zyz_matrix(*(float(v) for v in vals))
    else:
        raise ValueError(f"gate entry for qubit {q} needs 'matrix' or 'zyz'")
    return q, mat


def circuit_from_json_dict(data) -> QacCircuit:
    """Build and validate a circuit from its JSON object form."""
    if not isinstance(data, dict):
        raise ValueError("circuit file must hold a JSON object")
    for key in ("qubits", "inputs", "layers"):
        if key not in data:
            raise ValueError(f"circuit object is missing {key!r}")
    m = int(data["qubits"])
    n = int(data["inputs"])
    singles: list[dict[int, np.ndarray]] = []
    multis: list[tuple[frozenset[int], ...]] = []
    pending: dict[int, np.ndarray] | None = None
    for entry in data["layers"]:
        kind = entry.get("kind") if isinstance(entry, dict) else None
        if kind == "single":
            if pending is not None:
                raise ValueError("two single-qubit layers in a row; merge them")
            pending = {}
            for gate_entry in entry.get("gates", []):
                q, mat = _parse_gate_entry(gate_entry)
                if q in pending:
                    raise ValueError(f"duplicate gate for qubit {q} within a layer")
                pending[q] = mat
        elif kind == "multi":
            singles.append(pending or {})
            pending = None
            supports = entry.get("csign", [])
            multis.append(tuple(frozenset(int(q) for q in sup) for sup in supports))
        else:
            raise ValueError(f"layer kind must be 'single' or 'multi', got {entry!r}")
    singles.append(pending or {})
    circuit = QacCircuit(m, n, tuple(singles), tuple(multis))
    require_valid(circuit)
    return circuit


def circuit_to_json_dict(circuit: QacCircuit) -> dict:
    """The canonical JSON object form of a circuit."""
    layers: list[dict] = []
    for li, single in enumerate(circuit.single_layers):
        if single:
            layers.append(
                {
                    "kind": "single",
                    "gates": [
                        {
                            "q": q,
                            "matrix": [[complex_pair(v) for v in row] for row in single[q]],
                        }
                        for q in sorted(single)
                    ],
                }
            )
        if li < len(circuit.csign_layers):
            layers.append(
                {
                    "kind": "multi",
                    "csign": [sorted(sup) for sup in circuit.csign_layers[li]],
                }
            )
    return {"qubits": circuit.n_qubits, "inputs": circuit.n_inputs, "layers": layers}


def parse_circuit(text: str) -> QacCircuit:
    return circuit_from_json_dict(json.loads(text))


def serialize_circuit(circuit: QacCircuit) -> str:
    return canonical_json(circuit_to_json_dict(circuit))


def parse_state(text: str) -> QuantumState:
    data = json.loads(text)
    if not isinstance(data, dict) or "amplitudes" not in data:
        raise ValueError("state file must hold an object with 'amplitudes'")
    amps = [_parse_complex_pair(v) for v in data["amplitudes"]]
    if "qubits" in data and 2 ** int(data["qubits"]) != len(amps):
        raise ValueError(
            f"'qubits' says {data['qubits']} but there are {len(amps)} amplitudes"
        )
    return QuantumState(np.array(amps, dtype=np.complex128))


def state_to_json_dict(state: QuantumState) -> dict:
    return {
        "qubits": state.n_qubits,
        "amplitudes": [complex_pair(v) for v in state.amplitudes],
    }


def serialize_state(state: QuantumState) -> str:
    return canonical_json(state_to_json_dict(state))
