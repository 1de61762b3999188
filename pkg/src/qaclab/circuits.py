"""The layered circuit model: alternating single-qubit layers and layers
of disjoint C-SIGN gates.

A depth-d circuit has d + 1 single-qubit layers interleaved with d
multiqubit layers; only the multiqubit layers count toward depth.  The
first ``n_inputs`` qubits are inputs, the rest are ancillas prepared in
|0>, and qubit 1 is the parity target by convention.  This module covers
validation, simulation with full boundary traces, inversion, the clean
and weak parity checks, and the single-qubit mixing classifier.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from qaclab import kernels
from qaclab.errors import CircuitValidationError
from qaclab.linalg import DEFAULT_TOL, is_unitary
from qaclab.states import (
    ID2,
    PAULI_X,
    BitString,
    QuantumState,
    StructuredGate,
    _as_index,
    apply_structured_gate,
)


def _frozen_gate(gate) -> np.ndarray:
    mat = np.array(gate, dtype=np.complex128, order="C")
    mat.setflags(write=False)
    return mat


@dataclass(frozen=True)
class QacCircuit:
    """A circuit on ``n_qubits`` qubits, the first ``n_inputs`` of them inputs.

    ``single_layers`` has ``depth + 1`` entries, each a mapping from qubit
    label to a 2x2 unitary; absent qubits get the identity.  Layer i of
    ``single_layers`` sits at position i + 0.5 in the layer numbering, so
    ``csign_layers[ell - 1]`` is the multiqubit layer at position ell.
    """

    n_qubits: int
    n_inputs: int
    single_layers: tuple[dict[int, np.ndarray], ...]
    csign_layers: tuple[tuple[frozenset[int], ...], ...]

    def __post_init__(self) -> None:
        singles = tuple(
            {int(q): _frozen_gate(g) for q, g in sorted(layer.items())}
            for layer in self.single_layers
        )
        multis = tuple(
            tuple(sorted((frozenset(int(q) for q in sup) for sup in layer), key=sorted))
            for layer in self.csign_layers
        )
        object.__setattr__(self, "single_layers", singles)
        object.__setattr__(self, "csign_layers", multis)

    @property
    def depth(self) -> int:
        return len(self.csign_layers)


def validate_circuit(circuit: QacCircuit) -> list[str]:
    """All structural problems of the circuit, empty when it is well formed."""
    problems: list[str] = []
    m = circuit.n_qubits
    if m < 1:
        problems.append(f"n_qubits must be at least 1, got {m}")
    if not 1 <= circuit.n_inputs <= m:
        problems.append(f"n_inputs must be in 1..{m}, got {circuit.n_inputs}")
    if len(circuit.single_layers) != len(circuit.csign_layers) + 1:
        problems.append(
            f"{len(circuit.csign_layers)} multiqubit layers need "
            f"{len(circuit.csign_layers) + 1} single-qubit layers, "
            f"got {len(circuit.single_layers)}"
        )
    for li, layer in enumerate(circuit.single_layers):
        for q, gate in layer.items():
            if not 1 <= q <= m:
                problems.append(f"layer {li + 0.5}: qubit {q} out of range 1..{m}")
            if gate.shape != (2, 2):
                problems.append(f"layer {li + 0.5}: gate on qubit {q} is not 2x2")
            elif not is_unitary(gate):
                problems.append(f"layer {li + 0.5}: gate on qubit {q} is not unitary")
    for li, layer in enumerate(circuit.csign_layers, start=1):
        seen: set[int] = set()
        for sup in layer:
            if len(sup) < 2:
                problems.append(f"layer {li}: support {sorted(sup)} has fewer than 2 qubits")
            bad = [q for q in sup if not 1 <= q <= m]
            if bad:
                problems.append(f"layer {li}: qubits {sorted(bad)} out of range 1..{m}")
            overlap = sup & seen
            if overlap:
                problems.append(f"layer {li}: supports overlap on qubits {sorted(overlap)}")
            seen |= sup
    return problems


def require_valid(circuit: QacCircuit) -> None:
    problems = validate_circuit(circuit)
    if problems:
        raise CircuitValidationError(problems)


@dataclass(frozen=True)
class CircuitTrace:
    """Every boundary state of one run.

    ``states[0]`` is the input; each layer, single or multiqubit, appends
    one state, so ``states[2*ell - 1]`` and ``states[2*ell]`` are the
    states just before and just after multiqubit layer ``ell``.
    """

    circuit: QacCircuit
    states: tuple[QuantumState, ...]

    @property
    def final(self) -> QuantumState:
        return self.states[-1]

    def before_csign_layer(self, ell: int) -> QuantumState:
        if not 1 <= ell <= self.circuit.depth:
            raise ValueError(f"layer {ell} out of range 1..{self.circuit.depth}")
        return self.states[2 * ell - 1]

    def after_csign_layer(self, ell: int) -> QuantumState:
        if not 1 <= ell <= self.circuit.depth:
            raise ValueError(f"layer {ell} out of range 1..{self.circuit.depth}")
        return self.states[2 * ell]


def _apply_single_layer(vec: np.ndarray, n: int, layer: Mapping[int, np.ndarray]) -> None:
    buf = vec.reshape(1, -1)
    for q, gate in layer.items():
        kernels.apply_1q(buf, gate, 2 ** (n - q))


def _csign_indices(n: int, support: frozenset[int]) -> np.ndarray:
    mask = 0
    for q in support:
        mask |= 1 << (n - q)
    idx = np.arange(2**n, dtype=np.int64)
    return idx[(idx & mask) == mask]


def run_circuit(circuit: QacCircuit, state: QuantumState) -> CircuitTrace:
    """Run the circuit, recording the state at every layer boundary."""
    require_valid(circuit)
    if state.n_qubits != circuit.n_qubits:
        raise ValueError(
            f"state has {state.n_qubits} qubits, circuit has {circuit.n_qubits}"
        )
    n = circuit.n_qubits
    states = [state]
    vec = state.amplitudes.copy()
    for li, single in enumerate(circuit.single_layers):
        _apply_single_layer(vec, n, single)
        states.append(QuantumState(vec))
        if li < len(circuit.csign_layers):
            buf = vec.reshape(1, -1)
            for sup in circuit.csign_layers[li]:
                kernels.apply_phase(buf, _csign_indices(n, sup), -1.0)
            states.append(QuantumState(vec))
    return CircuitTrace(circuit, tuple(states))


def apply_circuit(circuit: QacCircuit, state: QuantumState) -> QuantumState:
    """The final state only; same work as ``run_circuit`` minus the copies."""
    return run_circuit(circuit, state).final


def invert_circuit(circuit: QacCircuit) -> QacCircuit:
    """The exact inverse: layers reversed, single-qubit gates daggered."""
    singles = tuple(
        {q: gate.conj().T for q, gate in layer.items()}
        for layer in reversed(circuit.single_layers)
    )
    return QacCircuit(
        circuit.n_qubits, circuit.n_inputs, singles, tuple(reversed(circuit.csign_layers))
    )


def input_state(circuit: QacCircuit, x, ancilla: QuantumState | None = None) -> QuantumState:
    """The initial state |x> on the inputs joined with the ancilla state.

    ``x`` is anything ``QuantumState.basis`` accepts on ``n_inputs``
    qubits; the ancilla defaults to all zeros.
    """
    n, m = circuit.n_inputs, circuit.n_qubits
    xi = _as_index(n, x)
    if m == n:
        return QuantumState.basis(n, xi)
    width = 2 ** (m - n)
    if ancilla is None:
        vec = np.zeros(2**m, dtype=np.complex128)
        vec[xi * width] = 1.0
        return QuantumState(vec)
    if ancilla.n_qubits != m - n:
        raise ValueError(f"ancilla must cover {m - n} qubits, got {ancilla.n_qubits}")
    vec = np.zeros(2**m, dtype=np.complex128)
    vec[xi * width : (xi + 1) * width] = ancilla.amplitudes
    return QuantumState(vec)


@dataclass(frozen=True)
class CleanSimReport:
    """Outcome of the exact simulation check over every classical input."""

    passed: bool
    max_distance: float
    worst_input: BitString
    distances: np.ndarray
    tol: float


def _target_column(target, n: int, x: int) -> np.ndarray:
    if isinstance(target, StructuredGate):
        return apply_structured_gate(QuantumState.basis(n, x), target).amplitudes
    mat = np.asarray(target, dtype=np.complex128)
    if mat.shape != (2**n, 2**n) or not is_unitary(mat):
        raise ValueError(f"target must be a {2**n} x {2**n} unitary or a structured gate")
    return mat[:, x]


def check_clean_simulation(
    circuit: QacCircuit, target, tol: float = DEFAULT_TOL
) -> CleanSimReport:
    """Check ``C(|x> (x) |0...0>) = (G|x>) (x) |0...0>`` for every input x.

    The comparison is exact vector distance, so a global phase on any
    input counts as a failure.  ``target`` is a structured gate on the
    input qubits or an explicit ``2**n x 2**n`` unitary.
    """
    require_valid(circuit)
    n, m = circuit.n_inputs, circuit.n_qubits
    width = 2 ** (m - n)
    distances = np.empty(2**n)
    for x in range(2**n):
        out = apply_circuit(circuit, input_state(circuit, x))
        expected = np.zeros(2**m, dtype=np.complex128)
        expected[np.arange(2**n) * width] = _target_column(target, n, x)
        distances[x] = float(np.linalg.norm(out.amplitudes - expected))
    worst = int(np.argmax(distances))
    return CleanSimReport(
        passed=bool(np.all(distances < tol)),
        max_distance=float(distances[worst]),
        worst_input=BitString.from_index(n, worst),
        distances=distances,
        tol=tol,
    )


@dataclass(frozen=True)
class WeakParityReport:
    """Outcome of the weak parity check over every classical input.

    For input x the target qubit of the output must be exactly the
    parity of x; ``leakages[x]`` is the root of the output mass whose
    target bit disagrees.
    """

    passed: bool
    max_leakage: float
    worst_input: BitString
    leakages: np.ndarray
    tol: float


def check_weak_parity(
    circuit: QacCircuit, ancilla: QuantumState | None = None, tol: float = DEFAULT_TOL
) -> WeakParityReport:
    """Check that qubit 1 carries the input parity exactly, for every input.

    The rest of the output state is unconstrained; an ancilla state other
    than all zeros may be supplied.
    """
    require_valid(circuit)
    n, m = circuit.n_inputs, circuit.n_qubits
    idx = np.arange(2**m)
    target_bit = (idx >> (m - 1)) & 1
    leakages = np.empty(2**n)
    for x in range(2**n):
        out = apply_circuit(circuit, input_state(circuit, x, ancilla))
        parity = int(x).bit_count() & 1
        bad = np.abs(out.amplitudes[target_bit != parity]) ** 2
        leakages[x] = float(np.sqrt(np.sum(bad)))
    worst = int(np.argmax(leakages))
    return WeakParityReport(
        passed=bool(np.all(leakages < tol)),
        max_leakage=float(leakages[worst]),
        worst_input=BitString.from_index(n, worst),
        leakages=leakages,
        tol=tol,
    )


@dataclass(frozen=True)
class MixingClass:
    """Classification of a 2x2 unitary by where its zero entries sit.

    Mixing means every entry is nonzero (modulus at least tol).  A
    non-mixing unitary is ``exp(i*beta) * exp(i*alpha*Z)`` up to a
    leading X flip; ``with_x`` says whether the flip is present.
    """

    mixing: bool
    with_x: bool | None = None
    alpha: float | None = None
    beta: float | None = None


def non_mixing_matrix(with_x: bool, alpha: float, beta: float) -> np.ndarray:
    """The unitary ``exp(i*beta) * [X] * diag(exp(i*alpha), exp(-i*alpha))``."""
    diag = np.exp(1j * beta) * np.diag([np.exp(1j * alpha), np.exp(-1j * alpha)])
    return PAULI_X @ diag if with_x else diag


def classify_mixing(gate: np.ndarray, tol: float = DEFAULT_TOL) -> MixingClass:
    """Classify a single-qubit unitary as mixing or phase-plus-optional-flip."""
    gate = np.asarray(gate, dtype=np.complex128)
    if gate.shape != (2, 2) or not is_unitary(gate):
        raise ValueError("gate must be a 2x2 unitary")
    mods = np.abs(gate)
    if float(mods.min()) >= tol:
        return MixingClass(mixing=True)
    # unitarity forces the nonzero pattern to be exactly one diagonal
    with_x = min(mods[1, 0], mods[0, 1]) > min(mods[0, 0], mods[1, 1])
    if with_x:
        theta, phi = np.angle(gate[1, 0]), np.angle(gate[0, 1])
    else:
        theta, phi = np.angle(gate[0, 0]), np.angle(gate[1, 1])
    return MixingClass(
        mixing=False,
        with_x=with_x,
        alpha=float((theta - phi) / 2),
        beta=float((theta + phi) / 2),
    )


@dataclass(frozen=True)
class QubitRoleReport:
    """Which qubits enter and leave the circuit through non-mixing gates,
    and which multiqubit gate (if any) touches each qubit in each layer."""

    pass_in: dict[int, bool]
    pass_out: dict[int, bool]
    gate_membership: tuple[dict[int, frozenset[int] | None], ...]

    def layer_gate(self, qubit: int, ell: int) -> frozenset[int] | None:
        return self.gate_membership[ell - 1][qubit]


def classify_qubit_roles(circuit: QacCircuit, tol: float = DEFAULT_TOL) -> QubitRoleReport:
    """Per-qubit mixing classification of the first and last single layers
    plus the per-layer gate membership table."""
    require_valid(circuit)
    m = circuit.n_qubits
    first, last = circuit.single_layers[0], circuit.single_layers[-1]
    pass_in = {
        q: not classify_mixing(first.get(q, ID2), tol).mixing for q in range(1, m + 1)
    }
    pass_out = {
        q: not classify_mixing(last.get(q, ID2), tol).mixing for q in range(1, m + 1)
    }
    membership = tuple(
        {q: next((sup for sup in layer if q in sup), None) for q in range(1, m + 1)}
        for layer in circuit.csign_layers
    )
    return QubitRoleReport(pass_in=pass_in, pass_out=pass_out, gate_membership=membership)


def circuit_unitary(circuit: QacCircuit) -> np.ndarray:
    """The full ``2**m x 2**m`` unitary of the circuit, column by column."""
    require_valid(circuit)
    dim = 2**circuit.n_qubits
    out = np.empty((dim, dim), dtype=np.complex128)
    for j in range(dim):
        out[:, j] = apply_circuit(circuit, QuantumState.basis(circuit.n_qubits, j)).amplitudes
    return out


def layer_tensor(layer: Mapping[int, np.ndarray], qubits: Sequence[int]) -> np.ndarray:
    """The tensor product of a single layer's gates on the given qubits,
    in the given order (identity where the layer has no gate)."""
    out = np.array([[1.0 + 0j]])
    for q in qubits:
        out = np.kron(out, layer.get(q, ID2))
    return out
