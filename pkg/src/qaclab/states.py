"""Quantum states over 1-based qubit labels, partial bit assignments, and
the structured multiqubit gate family.

Index convention used everywhere in the package: qubit 1 is the most
significant bit, so the basis state ``|x_1 ... x_n>`` lives at amplitude
index ``sum_i x_i * 2**(n - i)`` and the bit of qubit ``q`` in index
``j`` is ``(j >> (n - q)) & 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from qaclab import kernels
from qaclab.linalg import DEFAULT_TOL, Subspace, is_unitary

NORM_TOL = 1e-9

ID2 = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)
for _m in (ID2, PAULI_X, PAULI_Y, PAULI_Z, HADAMARD):
    _m.setflags(write=False)


class BitString:
    """An assignment of {0,1} values to a finite set of positive qubit labels.

    Supports the restriction/union algebra used when states are split
    across bipartitions: ``restrict`` keeps a sub-domain, ``union`` joins
    two assignments with disjoint domains.  Instances are immutable and
    hashable.
    """

    __slots__ = ("_items",)

    def __init__(self, values: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        mapping = dict(values)
        for q, v in mapping.items():
            if not isinstance(q, (int, np.integer)) or q < 1:
                raise ValueError(f"qubit labels must be positive integers, got {q!r}")
            if v not in (0, 1):
                raise ValueError(f"bit values must be 0 or 1, got {v!r}")
        self._items: tuple[tuple[int, int], ...] = tuple(
            sorted((int(q), int(v)) for q, v in mapping.items())
        )

    @classmethod
    def zeros(cls, labels: Iterable[int]) -> BitString:
        return cls({int(q): 0 for q in labels})

    @classmethod
    def ones(cls, labels: Iterable[int]) -> BitString:
        return cls({int(q): 1 for q in labels})

    @classmethod
    def from_bits(cls, bits: Sequence[int], labels: Iterable[int] | None = None) -> BitString:
        """Pair a bit sequence with labels (default 1..len, label order ascending)."""
        labs = list(labels) if labels is not None else list(range(1, len(bits) + 1))
        if len(labs) != len(bits):
            raise ValueError("labels and bits must have equal length")
        return cls(dict(zip(labs, (int(b) for b in bits))))

    @classmethod
    def from_index(cls, n: int, index: int) -> BitString:
        """Decode an amplitude index into bits on labels 1..n, qubit 1 first."""
        if not 0 <= index < 2**n:
            raise ValueError(f"index {index} out of range for {n} qubits")
        return cls({q: (index >> (n - q)) & 1 for q in range(1, n + 1)})

    @property
    def domain(self) -> frozenset[int]:
        return frozenset(q for q, _ in self._items)

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self._items)

    def items(self) -> tuple[tuple[int, int], ...]:
        return self._items

    def __getitem__(self, label: int) -> int:
        for q, v in self._items:
            if q == label:
                return v
        raise KeyError(label)

    def get(self, label: int, default: int | None = None) -> int | None:
        for q, v in self._items:
            if q == label:
                return v
        return default

    def __contains__(self, label: int) -> bool:
        return any(q == label for q, _ in self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self) -> Iterator[int]:
        return iter(self.labels)

    def restrict(self, labels: Iterable[int]) -> BitString:
        """The assignment on ``labels``, which must be a subset of the domain."""
        labs = frozenset(int(q) for q in labels)
        missing = labs - self.domain
        if missing:
            raise ValueError(f"labels {sorted(missing)} are outside the domain")
        return BitString({q: v for q, v in self._items if q in labs})

    def union(self, other: BitString) -> BitString:
        """Join two assignments; the domains must be disjoint."""
        overlap = self.domain & other.domain
        if overlap:
            raise ValueError(f"domains overlap on {sorted(overlap)}")
        return BitString(dict(self._items) | dict(other._items))

    def weight(self) -> int:
        return sum(v for _, v in self._items)

    def parity(self) -> int:
        return self.weight() & 1

    def to_index(self, n: int | None = None) -> int:
        """Encode as an amplitude index; the domain must be exactly 1..n."""
        if n is None:
            n = len(self._items)
        if self.domain != frozenset(range(1, n + 1)):
            raise ValueError(f"domain {sorted(self.domain)} is not 1..{n}")
        return sum(v << (n - q) for q, v in self._items)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, BitString) and self._items == other._items

    def __hash__(self) -> int:
        return hash(self._items)

    def __repr__(self) -> str:
        return f"BitString({dict(self._items)!r})"


def _as_index(n: int, x) -> int:
    """Coerce an int index, BitString, bit sequence, or bit text to an index."""
    if isinstance(x, BitString):
        return x.to_index(n)
    if isinstance(x, str):
        if len(x) != n or any(ch not in "01" for ch in x):
            raise ValueError(f"bit text must be {n} characters of 0/1, got {x!r}")
        return int(x, 2)
    if isinstance(x, (int, np.integer)):
        idx = int(x)
        if not 0 <= idx < 2**n:
            raise ValueError(f"basis index {idx} out of range for {n} qubits")
        return idx
    bits = [int(b) for b in x]
    if len(bits) != n or any(b not in (0, 1) for b in bits):
        raise ValueError(f"expected {n} bits, got {bits!r}")
    return sum(b << (n - 1 - i) for i, b in enumerate(bits))


class QuantumState:
    """An n-qubit pure state; amplitudes are copied, unit-norm, read-only."""

    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, amplitudes):
        vec = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        n = vec.size.bit_length() - 1
        if vec.size < 2 or 2**n != vec.size:
            raise ValueError(f"amplitude length {vec.size} is not 2**n with n >= 1")
        nrm = float(np.linalg.norm(vec))
        if abs(nrm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {nrm!r} differs from 1 by more than {NORM_TOL}")
        vec.setflags(write=False)
        self.n_qubits: int = n
        self.amplitudes: np.ndarray = vec

    @classmethod
    def basis(cls, n: int, x) -> QuantumState:
        """The computational basis state |x> on n qubits."""
        vec = np.zeros(2**n, dtype=np.complex128)
        vec[_as_index(n, x)] = 1.0
        return cls(vec)

    @classmethod
    def normalized(cls, amplitudes) -> QuantumState:
        """Normalize an arbitrary nonzero amplitude vector."""
        vec = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        nrm = float(np.linalg.norm(vec))
        if nrm < 1e-12:
            raise ValueError("cannot normalize a (near-)zero vector")
        return cls(vec / nrm)

    def amplitude(self, x) -> complex:
        """The amplitude <x|psi> of a basis string."""
        return complex(self.amplitudes[_as_index(self.n_qubits, x)])

    def inner(self, other: QuantumState) -> complex:
        """The inner product <self|other>."""
        if other.n_qubits != self.n_qubits:
            raise ValueError("states live on different qubit counts")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def tensor(self, other: QuantumState) -> QuantumState:
        """The joint state with ``other`` appended as lower-significance qubits."""
        return QuantumState(np.kron(self.amplitudes, other.amplitudes))

    def __repr__(self) -> str:
        return f"QuantumState(n_qubits={self.n_qubits})"


def states_equal(a: QuantumState, b: QuantumState, tol: float = DEFAULT_TOL) -> bool:
    """Exact vector equality to ``tol``; a global phase counts as different."""
    if a.n_qubits != b.n_qubits:
        return False
    return float(np.linalg.norm(a.amplitudes - b.amplitudes)) <= tol


def compose_product(parts: Iterable[tuple[Sequence[int], np.ndarray]]) -> QuantumState:
    """Assemble a state from factors on label groups that partition 1..m.

    Each part is ``(labels, amplitudes)``; within a factor the given label
    order is its qubit order, most significant first.
    """
    labels: list[int] = []
    vecs: list[np.ndarray] = []
    for labs, amps in parts:
        labs = [int(q) for q in labs]
        vec = np.asarray(amps, dtype=np.complex128).reshape(-1)
        if vec.size != 2 ** len(labs):
            raise ValueError(f"factor on {labs} has length {vec.size}")
        labels.extend(labs)
        vecs.append(vec)
    m = len(labels)
    if sorted(labels) != list(range(1, m + 1)):
        raise ValueError(f"labels {sorted(labels)} do not partition 1..{m}")
    full = vecs[0]
    for vec in vecs[1:]:
        full = np.kron(full, vec)
    position = {q: i for i, q in enumerate(labels)}
    tensor = full.reshape((2,) * m)
    return QuantumState(tensor.transpose([position[q] for q in range(1, m + 1)]).reshape(-1))


@dataclass(frozen=True)
class StructuredGate:
    """One of the multiqubit gates: ``kind`` is ``csign``, ``phase``,
    ``parity``, ``fanout``, or ``toffoli``.

    For ``csign``/``phase`` the qubits are an unordered support (stored
    sorted; empty is allowed and means a global phase).  For the other
    kinds the first label is the distinguished qubit: the parity target,
    the fanout control, and the flip target respectively.  ``eta`` is the
    phase of a ``phase`` gate and None otherwise.
    """

    kind: str
    qubits: tuple[int, ...]
    eta: complex | None = None


def _checked_labels(qubits: Iterable[int]) -> tuple[int, ...]:
    labs = tuple(int(q) for q in qubits)
    if any(q < 1 for q in labs):
        raise ValueError(f"qubit labels must be positive, got {labs}")
    if len(set(labs)) != len(labs):
        raise ValueError(f"qubit labels must be distinct, got {labs}")
    return labs


def csign(support: Iterable[int]) -> StructuredGate:
    """The C-SIGN gate: phase -1 on basis states that are all ones on the support."""
    return StructuredGate("csign", tuple(sorted(_checked_labels(support))))


def phase_gate(support: Iterable[int], eta: complex) -> StructuredGate:
    """The eta generalization of C-SIGN: phase ``eta`` on the all-ones pattern.

    ``eta`` must be unit modulus and different from 1 (with an empty
    support the gate is the global phase ``eta``).
    """
    eta = complex(eta)
    if abs(abs(eta) - 1.0) > 1e-12:
        raise ValueError(f"eta must have unit modulus, got |eta| = {abs(eta)!r}")
    if abs(eta - 1.0) <= 1e-12:
        raise ValueError("eta must differ from 1")
    return StructuredGate("phase", tuple(sorted(_checked_labels(support))), eta)


def parity_gate(qubits: Iterable[int]) -> StructuredGate:
    """XOR of all the other qubits into the first (the target)."""
    labs = _checked_labels(qubits)
    if len(labs) < 2:
        raise ValueError("parity gate needs a target and at least one source")
    return StructuredGate("parity", labs)


def fanout_gate(qubits: Iterable[int]) -> StructuredGate:
    """XOR of the first qubit (the control) into each of the others."""
    labs = _checked_labels(qubits)
    if len(labs) < 2:
        raise ValueError("fanout gate needs a control and at least one target")
    return StructuredGate("fanout", labs)


def toffoli_gate(qubits: Iterable[int]) -> StructuredGate:
    """Flip the first qubit (the target) when all the others are one."""
    labs = _checked_labels(qubits)
    if len(labs) < 2:
        raise ValueError("toffoli gate needs a target and at least one control")
    return StructuredGate("toffoli", labs)


def _support_mask(n: int, qubits: Iterable[int]) -> int:
    mask = 0
    for q in qubits:
        if not 1 <= q <= n:
            raise ValueError(f"gate qubit {q} out of range 1..{n}")
        mask |= 1 << (n - q)
    return mask


def apply_structured_gate(state: QuantumState, gate: StructuredGate) -> QuantumState:
    """Apply a structured gate exactly, using index arithmetic only."""
    n = state.n_qubits
    amps = state.amplitudes
    idx = np.arange(amps.size)
    if gate.kind in ("csign", "phase"):
        eta = -1.0 if gate.kind == "csign" else gate.eta
        out = amps.copy()
        if not gate.qubits:
            return QuantumState(eta * out)
        mask = _support_mask(n, gate.qubits)
        out[(idx & mask) == mask] *= eta
        return QuantumState(out)
    special, rest = gate.qubits[0], gate.qubits[1:]
    mask_special = _support_mask(n, (special,))
    if gate.kind == "parity":
        bits = np.zeros_like(idx)
        for q in rest:
            bits ^= (idx >> (n - q)) & 1
        return QuantumState(amps[idx ^ (bits * mask_special)])
    if gate.kind == "fanout":
        bit = (idx >> (n - special)) & 1
        return QuantumState(amps[idx ^ (bit * _support_mask(n, rest))])
    if gate.kind == "toffoli":
        mask_rest = _support_mask(n, rest)
        fire = ((idx & mask_rest) == mask_rest).astype(idx.dtype)
        return QuantumState(amps[idx ^ (fire * mask_special)])
    raise ValueError(f"unknown gate kind {gate.kind!r}")


def apply_single_qubit(state: QuantumState, gate: np.ndarray, qubit: int) -> QuantumState:
    """Apply a 2x2 unitary to one qubit of the state."""
    gate = np.ascontiguousarray(gate, dtype=np.complex128)
    if gate.shape != (2, 2) or not is_unitary(gate):
        raise ValueError("gate must be a 2x2 unitary")
    n = state.n_qubits
    if not 1 <= qubit <= n:
        raise ValueError(f"qubit {qubit} out of range 1..{n}")
    buf = state.amplitudes.reshape(1, -1).copy()
    kernels.apply_1q(buf, gate, 2 ** (n - qubit))
    return QuantumState(buf.reshape(-1))


def parity_subspace_basis(n: int, b: int) -> Subspace:
    """The span of the n-qubit basis states of Hamming parity ``b``.

    Basis columns are the parity-b basis states in increasing index
    order, so the first column is the all-zeros string for b = 0 and
    ``|0...01>`` for b = 1.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if b not in (0, 1):
        raise ValueError("b must be 0 or 1")
    idx = np.arange(2**n)
    sel = np.nonzero((np.bitwise_count(idx) & 1) == b)[0]
    basis = np.zeros((2**n, sel.size), dtype=np.complex128)
    basis[sel, np.arange(sel.size)] = 1.0
    return Subspace(2**n, basis)


def classify_state_parity(state: QuantumState, tol: float = DEFAULT_TOL) -> int | None:
    """Return b when the squared mass outside parity b is below ``tol**2``.

    None when the state has at least ``tol**2`` mass on both parities.
    """
    par = np.bitwise_count(np.arange(state.amplitudes.size)) & 1
    probs = np.abs(state.amplitudes) ** 2
    mass1 = float(np.sum(probs[par == 1]))
    mass0 = float(np.sum(probs[par == 0]))
    if mass1 < tol * tol:
        return 0
    if mass0 < tol * tol:
        return 1
    return None
