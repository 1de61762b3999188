"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np

from qaclab import QacCircuit, QuantumState, random_unitary_haar
from qaclab.states import HADAMARD, PAULI_X


def haar_state(n: int, seed) -> QuantumState:
    """A Haar-random pure state on n qubits."""
    rng = np.random.default_rng(seed)
    vec = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return QuantumState.normalized(vec)


def haar_singles(m: int, rng: np.random.Generator) -> dict[int, np.ndarray]:
    """One Haar-random gate per qubit 1..m."""
    return {q: random_unitary_haar(2, rng) for q in range(1, m + 1)}


def random_circuit(m: int, n: int, csign_layers, seed) -> QacCircuit:
    """A circuit with the given supports and Haar singles everywhere."""
    rng = np.random.default_rng(seed)
    layers = tuple(tuple(frozenset(sup) for sup in layer) for layer in csign_layers)
    singles = tuple(haar_singles(m, rng) for _ in range(len(layers) + 1))
    return QacCircuit(m, n, singles, layers)


def parity3_circuit() -> QacCircuit:
    """A depth-2 circuit that reproduces the 3-bit parity gate exactly.

    Checked by hand: the target qubit picks up x2*x3 from the first
    multi layer and (1-x2)*(1-x3) from the second (the X gates flip
    qubits 2 and 3 in between), and x2*x3 + (1-x2)*(1-x3) + 1 equals
    x2 + x3 mod 2.
    """
    return QacCircuit(
        3,
        3,
        ({1: HADAMARD}, {2: PAULI_X, 3: PAULI_X},
         {1: PAULI_X @ HADAMARD, 2: PAULI_X, 3: PAULI_X}),
        ((frozenset({1, 2, 3}),), (frozenset({1, 2, 3}),)),
    )
