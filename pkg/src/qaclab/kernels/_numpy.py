"""Pure numpy fallback for the batched state-vector kernels.

Semantics match the compiled extension ``qaclab.kernels._core``; the
package selects whichever is importable.  All kernels operate on a
C-contiguous ``(batch, dim)`` complex128 array of state vectors, where
``dim = 2**m`` and the qubit with 1-based label ``q`` owns the index bit
of weight ``2**(m - q)`` (qubit 1 is the most significant bit).
"""

from __future__ import annotations

import numpy as np


def apply_1q(states: np.ndarray, gate: np.ndarray, right: int) -> None:
    """Apply a 2x2 gate in place to the qubit with block size ``right``.

    ``right = 2**(m - q)`` for qubit ``q`` of an m-qubit register.
    """
    rows, dim = states.shape
    view = states.reshape(rows, dim // (2 * right), 2, right)
    # einsum fully evaluates before the write-back, so aliasing is safe
    view[...] = np.einsum("ab,rkbl->rkal", gate, view)


def apply_phase(states: np.ndarray, idx: np.ndarray, phase: complex) -> None:
    """Multiply the amplitudes at column indices ``idx`` in place by a scalar."""
    states[:, idx] *= phase


def pair_contract(bra: np.ndarray, ket: np.ndarray, right: int) -> np.ndarray:
    """Contract everything except one qubit: ``E[i, j] = <bra_i|ket_j>``.

    Both arrays are ``(batch, dim)``; the result is the 2x2 matrix obtained
    by summing ``conj(bra) * ket`` over the batch and over all index bits
    except the one of weight ``right``.
    """
    rows, dim = bra.shape
    bv = bra.reshape(rows, dim // (2 * right), 2, right)
    kv = ket.reshape(rows, dim // (2 * right), 2, right)
    return np.einsum("rkil,rkjl->ij", bv.conj(), kv)
