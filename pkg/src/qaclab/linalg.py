"""Dense complex linear algebra helpers.

Bipartite coefficient matrices and their singular values, SVD null
spaces, Haar-random unitaries, trace distance, and an orthonormal
subspace container.  Everything here works on plain numpy arrays; the
qubit-labeling conventions live one layer up in ``qaclab.states``, with
one exception: ``bipartite_matrix`` fixes the convention that qubit 1 is
the most significant index bit, since every caller in the package
depends on that choice being made exactly once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

DEFAULT_TOL = 1e-9

_ORTHO_TOL = 1e-10


def is_unitary(mat: np.ndarray, tol: float = 1e-10) -> bool:
    """True when ``mat`` is square with ``mat @ mat^H = I`` entrywise to ``tol``."""
    mat = np.asarray(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] == 0:
        return False
    eye = np.eye(mat.shape[0])
    return bool(np.max(np.abs(mat @ mat.conj().T - eye)) < tol)


@dataclass(frozen=True)
class Subspace:
    """A subspace of C^ambient_dim held as orthonormal basis columns."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self) -> None:
        basis = np.array(self.basis, dtype=np.complex128, order="C")
        if basis.ndim != 2 or basis.shape[0] != self.ambient_dim:
            raise ValueError(
                f"basis must be {self.ambient_dim} x k, got shape {basis.shape}"
            )
        k = basis.shape[1]
        if k > self.ambient_dim:
            raise ValueError("more basis vectors than ambient dimensions")
        if k:
            gram = basis.conj().T @ basis
            if np.max(np.abs(gram - np.eye(k))) > _ORTHO_TOL:
                raise ValueError("basis columns are not orthonormal")
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def project(self, vec: np.ndarray) -> np.ndarray:
        """Orthogonal projection of ``vec`` onto the subspace."""
        vec = np.asarray(vec, dtype=np.complex128)
        return self.basis @ (self.basis.conj().T @ vec)

    def contains(self, vec: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
        """True when the component of ``vec`` outside the subspace is below ``tol``.

        The residual is compared against ``tol`` times the vector norm, so
        the answer is scale invariant.
        """
        vec = np.asarray(vec, dtype=np.complex128)
        scale = max(float(np.linalg.norm(vec)), 1.0)
        return float(np.linalg.norm(vec - self.project(vec))) <= tol * scale


def _as_vector(state) -> np.ndarray:
    """Accept a flat amplitude array or anything exposing ``.amplitudes``."""
    amps = getattr(state, "amplitudes", state)
    vec = np.asarray(amps, dtype=np.complex128).reshape(-1)
    n = vec.size.bit_length() - 1
    if vec.size < 2 or 2**n != vec.size:
        raise ValueError(f"state length {vec.size} is not 2**n with n >= 1")
    return vec


def bipartite_matrix(state, part_a: Iterable[int]) -> np.ndarray:
    """Reshape a state vector into its ``2**|A| x 2**|B|`` coefficient matrix.

    Qubit 1 is the most significant bit of the amplitude index.  Rows are
    indexed by the sorted labels of ``part_a`` (again most significant
    first), columns by the sorted complement.
    """
    vec = _as_vector(state)
    n = vec.size.bit_length() - 1
    a = sorted(set(int(q) for q in part_a))
    if not a or len(a) == n or not all(1 <= q <= n for q in a):
        raise ValueError(f"part_a must be a nonempty proper subset of 1..{n}")
    b = [q for q in range(1, n + 1) if q not in set(a)]
    tensor = vec.reshape((2,) * n)
    perm = [q - 1 for q in a + b]
    return tensor.transpose(perm).reshape(2 ** len(a), 2 ** len(b))


def schmidt_singular_values(state, part_a: Iterable[int]) -> np.ndarray:
    """Singular values, descending, of the state across ``(part_a, complement)``."""
    return np.linalg.svd(bipartite_matrix(state, part_a), compute_uv=False)


def null_space(mat: np.ndarray, tol: float = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of ``{v : mat @ v = 0}`` with a relative rank cutoff.

    Singular values below ``tol`` times the largest one (or below ``tol``
    itself for a zero matrix) are treated as zero.  A matrix with no rows
    has the full ambient space as its null space.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    mat = np.atleast_2d(np.asarray(mat, dtype=np.complex128))
    rows, cols = mat.shape
    if cols == 0:
        raise ValueError("matrix must have at least one column")
    if rows == 0 or not np.any(mat):
        return Subspace(cols, np.eye(cols, dtype=np.complex128))
    _, s, vh = np.linalg.svd(mat, full_matrices=True)
    cutoff = tol * s[0]
    rank = int(np.sum(s > cutoff))
    return Subspace(cols, vh[rank:].conj().T)


def random_unitary_haar(
    dim: int, seed: int | np.random.Generator | None = None
) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Gaussian, R-diagonal phase fixed."""
    if dim < 1:
        raise ValueError("dim must be at least 1")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z / np.sqrt(2.0))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Half the trace norm of ``rho - sigma`` for Hermitian matrices."""
    diff = np.asarray(rho, dtype=np.complex128) - np.asarray(sigma, dtype=np.complex128)
    if diff.ndim != 2 or diff.shape[0] != diff.shape[1]:
        raise ValueError("arguments must be square matrices of equal shape")
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


def density_matrix(vec: np.ndarray) -> np.ndarray:
    """Outer product |vec><vec| of a flat state vector."""
    vec = np.asarray(vec, dtype=np.complex128).reshape(-1)
    return np.outer(vec, vec.conj())


def reduced_density(state, keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix on the sorted labels ``keep``, tracing the rest."""
    mat = bipartite_matrix(state, keep)
    return mat @ mat.conj().T
