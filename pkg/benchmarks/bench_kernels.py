"""Timing comparison between the compiled kernels and the numpy fallback.

Both backends implement the same three batched state-vector operations
(``apply_1q``, ``apply_phase``, ``pair_contract``), so simulation results
are backend independent; this script measures how much the compiled core
buys and double-checks that the two backends agree bit-for-bit in
semantics (max absolute difference on identical inputs).

Run from the repository root after an editable install:

    python3 benchmarks/bench_kernels.py --qubits 8,11,13 --batch 64
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from qaclab.kernels import _numpy as numpy_backend
from qaclab.linalg import random_unitary_haar

try:
    from qaclab.kernels import _core as compiled_backend
except ImportError:
    compiled_backend = None


def random_states(batch: int, m: int, rng: np.random.Generator) -> np.ndarray:
    vecs = rng.standard_normal((batch, 2**m)) + 1j * rng.standard_normal((batch, 2**m))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    return np.ascontiguousarray(vecs, dtype=np.complex128)


def ones_columns(m: int, support: tuple[int, ...]) -> np.ndarray:
    mask = 0
    for q in support:
        mask |= 1 << (m - q)
    idx = np.arange(2**m, dtype=np.int64)
    return np.ascontiguousarray(idx[(idx & mask) == mask])


def best_of(repeats: int, fn) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_backend(backend, m: int, batch: int, repeats: int, seed: int) -> dict[str, float]:
    rng = np.random.default_rng(seed)
    states = random_states(batch, m, rng)
    gate = np.ascontiguousarray(random_unitary_haar(2, rng))
    support = tuple(sorted(rng.choice(np.arange(1, m + 1), size=3, replace=False)))
    idx = ones_columns(m, support)

    def singles_layer() -> None:
        work = states.copy()
        for q in range(1, m + 1):
            backend.apply_1q(work, gate, 2 ** (m - q))

    def phase_layer() -> None:
        work = states.copy()
        backend.apply_phase(work, idx, -1.0 + 0.0j)

    def contraction() -> None:
        backend.pair_contract(states, states, 2 ** (m - 1))

    return {
        "apply_1q layer": best_of(repeats, singles_layer),
        "apply_phase": best_of(repeats, phase_layer),
        "pair_contract": best_of(repeats, contraction),
    }


def max_disagreement(m: int, batch: int, seed: int) -> float:
    rng = np.random.default_rng(seed)
    states = random_states(batch, m, rng)
    gate = np.ascontiguousarray(random_unitary_haar(2, rng))
    idx = ones_columns(m, (1, 2))
    worst = 0.0
    for backend_pair in ((compiled_backend, numpy_backend),):
        a, b = (st.copy() for st in (states, states))
        for q in range(1, m + 1):
            backend_pair[0].apply_1q(a, gate, 2 ** (m - q))
            backend_pair[1].apply_1q(b, gate, 2 ** (m - q))
        backend_pair[0].apply_phase(a, idx, 1j)
        backend_pair[1].apply_phase(b, idx, 1j)
        worst = max(worst, float(np.max(np.abs(a - b))))
        ea = np.asarray(backend_pair[0].pair_contract(a, a, 2 ** (m - 1)))
        eb = np.asarray(backend_pair[1].pair_contract(b, b, 2 ** (m - 1)))
        worst = max(worst, float(np.max(np.abs(ea - eb))))
    return worst


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--qubits", default="8,11,13", help="comma-separated register sizes")
    parser.add_argument("--batch", type=int, default=64, help="state vectors per call")
    parser.add_argument("--repeats", type=int, default=5, help="take the best of this many runs")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    sizes = [int(tok) for tok in args.qubits.split(",") if tok]

    if compiled_backend is None:
        print("compiled extension not built; timing the numpy fallback only")
    backends = [("numpy", numpy_backend)]
    if compiled_backend is not None:
        backends.append(("cython", compiled_backend))

    header = f"{'kernel':<16} {'m':>3} {'batch':>6}"
    for name, _ in backends:
        header += f" {name:>12}"
    if compiled_backend is not None:
        header += f" {'speedup':>9}"
    print(header)
    for m in sizes:
        rows: dict[str, list[float]] = {}
        for _, backend in backends:
            timings = bench_backend(backend, m, args.batch, args.repeats, args.seed)
            for kernel, seconds in timings.items():
                rows.setdefault(kernel, []).append(seconds)
        for kernel, seconds in rows.items():
            line = f"{kernel:<16} {m:>3} {args.batch:>6}"
            for value in seconds:
                line += f" {value * 1e3:>9.3f} ms"
            if len(seconds) == 2 and seconds[1] > 0:
                line += f" {seconds[0] / seconds[1]:>8.1f}x"
            print(line)

    if compiled_backend is not None:
        print(f"agreement: max |cython - numpy| = {max_disagreement(10, 16, args.seed):.3e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
