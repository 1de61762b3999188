"""Constructive certificates.

Killer states: pure-parity states that zero the all-ones amplitude after
each prefix of a unitary sequence, used to switch off shared multiqubit
gates in depth-1 and depth-2 circuits.  Product systems: the coupled
bilinear equation families over two, three, or four index sets whose
solutions must have a vanishing side; they drive the test-string
contradiction in ``qaclab.entanglement``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from qaclab.circuits import (
    QacCircuit,
    apply_circuit,
    layer_tensor,
    require_valid,
    run_circuit,
)
from qaclab.errors import PreconditionError
from qaclab.linalg import (
    DEFAULT_TOL,
    is_unitary,
    null_space,
    reduced_density,
    trace_distance,
)
from qaclab.states import (
    QuantumState,
    apply_structured_gate,
    compose_product,
    csign,
    parity_subspace_basis,
)


@dataclass(frozen=True)
class KillerStateCertificate:
    """A parity-b state together with the evidence that it kills the
    all-ones amplitude after every prefix of the unitary sequence."""

    state: QuantumState
    b: int
    residuals: np.ndarray
    parity_leakage: float


def kill_parity_state(
    unitaries: Sequence[np.ndarray],
    b: int,
    tol: float = DEFAULT_TOL,
    n: int | None = None,
) -> KillerStateCertificate:
    """Find a parity-b state psi with ``<1..1| U_i ... U_1 |psi> = 0`` for all i.

    Each constraint is one linear functional on the ``2**(n-1)``
    dimensional parity-b subspace, so any ``k < 2**(n-1)`` constraints
    leave a nonzero joint null space; the first null-basis vector is
    returned.  With no constraints the first parity-b basis state is
    returned (``n`` is then required to fix the qubit count).
    """
    mats = [np.asarray(u, dtype=np.complex128) for u in unitaries]
    if b not in (0, 1):
        raise ValueError("b must be 0 or 1")
    if not mats:
        if n is None:
            raise ValueError("n is required when no unitaries are given")
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        pb = parity_subspace_basis(n, b)
        state = QuantumState(pb.basis[:, 0])
        return KillerStateCertificate(
            state=state, b=b, residuals=np.zeros(0), parity_leakage=0.0
        )
    dim = mats[0].shape[0] if mats[0].ndim == 2 else 0
    inferred = max(dim.bit_length() - 1, 0)
    if dim < 2 or 2**inferred != dim:
        raise ValueError(f"operators must be 2**n x 2**n with n >= 1, got shape {mats[0].shape}")
    if n is not None and n != inferred:
        raise ValueError(f"n={n} does not match the operator dimension {dim}")
    n = inferred
    for u in mats:
        if u.shape != (dim, dim) or not is_unitary(u):
            raise ValueError("every operator must be a unitary of the common dimension")
    k = len(mats)
    half = 2 ** (n - 1)
    if k >= half:
        raise PreconditionError(
            f"need fewer constraints than the parity subspace dimension "
            f"2**(n-1) = {half}, got {k}"
        )
    pb = parity_subspace_basis(n, b)
    ones = np.zeros(dim, dtype=np.complex128)
    ones[-1] = 1.0
    prefix = np.eye(dim, dtype=np.complex128)
    rows = []
    prefixes = []
    for u in mats:
        prefix = u @ prefix
        prefixes.append(prefix)
        w = prefix.conj().T @ ones
        rows.append(w.conj() @ pb.basis)
    ns = null_space(np.array(rows), tol)
    if ns.dim == 0:
        raise RuntimeError("internal: empty null space despite the dimension count")
    vec = pb.basis @ ns.basis[:, 0]
    state = QuantumState(vec)
    residuals = np.array([abs(np.vdot(ones, v @ state.amplitudes)) for v in prefixes])
    leakage = float(np.linalg.norm(state.amplitudes - pb.project(state.amplitudes)))
    return KillerStateCertificate(
        state=state, b=b, residuals=residuals, parity_leakage=leakage
    )


def _basis_completions(
    others: Sequence[int], n_random: int, seed: int
) -> list[dict[int, int]]:
    """All-zeros, all-ones, and a few random bit assignments on ``others``."""
    comps = [{q: 0 for q in others}, {q: 1 for q in others}]
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        comps.append({q: int(bit) for q, bit in zip(others, rng.integers(0, 2, len(others)))})
    if not others:
        return comps[:1]
    return comps


def _embed_on(
    groups: Sequence[tuple[Sequence[int], np.ndarray]], completion: dict[int, int]
) -> QuantumState:
    basis01 = {0: np.array([1.0, 0.0], dtype=np.complex128),
               1: np.array([0.0, 1.0], dtype=np.complex128)}
    parts = list(groups) + [((q,), basis01[bit]) for q, bit in completion.items()]
    return compose_product(parts)


def kill_parity_depth2(
    circuit: QacCircuit,
    q1: int,
    q2: int,
    q3: int,
    b: int = 0,
    tol: float = DEFAULT_TOL,
    completion_seed: int = 0,
) -> KillerStateCertificate:
    """Build the 3-qubit killer state for two shared gates of a depth-2 circuit.

    ``q1, q2, q3`` must be inputs that share one multiqubit gate in each
    layer.  The killer is computed against the tensor products of the two
    preceding single layers on these qubits, then verified on the full
    circuit: with the killer on (q1, q2, q3) and basis states elsewhere,
    both shared gates must act as the identity to ``tol``.
    """
    require_valid(circuit)
    if circuit.depth != 2:
        raise PreconditionError(f"circuit depth must be 2, got {circuit.depth}")
    triple = (q1, q2, q3)
    if len(set(triple)) != 3 or not all(1 <= q <= circuit.n_inputs for q in triple):
        raise PreconditionError(
            f"q1, q2, q3 must be distinct input qubits in 1..{circuit.n_inputs}"
        )
    shared = []
    for ell in (1, 2):
        sup = next(
            (s for s in circuit.csign_layers[ell - 1] if set(triple) <= s), None
        )
        if sup is None:
            raise PreconditionError(
                f"no layer-{ell} gate contains all of qubits {sorted(triple)}"
            )
        shared.append(sup)
    u1 = layer_tensor(circuit.single_layers[0], triple)
    u2 = layer_tensor(circuit.single_layers[1], triple)
    cert = kill_parity_state([u1, u2], b, tol)
    others = [q for q in range(1, circuit.n_qubits + 1) if q not in triple]
    for completion in _basis_completions(others, 3, completion_seed):
        init = _embed_on([(triple, cert.state.amplitudes)], completion)
        trace = run_circuit(circuit, init)
        for ell, sup in zip((1, 2), shared):
            pre = trace.before_csign_layer(ell)
            fired = apply_structured_gate(pre, csign(sup))
            dev = float(np.linalg.norm(fired.amplitudes - pre.amplitudes))
            if dev > tol:
                raise RuntimeError(
                    f"internal: shared layer-{ell} gate on {sorted(sup)} is not "
                    f"switched off (deviation {dev:.3e})"
                )
    return cert


@dataclass(frozen=True)
class Depth1Refutation:
    """Evidence that a depth-1 circuit cannot carry the input parity.

    ``kind`` is ``disconnected`` when some input shares no gate with the
    target, else ``killer``.  Toggling ``toggle_qubit`` flips the input
    parity while leaving the target qubit's reduced output state fixed;
    ``max_trace_distance`` is the largest distance observed over the
    checked completions.
    """

    kind: str
    toggle_qubit: int
    committed: tuple[int, int] | None
    killer: KillerStateCertificate | None
    gate_support: frozenset[int] | None
    max_trace_distance: float
    final_states: tuple[QuantumState, QuantumState]


def refute_depth1(
    circuit: QacCircuit, tol: float = DEFAULT_TOL, completion_seed: int = 0
) -> Depth1Refutation | None:
    """Exhibit an input toggle invisible to the target of a depth-1 circuit.

    Returns None when ``n_inputs < 3``: two inputs admit a depth-1 parity
    circuit, so there is nothing to refute.  Otherwise either some input
    shares no gate with the target (``disconnected``), or two inputs are
    committed to a 2-qubit killer state that switches the target's gate
    off (``killer``); a third input toggles the parity either way.
    """
    require_valid(circuit)
    if circuit.depth != 1:
        raise PreconditionError(f"circuit depth must be 1, got {circuit.depth}")
    n = circuit.n_inputs
    if n < 3:
        return None
    layer = circuit.csign_layers[0]
    target_sup = next((sup for sup in layer if 1 in sup), None)
    stranded = [
        q for q in range(2, n + 1) if target_sup is None or q not in target_sup
    ]
    if stranded:
        kind = "disconnected"
        toggle = stranded[0]
        committed = None
        killer = None
        groups: list[tuple[Sequence[int], np.ndarray]] = []
        others = [q for q in range(1, circuit.n_qubits + 1) if q != toggle]
    else:
        # the target's gate holds every input; kill it on (1, q2)
        kind = "killer"
        inputs_in = sorted(q for q in target_sup if 2 <= q <= n)
        q2, toggle = inputs_in[0], inputs_in[1]
        committed = (1, q2)
        u1 = layer_tensor(circuit.single_layers[0], committed)
        killer = kill_parity_state([u1], 0, tol)
        groups = [(committed, killer.state.amplitudes)]
        others = [
            q for q in range(1, circuit.n_qubits + 1) if q not in (1, q2, toggle)
        ]
    max_td = 0.0
    finals: tuple[QuantumState, QuantumState] | None = None
    one = np.array([0.0, 1.0], dtype=np.complex128)
    zero = np.array([1.0, 0.0], dtype=np.complex128)
    for completion in _basis_completions(others, 5, completion_seed):
        pair = []
        for bit_vec in (zero, one):
            init = _embed_on(groups + [((toggle,), bit_vec)], completion)
            pair.append(apply_circuit(circuit, init))
        td = trace_distance(reduced_density(pair[0], [1]), reduced_density(pair[1], [1]))
        if finals is None:
            finals = (pair[0], pair[1])
        max_td = max(max_td, td)
    assert finals is not None
    return Depth1Refutation(
        kind=kind,
        toggle_qubit=toggle,
        committed=committed,
        killer=killer,
        gate_support=target_sup,
        max_trace_distance=max_td,
        final_states=finals,
    )


@dataclass(frozen=True)
class ProductSystemValues:
    """Inputs to one of the three coupled product-equation systems.

    ``case`` selects the shape: ``4sets`` has four 2x2 tables a, b, c, d;
    ``3sets`` has 2x2 a and d with length-2 b and c; ``2sets`` has four
    length-2 vectors.  ``eta`` is the phase twisting the all-ones
    equation.
    """

    case: str
    eta: complex
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def __post_init__(self) -> None:
        shapes = {
            "4sets": ((2, 2), (2, 2), (2, 2), (2, 2)),
            "3sets": ((2, 2), (2,), (2,), (2, 2)),
            "2sets": ((2,), (2,), (2,), (2,)),
        }
        if self.case not in shapes:
            raise ValueError(f"case must be one of {sorted(shapes)}, got {self.case!r}")
        for name, arr, want in zip("abcd", (self.a, self.b, self.c, self.d), shapes[self.case]):
            arr = np.array(arr, dtype=np.complex128)
            if arr.shape != want:
                raise ValueError(f"{name} must have shape {want} for {self.case}, got {arr.shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "eta", complex(self.eta))


@dataclass(frozen=True)
class ProductSystemCheck:
    """Residual-level verdict on a product system instance.

    ``applicable`` means the two pivot entries are nonzero, which is what
    licenses the conclusion; ``vanishing_side`` names the side of the
    conclusion's disjunction that holds (None for ``2sets``, which has no
    disjunction, and when neither side vanishes).
    """

    hypotheses_ok: bool
    applicable: bool
    conclusion_ok: bool
    vanishing_side: str | None
    hypothesis_residuals: dict[str, float]
    conclusion_residuals: dict[str, float]
    tol: float


def check_product_system(
    values: ProductSystemValues, tol: float = DEFAULT_TOL
) -> ProductSystemCheck:
    """Evaluate the hypothesis equations, the pivots, and the conclusion.

    All three verdicts are independent: hypotheses compare each bilinear
    equation's sides to ``tol``; applicability asks that the two all-ones
    pivots exceed ``tol`` in modulus; the conclusion combines the
    vanishing-side disjunction (absent for ``2sets``) with the final
    product equations.
    """
    eta = values.eta
    if abs(eta - 1.0) <= 1e-12:
        raise ValueError("eta must differ from 1")
    a, b, c, d = values.a, values.b, values.c, values.d
    hyp: dict[str, float] = {}
    if values.case == "4sets":
        hyp["a11*b11 - eta*c11*d11"] = abs(a[1, 1] * b[1, 1] - eta * c[1, 1] * d[1, 1])
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    for mm in range(2):
                        if j * k * l * mm:
                            continue
                        hyp[f"a{j}{k}*b{l}{mm} - c{j}{l}*d{k}{mm}"] = abs(
                            a[j, k] * b[l, mm] - c[j, l] * d[k, mm]
                        )
        applicable = abs(a[1, 1]) > tol and abs(b[1, 1]) > tol
        side_c = {f"c{j}{l}": abs(c[j, l]) for j, l in ((0, 0), (0, 1), (1, 0))}
        side_d = {f"d{k}{mm}": abs(d[k, mm]) for k, mm in ((0, 0), (0, 1), (1, 0))}
        concl = {}
        for r in range(2):
            for s in range(2):
                concl[f"a{r}0*b0{s}"] = abs(a[r, 0] * b[0, s])
                concl[f"a0{r}*b{s}0"] = abs(a[0, r] * b[s, 0])
                concl[f"c{r}0*d0{s}"] = abs(c[r, 0] * d[0, s])
                concl[f"c0{r}*d{s}0"] = abs(c[0, r] * d[s, 0])
    elif values.case == "3sets":
        hyp["a11*b1 - eta*c1*d11"] = abs(a[1, 1] * b[1] - eta * c[1] * d[1, 1])
        for j in range(2):
            for k in range(2):
                for mm in range(2):
                    if j * k * mm:
                        continue
                    hyp[f"a{j}{k}*b{mm} - c{j}*d{k}{mm}"] = abs(
                        a[j, k] * b[mm] - c[j] * d[k, mm]
                    )
        applicable = abs(a[1, 1]) > tol and abs(b[1]) > tol
        side_c = {"c0": abs(c[0])}
        side_d = {"d00": abs(d[0, 0]), "d10": abs(d[1, 0])}
        concl = {
            "a00*b0": abs(a[0, 0] * b[0]),
            "c0*d00": abs(c[0] * d[0, 0]),
            "a01*b0": abs(a[0, 1] * b[0]),
            "c0*d10": abs(c[0] * d[1, 0]),
        }
    else:
        hyp["a1*b1 - eta*c1*d1"] = abs(a[1] * b[1] - eta * c[1] * d[1])
        for j in range(2):
            for mm in range(2):
                if j * mm:
                    continue
                hyp[f"a{j}*b{mm} - c{j}*d{mm}"] = abs(a[j] * b[mm] - c[j] * d[mm])
        applicable = abs(a[1]) > tol and abs(b[1]) > tol
        side_c = None
        side_d = None
        concl = {"a0*b0": abs(a[0] * b[0]), "c0*d0": abs(c[0] * d[0])}
    hypotheses_ok = all(v < tol for v in hyp.values())
    vanishing_side = None
    disjunction_ok = True
    if side_c is not None:
        c_ok = all(v < tol for v in side_c.values())
        d_ok = all(v < tol for v in side_d.values())
        disjunction_ok = c_ok or d_ok
        vanishing_side = "c" if c_ok else ("d" if d_ok else None)
        concl = {**side_c, **side_d, **concl}
    conclusion_ok = disjunction_ok and all(
        v < tol for k, v in concl.items() if "*" in k
    )
    return ProductSystemCheck(
        hypotheses_ok=hypotheses_ok,
        applicable=applicable,
        conclusion_ok=conclusion_ok,
        vanishing_side=vanishing_side,
        hypothesis_residuals=hyp,
        conclusion_residuals=concl,
        tol=tol,
    )


def _rand_entry(rng: np.random.Generator) -> complex:
    # moduli in [0.3, 1] keep every product comfortably above checking noise
    return rng.uniform(0.3, 1.0) * np.exp(2j * np.pi * rng.uniform())


def _rand_eta(rng: np.random.Generator) -> complex:
    # phase bounded away from 0 and 2*pi keeps |eta - 1| macroscopic
    return complex(np.exp(1j * rng.uniform(0.3, 2 * np.pi - 0.3)))


def generate_product_system_instance(
    case: str,
    seed: int | np.random.Generator | None = None,
    eta: complex | None = None,
    branch: str | None = None,
) -> ProductSystemValues:
    """Draw a random exact solution of the chosen product system.

    The instance satisfies every hypothesis equation identically, has
    nonzero pivots (so it is applicable), and realizes the ``branch``
    ("c" or "d") of the conclusion's vanishing side; for ``2sets`` the
    branch picks which of a0/c0 versus b0-side is forced to zero.
    """
    rng = np.random.default_rng(seed)
    if eta is None:
        eta = _rand_eta(rng)
    eta = complex(eta)
    if abs(abs(eta) - 1.0) > 1e-12 or abs(eta - 1.0) <= 1e-12:
        raise ValueError("eta must be unit modulus and different from 1")
    if branch is None:
        branch = "c" if rng.integers(0, 2) else "d"
    if branch not in ("c", "d"):
        raise ValueError(f"branch must be 'c' or 'd', got {branch!r}")
    R = _rand_entry
    if case == "4sets":
        a = np.zeros((2, 2), dtype=np.complex128)
        b = np.zeros((2, 2), dtype=np.complex128)
        c = np.zeros((2, 2), dtype=np.complex128)
        d = np.zeros((2, 2), dtype=np.complex128)
        a[1, 1], c[1, 1], d[1, 1] = R(rng), R(rng), R(rng)
        b[1, 1] = eta * c[1, 1] * d[1, 1] / a[1, 1]
        if branch == "d":
            c[0, 1], c[1, 0] = R(rng), R(rng)
            c[0, 0] = c[0, 1] * c[1, 0] / (eta * c[1, 1])
            a[0, 1] = a[1, 1] * c[0, 1] / (eta * c[1, 1])
            b[0, 1] = c[1, 0] * d[1, 1] / a[1, 1]
        else:
            d[0, 1], d[1, 0] = R(rng), R(rng)
            d[0, 0] = d[0, 1] * d[1, 0] / (eta * d[1, 1])
            a[1, 0] = a[1, 1] * d[0, 1] / (eta * d[1, 1])
            b[1, 0] = c[1, 1] * d[1, 0] / a[1, 1]
        return ProductSystemValues("4sets", eta, a, b, c, d)
    if case == "3sets":
        a = np.zeros((2, 2), dtype=np.complex128)
        b = np.zeros(2, dtype=np.complex128)
        c = np.zeros(2, dtype=np.complex128)
        d = np.zeros((2, 2), dtype=np.complex128)
        a[1, 1], c[1], d[1, 1] = R(rng), R(rng), R(rng)
        b[1] = eta * c[1] * d[1, 1] / a[1, 1]
        if branch == "d":
            c[0], d[0, 1] = R(rng), R(rng)
            a[0, 0] = a[1, 1] * c[0] * d[0, 1] / (eta * c[1] * d[1, 1])
            a[0, 1] = a[1, 1] * c[0] / (eta * c[1])
            a[1, 0] = a[1, 1] * d[0, 1] / (eta * d[1, 1])
        else:
            d[0, 1], d[1, 0] = R(rng), R(rng)
            d[0, 0] = d[0, 1] * d[1, 0] / (eta * d[1, 1])
            a[1, 0] = a[1, 1] * d[0, 1] / (eta * d[1, 1])
            b[0] = c[1] * d[1, 0] / a[1, 1]
        return ProductSystemValues("3sets", eta, a, b, c, d)
    if case == "2sets":
        a = np.zeros(2, dtype=np.complex128)
        b = np.zeros(2, dtype=np.complex128)
        c = np.zeros(2, dtype=np.complex128)
        d = np.zeros(2, dtype=np.complex128)
        a[1], c[1], d[1] = R(rng), R(rng), R(rng)
        b[1] = eta * c[1] * d[1] / a[1]
        if branch == "d":
            c[0] = R(rng)
            a[0] = a[1] * c[0] / (eta * c[1])
        else:
            d[0] = R(rng)
            b[0] = c[1] * d[0] / a[1]
        return ProductSystemValues("2sets", eta, a, b, c, d)
    raise ValueError(f"case must be '4sets', '3sets', or '2sets', got {case!r}")
