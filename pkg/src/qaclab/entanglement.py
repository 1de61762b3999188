"""Separability analysis relative to a marked qubit set.

A state is S-separable when some bipartition (A, B) of the qubits splits
S (both sides meet it) and the state is a product across it; otherwise
it is S-entangled.  This module decides that by scanning second Schmidt
singular values, classifies how a phase gate on S acts on a state
(disappears, simplifies to a subset, or neither), checks the disjunction
that an S-phase gate either meets an S-entangled state on one side or
simplifies, and constructs the test-string certificate that turns a
joint separability hypothesis into an explicit contradiction.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

import numpy as np

from qaclab.constructions import (
    ProductSystemCheck,
    ProductSystemValues,
    check_product_system,
)
from qaclab.errors import WitnessConstructionError
from qaclab.linalg import DEFAULT_TOL, bipartite_matrix
from qaclab.states import BitString, QuantumState, apply_structured_gate, phase_gate


@dataclass(frozen=True)
class SeparabilityResult:
    """Verdict of the S-separability scan.

    ``witness`` is the first splitting bipartition (in lexicographic
    order of the side containing qubit 1) across which the state is a
    product, with ``factors`` the corresponding unit factors; both are
    None when the state is S-entangled.  ``evidence`` maps each scanned
    side A to its second singular value.
    """

    separable: bool
    witness: tuple[tuple[int, ...], tuple[int, ...]] | None
    factors: tuple[np.ndarray, np.ndarray] | None
    evidence: dict[tuple[int, ...], float]
    tol: float


def split_candidates(n: int, s: frozenset[int]) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All bipartitions (A, B) of 1..n with 1 in A and both sides meeting s,
    in lexicographic order of A."""
    rest = [q for q in range(2, n + 1)]
    sides = []
    for r in range(len(rest) + 1):
        for combo in combinations(rest, r):
            sides.append((1,) + combo)
    sides.sort()
    out = []
    for a in sides:
        b = tuple(q for q in range(1, n + 1) if q not in set(a))
        if set(a) & s and set(b) & s:
            out.append((a, b))
    return out


def _checked_subset(n: int, s: Iterable[int]) -> frozenset[int]:
    sub = frozenset(int(q) for q in s)
    if len(sub) < 2 or not all(1 <= q <= n for q in sub):
        raise ValueError(f"s must hold at least 2 labels within 1..{n}, got {sorted(sub)}")
    return sub


def s_separability(
    state: QuantumState, s: Iterable[int], tol: float = DEFAULT_TOL
) -> SeparabilityResult:
    """Decide S-separability by scanning every splitting bipartition.

    A bipartition is a product exactly when its second singular value is
    below ``tol``; the scan stops at the first product found.
    """
    n = state.n_qubits
    sub = _checked_subset(n, s)
    evidence: dict[tuple[int, ...], float] = {}
    for a, b in split_candidates(n, sub):
        mat = bipartite_matrix(state, a)
        u, sv, vh = np.linalg.svd(mat)
        sigma2 = float(sv[1])
        evidence[a] = sigma2
        if sigma2 < tol:
            return SeparabilityResult(
                separable=True,
                witness=(a, b),
                factors=(u[:, 0].copy(), vh[0].copy()),
                evidence=evidence,
                tol=tol,
            )
    return SeparabilityResult(
        separable=False, witness=None, factors=None, evidence=evidence, tol=tol
    )


@dataclass(frozen=True)
class SimplifyStatus:
    """How a phase gate on s acts on a given state.

    ``disappears``: the state has no mass on the all-ones pattern of s,
    so the gate acts as the identity.  ``simplifies``: some qubits of s
    are pinned to |1> (no mass on their zero side), so the gate equals
    the same gate on the remaining support ``target``.  ``no_simplify``:
    neither.  The three cases are mutually exclusive and disappearance
    wins when both tests would fire.
    """

    kind: str
    target: frozenset[int] | None
    ones_mass: float
    pinned: frozenset[int]

    @property
    def disappears(self) -> bool:
        return self.kind == "disappears"

    @property
    def simplifies(self) -> bool:
        return self.kind == "simplifies"

    @property
    def no_simplify(self) -> bool:
        return self.kind == "no_simplify"


def simplify_status(
    state: QuantumState,
    s: Iterable[int],
    eta: complex = -1.0,
    tol: float = DEFAULT_TOL,
) -> SimplifyStatus:
    """Classify the action of the phase-eta gate on s against the state.

    ``eta`` is validated (unit modulus, not 1) but does not influence the
    classification: which amplitudes the gate touches depends only on s.
    """
    n = state.n_qubits
    sub = frozenset(int(q) for q in s)
    if not sub or not all(1 <= q <= n for q in sub):
        raise ValueError(f"s must be a nonempty subset of 1..{n}, got {sorted(sub)}")
    eta = complex(eta)
    if abs(abs(eta) - 1.0) > 1e-12 or abs(eta - 1.0) <= 1e-12:
        raise ValueError("eta must be unit modulus and different from 1")
    probs = np.abs(state.amplitudes) ** 2
    idx = np.arange(probs.size)
    mask = 0
    for q in sub:
        mask |= 1 << (n - q)
    ones_mass = float(np.sum(probs[(idx & mask) == mask]))
    if ones_mass < tol * tol:
        return SimplifyStatus("disappears", None, ones_mass, frozenset())
    pinned = frozenset(
        q
        for q in sub
        if float(np.sum(probs[((idx >> (n - q)) & 1) == 0])) < tol * tol
    )
    if pinned:
        return SimplifyStatus("simplifies", sub - pinned, ones_mass, pinned)
    return SimplifyStatus("no_simplify", None, ones_mass, frozenset())


@dataclass(frozen=True)
class EntanglementLemmaReport:
    """Evaluation of the disjunction: the state is S-entangled, or the
    phase gate's output is S-entangled, or the gate simplifies.

    ``holds`` is expected to be true for every valid input, so a false
    value flags a bug; the per-branch evidence is kept for exactly that
    event.
    """

    holds: bool
    psi_entangled: bool
    phi_entangled: bool
    simplifies: bool
    psi_result: SeparabilityResult
    phi_result: SeparabilityResult
    simplify: SimplifyStatus
    phi: QuantumState


def entanglement_lemma_check(
    state: QuantumState,
    s: Iterable[int],
    eta: complex = -1.0,
    tol: float = DEFAULT_TOL,
) -> EntanglementLemmaReport:
    """Check the three-way disjunction for one state and one gate phase."""
    sub = _checked_subset(state.n_qubits, s)
    phi = apply_structured_gate(state, phase_gate(sub, eta))
    psi_result = s_separability(state, sub, tol)
    phi_result = s_separability(phi, sub, tol)
    simp = simplify_status(state, sub, eta, tol)
    simplifies = not simp.no_simplify
    return EntanglementLemmaReport(
        holds=(not psi_result.separable) or (not phi_result.separable) or simplifies,
        psi_entangled=not psi_result.separable,
        phi_entangled=not phi_result.separable,
        simplifies=simplifies,
        psi_result=psi_result,
        phi_result=phi_result,
        simplify=simp,
        phi=phi,
    )


@dataclass(frozen=True)
class TestStringBundle:
    """The full test-string certificate for a joint separability hypothesis.

    The input state psi is a product across (A, B); the hypothesis under
    attack is that phi, the phase gate's output, is also a product across
    (C, D).  The bundle records the canonicalized partitions, the anchor
    string u (all ones on S), the test string y, the four 2x2 amplitude
    tables read off the factor states, the collapsed product system with
    its check, and the final contradiction flag: the hypothesis forces
    ``<y|psi> = 0`` while y was chosen with ``|<y|psi>| >= tol``.
    """

    case: int
    s: frozenset[int]
    part_a: tuple[int, ...]
    part_b: tuple[int, ...]
    part_c: tuple[int, ...]
    part_d: tuple[int, ...]
    swapped_ab: bool
    swapped_cd: bool
    u: BitString
    y: BitString
    eta: complex
    overlap_u: complex
    overlap_y: complex
    psi_split_residual: float
    phi_split_residual: float
    strings: dict[str, dict[tuple[int, int], BitString]]
    amps_a: np.ndarray
    amps_b: np.ndarray
    amps_c: np.ndarray
    amps_d: np.ndarray
    product_system: ProductSystemValues
    product_check: ProductSystemCheck
    contradiction: bool
    tol: float


def _argmax_amplitude(amps: np.ndarray, allowed: np.ndarray) -> tuple[int, float]:
    """Index of the largest-modulus amplitude among ``allowed`` indices,
    smallest index on ties (inherited from argmax)."""
    sub = np.abs(amps[allowed])
    pos = int(np.argmax(sub))
    return int(allowed[pos]), float(sub[pos])


def _sub_index(bits: BitString, labels: tuple[int, ...]) -> int:
    """Index of a factor-basis string, factor qubit order = sorted labels."""
    k = len(labels)
    return sum(bits[q] << (k - 1 - i) for i, q in enumerate(labels))


def _leading_factors(state: QuantumState, a: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray, float]:
    """Leading Schmidt pair across (a, complement) plus the second singular value."""
    mat = bipartite_matrix(state, a)
    u, sv, vh = np.linalg.svd(mat)
    return u[:, 0].copy(), vh[0].copy(), float(sv[1])


def find_test_string_witness(
    psi: QuantumState,
    phi: QuantumState,
    s: Iterable[int],
    part_a: Iterable[int],
    part_c: Iterable[int],
    tol: float = DEFAULT_TOL,
) -> TestStringBundle:
    """Build the test-string contradiction certificate.

    ``psi`` must be a product across (part_a, complement); ``phi`` is the
    claimed phase-gate output of ``psi``, hypothesized to be a product
    across (part_c, complement).  Every numbered check below raises
    ``WitnessConstructionError`` with the measured quantity when it
    fails, so a diagnosis is always explicit: the anchor string u must
    carry mass, the phase at u must be a nontrivial unit, no qubit of s
    may be pinned, and the test string y must carry mass.
    """
    n = psi.n_qubits
    if phi.n_qubits != n:
        raise ValueError("psi and phi must have the same number of qubits")
    sub = _checked_subset(n, s)
    all_q = frozenset(range(1, n + 1))
    a_set = frozenset(int(q) for q in part_a)
    c_set = frozenset(int(q) for q in part_c)
    for name, side in (("part_a", a_set), ("part_c", c_set)):
        if not side or side == all_q or not side <= all_q:
            raise ValueError(f"{name} must be a nonempty proper subset of 1..{n}")
        if not (side & sub) or not ((all_q - side) & sub):
            raise ValueError(f"{name} must split s on both sides")
    b_set = all_q - a_set
    d_set = all_q - c_set

    # the input side of the hypothesis is a hard precondition
    _, _, psi_sigma2 = _leading_factors(psi, tuple(sorted(a_set)))
    if psi_sigma2 >= tol:
        raise WitnessConstructionError(
            f"input-product check failed: second singular value across "
            f"part_a is {psi_sigma2:.3e} >= tol"
        )

    amps_psi = psi.amplitudes
    idx = np.arange(amps_psi.size)
    smask = 0
    for q in sub:
        smask |= 1 << (n - q)
    ones_allowed = idx[(idx & smask) == smask]
    u_idx, u_mod = _argmax_amplitude(amps_psi, ones_allowed)
    if u_mod < tol:
        raise WitnessConstructionError(
            f"anchor-string check failed: largest amplitude on the all-ones "
            f"pattern of s is {u_mod:.3e} < tol (the gate disappears)"
        )
    u = BitString.from_index(n, u_idx)
    overlap_u = complex(amps_psi[u_idx])
    eta = complex(phi.amplitudes[u_idx]) / overlap_u
    if abs(abs(eta) - 1.0) > 1e-6:
        raise WitnessConstructionError(
            f"phase check failed: |<u|phi>/<u|psi>| = {abs(eta):.6f} is not 1, "
            f"so phi is not a phase action on psi at u"
        )
    if abs(eta - 1.0) < tol:
        raise WitnessConstructionError(
            "phase check failed: the phase at u is 1, so there is nothing to refute"
        )
    probs = np.abs(amps_psi) ** 2
    for q in sorted(sub):
        zero_mass = float(np.sum(probs[((idx >> (n - q)) & 1) == 0]))
        if zero_mass < tol * tol:
            raise WitnessConstructionError(
                f"pin check failed: qubit {q} of s is pinned to one "
                f"(zero-side mass {zero_mass:.3e}), so the gate simplifies"
            )

    # orient the empty quadrants into the canonical positions
    def quadrants(aa: frozenset[int], cc: frozenset[int]) -> dict[str, frozenset[int]]:
        bb, dd = all_q - aa, all_q - cc
        return {
            "AC": sub & aa & cc,
            "AD": sub & aa & dd,
            "BC": sub & bb & cc,
            "BD": sub & bb & dd,
        }

    quads = quadrants(a_set, c_set)
    empties = sorted(name for name, members in quads.items() if not members)
    case = 1 + len(empties)
    if case > 3:
        raise ValueError("both partitions must split s, leaving at most 2 empty quadrants")
    swapped_ab = swapped_cd = False
    if case == 2:
        which = empties[0]
        swapped_ab = which in ("AC", "AD")
        swapped_cd = which in ("AD", "BD")
    elif case == 3:
        if set(empties) == {"AC", "BD"}:
            swapped_cd = True
        elif set(empties) != {"AD", "BC"}:
            raise ValueError(
                f"quadrants {empties} cannot both be empty when the partitions split s"
            )
    if swapped_ab:
        a_set, b_set = b_set, a_set
    if swapped_cd:
        c_set, d_set = d_set, c_set
    quads = quadrants(a_set, c_set)
    if (case == 2 and quads["BC"]) or (case == 3 and (quads["AD"] or quads["BC"])):
        raise RuntimeError("internal: quadrant orientation failed")

    # the test string: largest-mass string with a zero in every nonempty quadrant
    feasible = np.ones(amps_psi.size, dtype=bool)
    for members in quads.values():
        if members:
            qmask = 0
            for q in members:
                qmask |= 1 << (n - q)
            feasible &= (idx & qmask) != qmask
    y_idx, y_mod = _argmax_amplitude(amps_psi, idx[feasible])
    if y_mod < tol:
        raise WitnessConstructionError(
            f"test-string check failed: every string with a zero in each "
            f"nonempty quadrant has amplitude below tol (largest {y_mod:.3e})"
        )
    y = BitString.from_index(n, y_idx)
    overlap_y = complex(amps_psi[y_idx])

    a_lab = tuple(sorted(a_set))
    b_lab = tuple(sorted(b_set))
    c_lab = tuple(sorted(c_set))
    d_lab = tuple(sorted(d_set))
    psi_a, psi_b, psi_sigma2 = _leading_factors(psi, a_lab)
    phi_c, phi_d, phi_sigma2 = _leading_factors(phi, c_lab)

    # string tables: each side is cut by the other partition, and the two
    # indices choose u or y on the two pieces independently
    def table(first: frozenset[int], second: frozenset[int]) -> dict[tuple[int, int], BitString]:
        out = {}
        for j in range(2):
            for k in range(2):
                left = (u if j else y).restrict(first)
                right = (u if k else y).restrict(second)
                out[(j, k)] = left.union(right)
        return out

    str_a = table(a_set & c_set, a_set & d_set)
    str_b = table(b_set & c_set, b_set & d_set)
    str_c = table(c_set & a_set, c_set & b_set)
    str_d = table(d_set & a_set, d_set & b_set)
    for j in range(2):
        for k in range(2):
            for l in range(2):
                for mm in range(2):
                    glued = str_a[(j, k)].union(str_b[(l, mm)])
                    other = str_c[(j, l)].union(str_d[(k, mm)])
                    if glued != other:
                        raise RuntimeError("internal: string tables fail the gluing identity")

    amps_a = np.array(
        [[psi_a[_sub_index(str_a[(j, k)], a_lab)] for k in range(2)] for j in range(2)]
    )
    amps_b = np.array(
        [[psi_b[_sub_index(str_b[(l, mm)], b_lab)] for mm in range(2)] for l in range(2)]
    )
    amps_c = np.array(
        [[phi_c[_sub_index(str_c[(j, l)], c_lab)] for l in range(2)] for j in range(2)]
    )
    amps_d = np.array(
        [[phi_d[_sub_index(str_d[(k, mm)], d_lab)] for mm in range(2)] for k in range(2)]
    )

    # the factorized equations match the system with the reciprocal phase
    eta_inv = 1.0 / eta
    if case == 1:
        values = ProductSystemValues("4sets", eta_inv, amps_a, amps_b, amps_c, amps_d)
    elif case == 2:
        if abs(amps_b[0, 1]) < tol:
            raise WitnessConstructionError(
                f"pivot check failed: the factor amplitude b01 is "
                f"{abs(amps_b[0, 1]):.3e} < tol, so the collapsed system is inapplicable"
            )
        values = ProductSystemValues(
            "3sets", eta_inv, amps_a, amps_b[0, :], amps_c[:, 0], amps_d
        )
    else:
        for name, mod in (("a10", abs(amps_a[1, 0])), ("b01", abs(amps_b[0, 1]))):
            if mod < tol:
                raise WitnessConstructionError(
                    f"pivot check failed: the factor amplitude {name} is "
                    f"{mod:.3e} < tol, so the collapsed system is inapplicable"
                )
        values = ProductSystemValues(
            "2sets", eta_inv, amps_a[:, 0], amps_b[0, :], amps_c[:, 0], amps_d[0, :]
        )
    check = check_product_system(values, tol)
    contradiction = bool(check.applicable and abs(overlap_y) >= tol)
    return TestStringBundle(
        case=case,
        s=sub,
        part_a=a_lab,
        part_b=b_lab,
        part_c=c_lab,
        part_d=d_lab,
        swapped_ab=swapped_ab,
        swapped_cd=swapped_cd,
        u=u,
        y=y,
        eta=eta,
        overlap_u=overlap_u,
        overlap_y=overlap_y,
        psi_split_residual=psi_sigma2,
        phi_split_residual=phi_sigma2,
        strings={"A": str_a, "B": str_b, "C": str_c, "D": str_d},
        amps_a=amps_a,
        amps_b=amps_b,
        amps_c=amps_c,
        amps_d=amps_d,
        product_system=values,
        product_check=check,
        contradiction=contradiction,
        tol=tol,
    )
