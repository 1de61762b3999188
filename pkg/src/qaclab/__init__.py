"""Toolkit for constant-depth layered circuits built from single-qubit
gates and C-SIGN layers: exact simulation, clean and weak parity checks,
separability analysis relative to a marked qubit set, killer-state
certificates, product-system checks, and seeded depth-2 synthesis search.
"""

from qaclab.circuits import (
    CircuitTrace,
    CleanSimReport,
    MixingClass,
    QacCircuit,
    QubitRoleReport,
    WeakParityReport,
    apply_circuit,
    check_clean_simulation,
    check_weak_parity,
    circuit_unitary,
    classify_mixing,
    classify_qubit_roles,
    input_state,
    invert_circuit,
    non_mixing_matrix,
    run_circuit,
    validate_circuit,
)
from qaclab.constructions import (
    Depth1Refutation,
    KillerStateCertificate,
    ProductSystemCheck,
    ProductSystemValues,
    check_product_system,
    generate_product_system_instance,
    kill_parity_depth2,
    kill_parity_state,
    refute_depth1,
)
from qaclab.entanglement import (
    EntanglementLemmaReport,
    SeparabilityResult,
    SimplifyStatus,
    TestStringBundle,
    entanglement_lemma_check,
    find_test_string_witness,
    s_separability,
    simplify_status,
    split_candidates,
)
from qaclab.errors import (
    CircuitValidationError,
    PreconditionError,
    WitnessConstructionError,
)
from qaclab.kernels import BACKEND
from qaclab.linalg import (
    DEFAULT_TOL,
    Subspace,
    bipartite_matrix,
    is_unitary,
    null_space,
    random_unitary_haar,
    reduced_density,
    schmidt_singular_values,
    trace_distance,
)
from qaclab.search import (
    ParamCircuit,
    SearchReport,
    SweepReport,
    clean_sim_loss,
    clean_sim_loss_and_grad,
    enumerate_topologies,
    optimize_depth2,
    sweep_topologies,
    zyz_matrix,
)
from qaclab.states import (
    BitString,
    QuantumState,
    StructuredGate,
    apply_single_qubit,
    apply_structured_gate,
    classify_state_parity,
    compose_product,
    csign,
    fanout_gate,
    parity_gate,
    parity_subspace_basis,
    phase_gate,
    states_equal,
    toffoli_gate,
)

__version__ = "0.1.0"
