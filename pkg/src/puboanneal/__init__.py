"""puboanneal: PUBO/QUBO encodings of 3-SAT and exact annealing spectra.

The toolkit maps combinatorial problems (chiefly 3-SAT) onto spin cost
Hamiltonians, reduces cubic costs to quadratic ones with penalty ancillas,
computes annealing-sweep spectra (minimum gap, driving matrix element,
adiabaticity time), runs ensemble scaling studies, and verifies the
three-body gate syntheses that motivate keeping the cubic terms native.
"""

from .errors import (
    ConvergenceError,
    FormatError,
    GenerationError,
    NormalizationError,
    SizeLimitError,
    ToolkitError,
)
from .sat import (
    BRUTE_FORCE_MAX_VARS,
    Clause,
    CnfFormula,
    Literal,
    SolveReport,
    assignment_of_index,
    brute_force_solve,
    clause,
    critical_clause_count,
    gen_toughsat,
    gen_unique_pt1,
    gen_unique_pt4,
    index_of_assignment,
    make_rng,
    planted_sidecar,
    read_dimacs,
    read_planted_sidecar,
    violation_counts,
    with_planted,
    write_dimacs,
)
from .polynomial import (
    BOOLEAN,
    SPIN,
    MultilinearPolynomial,
    NormKind,
    SpinHamiltonian,
    bool_to_spin,
    bool_to_spin_poly,
    normalize,
    spin_flip,
    spin_poly_to_hamiltonian,
    spin_to_bool_poly,
)
from .encodings import (
    ConflictGraph,
    EncodedProblem,
    Hypergraph,
    ResourceCount,
    conflict_graph,
    encode_clause_penalty,
    encode_hypergraph_coloring,
    encode_mis,
    encode_pspin,
    encode_sat,
    encode_toy_polynomial,
    pspin_hamiltonian,
    pspin_polynomial,
    resource_counts,
    toy_value_of_bits,
    toy_value_polynomial,
)
from .quadratize import (
    QuadratizationResult,
    ancilla_count,
    assemble_cost,
    quadratize,
)
from .spectral import (
    AnnealSpec,
    DrivingPoint,
    LambdaPoint,
    LowestLevels,
    SpectrumPoint,
    SweepResult,
    build_matrices,
    driving_scan,
    lambda_scan,
    lowest_two,
    sweep,
)
from .experiments import (
    CorrelationResult,
    EnsembleStats,
    FitResult,
    InstanceRecord,
    SpeedupEstimate,
    correlation_study,
    fit_exponential,
    generate_instance,
    pearson_r,
    run_ensemble,
    speedup,
    stats_from_samples,
    write_ensemble_csv,
)
from .circuits import (
    Circuit,
    CnotSynthesis,
    Gate,
    GateKind,
    GateStats,
    VerificationReport,
    circuit_from_text,
    cnot,
    equal_up_to_phase,
    expand_zzz_to_rzz,
    gate_unitary,
    global_phase,
    hadamard,
    overhead_ratio,
    phase_distance,
    rx,
    rxx,
    ry,
    rz,
    rzz,
    stats_of,
    synth_cnot_from_rzz,
    synth_zzz,
    unitary_of,
    verify_circuit,
    zzz_target,
)

__version__ = "0.1.0"
