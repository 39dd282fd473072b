"""Dense-coding capacities of bipartite states and programmable-gate numerics."""

from .qmath import (
    DensityMatrix,
    PureState,
    basis_state,
    bell_state,
    binary_entropy,
    is_ppt,
    maximally_entangled,
    maximally_mixed,
    partial_trace,
    partial_transpose,
    relative_entropy,
    schmidt,
    singlet,
    tensor,
    tensor_pure,
    trace_distance,
    von_neumann_entropy,
)
from .channels import (
    ChoiMatrix,
    QuantumChannel,
    StinespringIsometry,
    apply,
    apply_local,
    channels_equal,
    choi,
    dilate,
    random_channel,
    random_state,
    random_unitary,
    undilate,
    weyl_basis,
    weyl_twirl,
)
from .optimize import (
    OptConfig,
    OptReport,
    entropy_gradient,
    min_local_output_entropy,
    optimize_ensemble,
    stiefel_minimize,
)
from .capacity import (
    CapacityResult,
    Ensemble,
    additivity_gap,
    capacity_achieving_ensemble,
    coherent_information,
    dc_capacity,
    dc_capacity_block,
    dc_capacity_multicopy,
    dc_mutual_information,
    holevo_information,
    noisy_dc_capacity,
    random_separable,
    ree_bound,
    werner_state,
)
from .pqg import (
    ProgrammableGate,
    UnitaryNet,
    approximation_error,
    control_gate,
    emulate_encoding,
    induced_map,
    net_gate,
    net_gate_around,
    program_orthogonality_check,
    scalability_witness,
)

__version__ = "0.1.0"
