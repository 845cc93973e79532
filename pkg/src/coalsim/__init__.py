"""Coalescing particle systems on gasket graphs and heavy-tailed lattices."""

from .analysis import (
    COUNT_DECAY_EXPONENT,
    MASS_DIMENSION,
    WALK_DIMENSION,
    binomial_bound_check,
    clopper_pearson,
    closed_form_gamma_integral,
    fit_power_law,
    hausdorff_distance,
    reduction_factor,
    survival_curve,
    tail_shape_check,
    validate_eta_window,
)
from .engine import (
    CoalescentPartition,
    Event,
    EventLog,
    GasketModel,
    LatticeCircleModel,
    LatticeLineModel,
    SetState,
    apply_collision_rule,
    evolve_coalescing,
    geometric_ticks,
    nested_coupling,
    paired_partial_system,
    pigeonhole_pairs,
    range_set,
    tau_to_count,
)
from .errors import (
    BudgetError,
    CoalsimError,
    ContractError,
    DomainError,
    ParameterError,
    PreconditionError,
)
from .gasket import (
    GasketLevelGraph,
    PlanePoint,
    TriangleId,
    VertexAddress,
    build_gasket_graph,
    containing_triangles,
    covering_triangles,
    extended_triangle,
    fold_point,
    fold_vertex,
    shortest_path_distance,
    vertex_label,
)
from .manifest import ExperimentManifest, initial_set, nested_sizes, validate_manifest
from .oracle import (
    DistributionTable,
    brute_collision_prob,
    enumerate_coalescing_distribution,
    exchangeability_check,
    first_hit_distribution,
    folding_check,
)
from .samplers import (
    LatticeStepLaw,
    PathSample,
    RngStream,
    StableParams,
    circle_distance,
    circle_reduce,
    gasket_walk_step,
    max_displacement,
    simulate_lattice_walk,
    simulate_walk,
    stable_increment,
)

__version__ = "0.1.0"
